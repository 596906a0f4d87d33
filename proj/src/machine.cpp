// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "gridsplit/devices.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

void MachineParams::validate() const {
  auto fail = [](const char* m) { throw Error(ErrorCode::validation, std::string("machine parameters: ") + m); };
  if (!(H > 0.0)) fail("H must be positive");
  if (!(tau_g > 0.0)) fail("tau_g must be positive");
  if (!(dp > 0.0)) fail("dp must be positive");
  if (!(omega_s > 0.0)) fail("omega_s must be positive");
  if (!(xd_p > 0.0)) fail("xd_p must be positive");
  if (!(D >= 0.0)) fail("D must be non-negative");
}

SwingRates swing_derivative(const MachineParams& m, const MachineState& s, double P_e) {
  const double dw = s.omega - m.omega_s;
  SwingRates r;
  r.d_delta = dw;
  r.d_omega = (m.omega_s / (2.0 * m.H)) * (s.P_m - P_e - m.D * dw);
  r.d_P_m = (m.P_m_ref - s.P_m - (1.0 / m.dp) * dw / m.omega_s) / m.tau_g;
  return r;
}

MachineParams machine_params_from_block(const ParamBlock& b, double frequency) {
  MachineParams m;
  m.H = b.get("H");
  m.D = b.get("D");
  m.tau_g = b.get("tau_g");
  m.dp = b.get("dp");
  m.xd_p = b.get("xd_p");
  m.omega_s = 2.0 * M_PI * frequency;
  m.P_m_ref = b.get_or("Pm_ref", std::numeric_limits<double>::quiet_NaN());
  m.validate();
  return m;
}

Complex machine_emf(const MachineState& s) { return std::polar(s.E_p, s.delta); }

NortonInjection machine_norton(const MachineParams& m, const MachineState& s) {
  const Complex z(0.0, m.xd_p);
  return NortonInjection{machine_emf(s) / z, 1.0 / z};
}

double machine_electrical_power(const MachineParams& m, const MachineState& s, Complex V_bus) {
  const Complex E = machine_emf(s);
  return (E * std::conj((E - V_bus) / Complex(0.0, m.xd_p))).real();
}

}  // namespace gridsplit
