// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gridsplit/linalg.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

namespace gfm {
// State layout.
enum State : int {
  i_gd = 0, i_gq, v_Cd, v_Cq, i_Ld, i_Lq, Int_id, Int_iq, i_Ld_ref, i_Lq_ref, P_lpf, theta_ps, Q_lpf,
};
// Input layout.
enum Input : int { v_gd = 0, v_gq, P_ref, Q_ref };
constexpr int kStates = 13;
constexpr int kInputs = 4;
}  // namespace gfm

using GfmState = Eigen::Matrix<double, gfm::kStates, 1>;
using GfmInput = Eigen::Matrix<double, gfm::kInputs, 1>;
using GfmA = Eigen::Matrix<double, gfm::kStates, gfm::kStates>;
using GfmB = Eigen::Matrix<double, gfm::kStates, gfm::kInputs>;

struct GfmOperatingPoint {
  double i_gd0 = 0.0, i_gq0 = 0.0;
  double v_Cd0 = 0.0, v_Cq0 = 0.0;
  double i_Ld0 = 0.0, i_Lq0 = 0.0;
  double v_cd0 = 0.0, v_cq0 = 0.0;
};

/// SI quantities (ohm, H, F, rad/s, W, VAr, V). Droop gains m_p in rad/s/W
/// and n_q in V/VAr.
struct GfmParams {
  double R_f = 0.0, L_f = 0.0, C_f = 0.0;
  double R_g = 0.0, L_g = 0.0;
  double R_v = 0.0, L_v = 0.0;
  double Kp_id = 0.0, Ki_id = 0.0, Kp_iq = 0.0, Ki_iq = 0.0;
  double w_lpf = 0.0, m_p = 0.0, n_q = 0.0, w1 = 0.0;
  GfmOperatingPoint op;
  double S_rated = 0.0;   // VA
  double V_rated = 0.0;   // line-to-line rms, V
  double I_max = 1.1;     // current reference clamp, pu of rated current
  double tau_dc = 0.0;    // accepted, not modeled

  double v_peak() const;  // rated peak phase voltage
  double i_base() const;  // rated peak current
  void validate() const;
};

GfmOperatingPoint zero_power_point(double v_peak);

struct AggregateSpec {
  int n_modules = 1;
  double module_rating = 0.0;
  double system_base = 100e6;
  int transformer_count = 1;

  double rating() const { return n_modules * module_rating; }
};

/// Module parameters plus aggregation read from a `[gfm name]` block.
struct GfmDefinition {
  GfmParams module;
  AggregateSpec aggregate;
};

GfmDefinition gfm_definition_from_block(const ParamBlock& block, double frequency, double base_mva);

struct GfmStateSpace {
  GfmA A = GfmA::Zero();
  GfmB B = GfmB::Zero();
};

GfmStateSpace gfm_build_state_space(const GfmParams& p);
GfmState gfm_derivative(const GfmStateSpace& ss, const GfmState& x, const GfmInput& u);
Eigen::VectorXd gfm_derivative(const GfmStateSpace& ss, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u);

struct StabilityReport {
  std::vector<Complex> eigenvalues;  // sorted by real part, then imaginary
  bool stable = false;               // all real parts < 0
  bool stable_coupled = false;       // same, ignoring states with an all-zero column
  std::vector<int> decoupled_states;
};

StabilityReport gfm_eigen_stability(const GfmA& A);
StabilityReport gfm_eigen_stability(const GfmStateSpace& ss);

GfmParams aggregate(const AggregateSpec& spec, const GfmParams& module);

/// State-space expressed in per-unit on the unit's own rating.
GfmStateSpace gfm_per_unit(const GfmStateSpace& ss, const GfmParams& p);

/// Ties the SI model to the network phasor frame. `scale` is SI peak volts
/// per network pu at the GFM bus, `angle` the reference angle of the
/// GFM's grid frame in the network frame.
struct GfmFrame {
  double scale = 0.0;
  double angle = 0.0;
  double S_base = 100e6;  // network base, VA
};

struct NortonInjection {
  Complex current;  // pu
  Complex shunt;    // pu
};

NortonInjection gfm_network_interface(const GfmParams& p, const GfmFrame& frame, const GfmState& x);
Complex gfm_grid_voltage(const GfmParams& p);  // steady grid voltage of the operating point
GfmInput gfm_input_from_bus(const GfmParams& p, const GfmFrame& frame, Complex V_bus,
                            double dP_ref = 0.0, double dQ_ref = 0.0);

/// Rotates grid-frame states by theta_ps and folds the angle into the frame.
void gfm_reanchor(const GfmParams& p, GfmFrame& frame, GfmState& x);

/// Limits |i*_L| to I_max; returns true when the clamp acted.
bool gfm_clamp_current(const GfmParams& p, GfmState& x);

double gfm_frequency(const GfmParams& p, const GfmState& x, double dP_ref = 0.0);

struct MachineParams {
  double H = 0.0;
  double D = 0.0;        // pu power per rad/s of speed deviation
  double omega_s = 0.0;  // rad/s
  double tau_g = 0.0;
  double dp = 0.0;
  double P_m_ref = 0.0;  // pu
  double xd_p = 0.0;     // transient reactance, pu

  void validate() const;
};

struct MachineState {
  double delta = 0.0;
  double omega = 0.0;
  double P_m = 0.0;
  double E_p = 0.0;
};

struct SwingRates {
  double d_delta = 0.0;
  double d_omega = 0.0;
  double d_P_m = 0.0;
};

SwingRates swing_derivative(const MachineParams& m, const MachineState& s, double P_e);

/// Reads H, D, tau_g, dp, xd_p (and optional Pm_ref) from a `[machine]` block.
MachineParams machine_params_from_block(const ParamBlock& block, double frequency);

Complex machine_emf(const MachineState& s);
NortonInjection machine_norton(const MachineParams& m, const MachineState& s);
double machine_electrical_power(const MachineParams& m, const MachineState& s, Complex V_bus);

}  // namespace gridsplit
