// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "gridsplit/devices.hpp"
#include "gridsplit/error.hpp"
#include "gfm_oracle.hpp"
#include "support.hpp"

using namespace gridsplit;
using namespace gridsplit::testing;

namespace {

GfmParams loaded_point(GfmParams p) {
  p.op.i_gd0 = 12.0;
  p.op.i_gq0 = -7.0;
  p.op.v_Cq0 = 4.0;
  p.op.i_Ld0 = 11.0;
  p.op.i_Lq0 = 3.0;
  p.op.v_cq0 = 6.0;
  p.op.v_cd0 = p.op.v_Cd0 + 2.0;
  return p;
}

}  // namespace

TEST_CASE("gfm state space: shapes and hand-derived entries") {
  const GfmParams p = table_gfm().module;
  const GfmStateSpace ss = gfm_build_state_space(p);
  CHECK(ss.A.rows() == 13);
  CHECK(ss.A.cols() == 13);
  CHECK(ss.B.rows() == 13);
  CHECK(ss.B.cols() == 4);
  CHECK(ss.A(gfm::i_gd, gfm::i_gd) == doctest::Approx(-3.8).epsilon(1e-12));
  CHECK(ss.A(gfm::i_gd, gfm::i_gq) == doctest::Approx(376.99111843).epsilon(1e-9));
  CHECK(ss.A(gfm::i_gd, gfm::v_Cd) == doctest::Approx(66.6666666667).epsilon(1e-10));
  CHECK(ss.B(gfm::i_gd, gfm::v_gd) == doctest::Approx(-66.6666666667).epsilon(1e-10));
}

TEST_CASE("gfm state space: droop row") {
  const GfmParams p = table_gfm().module;
  const GfmStateSpace ss = gfm_build_state_space(p);
  for (int c = 0; c < 13; ++c) CHECK(ss.A(gfm::theta_ps, c) == (c == gfm::P_lpf ? -p.m_p : 0.0));
  for (int c = 0; c < 4; ++c) CHECK(ss.B(gfm::theta_ps, c) == (c == gfm::P_ref ? p.m_p : 0.0));
}

TEST_CASE("gfm state space: zero-power point keeps only voltage terms in the angle column") {
  const GfmParams p = table_gfm().module;
  const GfmStateSpace ss = gfm_build_state_space(p);
  const GfmStateSpace loaded = gfm_build_state_space(loaded_point(p));
  CHECK(ss.A(gfm::Int_id, gfm::theta_ps) == 0.0);
  CHECK(ss.A(gfm::P_lpf, gfm::theta_ps) == 0.0);
  CHECK(ss.A(gfm::i_Lq_ref, gfm::theta_ps) == doctest::Approx(p.op.v_Cd0 / p.L_v).epsilon(1e-12));
  CHECK(loaded.A(gfm::Int_id, gfm::theta_ps) != 0.0);
}

TEST_CASE("gfm state space: integrator column is zero with zero q-axis gains") {
  const GfmStateSpace ss = gfm_build_state_space(table_gfm().module);
  CHECK(ss.A.col(gfm::Int_iq).isZero(0.0));
}

TEST_CASE("gfm derivative: basis probes") {
  const GfmStateSpace ss = gfm_build_state_space(table_gfm().module);
  const GfmState zero = GfmState::Zero();
  const GfmInput no_input = GfmInput::Zero();
  CHECK(gfm_derivative(ss, zero, no_input).isZero(0.0));
  CHECK(gfm_derivative(ss, GfmState(GfmState::Unit(gfm::theta_ps)), no_input) == ss.A.col(gfm::theta_ps));
  GfmState d = gfm_derivative(ss, GfmState(GfmState::Unit(0)), no_input);
  CHECK(d(0) == doctest::Approx(-3.8).epsilon(1e-12));
  const Eigen::VectorXd short_x = Eigen::VectorXd::Zero(12), u4 = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(gfm_derivative(ss, short_x, u4), Error);
}

TEST_CASE("gfm derivative: matches the scalar oracle on random probes") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n01;
  for (const GfmParams& p : {table_gfm().module, loaded_point(table_gfm().module)}) {
    const GfmStateSpace ss = gfm_build_state_space(p);
    for (int k = 0; k < 100; ++k) {
      GfmState x;
      GfmInput u;
      for (int i = 0; i < 13; ++i) x(i) = n01(rng);
      for (int i = 0; i < 4; ++i) u(i) = n01(rng);
      GfmState a = gfm_derivative(ss, x, u);
      GfmState b = gfm_oracle(p, x, u);
      double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("gfm stability: identity test and bundled parameters") {
  GfmA A = -GfmA::Identity();
  StabilityReport r = gfm_eigen_stability(A);
  CHECK(r.eigenvalues.size() == 13);
  for (Complex l : r.eigenvalues) CHECK(l == Complex(-1.0, 0.0));
  CHECK(r.stable);

  const GfmDefinition def = table_gfm();
  StabilityReport t = gfm_eigen_stability(gfm_build_state_space(aggregate(def.aggregate, def.module)));
  CHECK(t.eigenvalues.size() == 13);
  CHECK(t.stable_coupled);
  CHECK(t.decoupled_states == std::vector<int>{gfm::Int_iq});
  int marginal = 0;
  for (Complex l : t.eigenvalues)
    if (l.real() >= 0.0) ++marginal;
  CHECK(marginal <= 1);
}

TEST_CASE("gfm stability: weak virtual admittance sweep is recorded") {
  GfmParams p = table_gfm().module;
  p.L_v = 1e-6;
  p.R_v = 0.2 * p.w1 * p.L_v;
  p.L_g = 1e-5;
  StabilityReport r = gfm_eigen_stability(gfm_build_state_space(p));
  CHECK(r.eigenvalues.size() == 13);
  MESSAGE("L_v -> 0 stable_coupled = " << r.stable_coupled);
}

TEST_CASE("aggregate: parallel modules") {
  GfmParams m = table_gfm().module;
  AggregateSpec one{1, m.S_rated, 100e6, 1};
  GfmParams same = aggregate(one, m);
  CHECK(same.L_f == m.L_f);
  CHECK(same.C_f == m.C_f);
  CHECK(same.S_rated == m.S_rated);

  AggregateSpec two{2, m.S_rated, 100e6, 1};
  GfmParams a = aggregate(two, m);
  CHECK(a.L_f == doctest::Approx(2.5e-3).epsilon(1e-15));
  CHECK(a.C_f == doctest::Approx(20e-6).epsilon(1e-15));
  CHECK(a.S_rated == 2 * m.S_rated);
  CHECK_THROWS_AS(aggregate(AggregateSpec{0, m.S_rated, 100e6, 1}, m), Error);
}

TEST_CASE("aggregate: per-unit model is invariant") {
  GfmParams m = loaded_point(table_gfm().module);
  const GfmStateSpace base = gfm_per_unit(gfm_build_state_space(m), m);
  const auto base_eig = gfm_eigen_stability(base.A).eigenvalues;
  for (int n : {2, 7, 200}) {
    GfmParams a = aggregate(AggregateSpec{n, m.S_rated, 100e6, 1}, m);
    GfmStateSpace pu = gfm_per_unit(gfm_build_state_space(a), a);
    CHECK((pu.A - base.A).cwiseAbs().maxCoeff() <= 1e-12 * base.A.cwiseAbs().maxCoeff());
    CHECK((pu.B - base.B).cwiseAbs().maxCoeff() <= 1e-12 * base.B.cwiseAbs().maxCoeff());
    auto eig = gfm_eigen_stability(pu.A).eigenvalues;
    for (std::size_t k = 0; k < eig.size(); ++k) CHECK(std::abs(eig[k] - base_eig[k]) <= 1e-9 * std::abs(base_eig[k]) + 1e-9);
  }
}

TEST_CASE("gfm network interface: origin and d-axis perturbation") {
  const GfmDefinition def = table_gfm();
  const GfmParams p = aggregate(def.aggregate, def.module);
  GfmFrame frame{p.v_peak(), 0.0, p.S_rated};
  GfmState x = GfmState::Zero();
  CHECK(gfm_network_interface(p, frame, x).current == Complex{});
  x(gfm::i_gd) = 0.1 * p.i_base();
  NortonInjection inj = gfm_network_interface(p, frame, x);
  CHECK(inj.current.real() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(inj.current.imag()) < 1e-15);
}

TEST_CASE("gfm network interface: bus voltage round trip") {
  const GfmDefinition def = table_gfm();
  const GfmParams p = aggregate(def.aggregate, def.module);
  GfmFrame frame{p.v_peak(), 0.3, 100e6};
  const Complex V = std::polar(1.0, 0.3);
  GfmInput u = gfm_input_from_bus(p, frame, V);
  CHECK(std::abs(u(0)) < 1e-9);
  CHECK(std::abs(u(1)) < 1e-9);
  const Complex V2 = std::polar(1.01, 0.3);
  GfmInput u2 = gfm_input_from_bus(p, frame, V2);
  CHECK(u2(0) == doctest::Approx(0.01 * p.v_peak()).epsilon(1e-9));
}

TEST_CASE("gfm reanchor preserves the physical state") {
  const GfmDefinition def = table_gfm();
  const GfmParams p = loaded_point(aggregate(def.aggregate, def.module));
  GfmFrame frame{p.v_peak(), 0.1, 100e6};
  GfmState x = GfmState::Zero();
  x(gfm::i_gd) = 3.0;
  x(gfm::i_gq) = -2.0;
  x(gfm::theta_ps) = 0.05;
  const Complex before = gfm_network_interface(p, frame, x).current;
  GfmState y = x;
  GfmFrame f2 = frame;
  gfm_reanchor(p, f2, y);
  CHECK(y(gfm::theta_ps) == 0.0);
  CHECK(f2.angle == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(std::abs(gfm_network_interface(p, f2, y).current - before) < 1e-12 * std::abs(before));
}

TEST_CASE("gfm current clamp") {
  const GfmParams p = table_gfm().module;
  GfmState x = GfmState::Zero();
  x(gfm::i_Ld_ref) = 0.5 * p.i_base();
  CHECK_FALSE(gfm_clamp_current(p, x));
  x(gfm::i_Ld_ref) = 3.0 * p.i_base();
  x(gfm::i_Lq_ref) = 4.0 * p.i_base();
  CHECK(gfm_clamp_current(p, x));
  CHECK(std::hypot(x(gfm::i_Ld_ref), x(gfm::i_Lq_ref)) == doctest::Approx(p.I_max * p.i_base()).epsilon(1e-12));
  CHECK(x(gfm::i_Lq_ref) / x(gfm::i_Ld_ref) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gfm parameters: validation") {
  GfmParams p = table_gfm().module;
  p.L_f = 0.0;
  CHECK_THROWS_AS(gfm_build_state_space(p), Error);
}

TEST_CASE("swing: equilibrium and spot value") {
  MachineParams m;
  m.H = 3.7;
  m.D = 0.0;
  m.omega_s = 2.0 * M_PI * 60.0;
  m.tau_g = 5.0;
  m.dp = 0.01;
  m.P_m_ref = 0.8;
  m.xd_p = 0.1;
  MachineState s{0.2, m.omega_s, 0.8, 1.05};
  SwingRates eq = swing_derivative(m, s, 0.8);
  CHECK(eq.d_delta == 0.0);
  CHECK(eq.d_omega == 0.0);
  CHECK(eq.d_P_m == 0.0);

  SwingRates r = swing_derivative(m, s, 0.7);
  CHECK(std::abs(r.d_omega - 5.0945) <= 1e-4);
  CHECK(r.d_omega == doctest::Approx(0.1 * m.omega_s / 7.4).epsilon(1e-14));

  CHECK(swing_derivative(m, MachineState{0.2, m.omega_s + 1e-3, 0.8, 1.05}, 0.8).d_delta != 0.0);
  m.P_m_ref = 0.9;
  CHECK(swing_derivative(m, s, 0.8).d_P_m != 0.0);
}

TEST_CASE("swing: constant acceleration gives a quadratic angle") {
  MachineParams m;
  m.H = 3.7;
  m.omega_s = 2.0 * M_PI * 60.0;
  m.tau_g = 1e12;
  m.dp = 1e12;
  m.xd_p = 0.1;
  m.P_m_ref = 1.0;
  MachineState s{0.0, m.omega_s, 1.0, 1.0};
  const double a = swing_derivative(m, s, 0.9).d_omega;
  const double h = 1e-3;
  for (int k = 0; k < 1000; ++k) {
    // Exact update for constant acceleration.
    SwingRates r = swing_derivative(m, s, 0.9);
    s.delta += r.d_delta * h + 0.5 * r.d_omega * h * h;
    s.omega += r.d_omega * h;
  }
  CHECK(s.delta == doctest::Approx(0.5 * a * 1.0).epsilon(1e-9));
}

TEST_CASE("machine: Norton source and electrical power") {
  MachineParams m;
  m.xd_p = 0.2;
  MachineState s{0.3, 377.0, 1.0, 1.1};
  NortonInjection n = machine_norton(m, s);
  CHECK(std::abs(n.shunt - Complex(0, -5)) < 1e-15);
  CHECK(std::abs(n.current - std::polar(1.1, 0.3) / Complex(0, 0.2)) < 1e-15);
  CHECK(machine_electrical_power(m, s, 1.0) == doctest::Approx(1.1 * std::sin(0.3) / 0.2).epsilon(1e-12));
}

TEST_CASE("machine parameters from a block") {
  PowerFlowCase c = load_case(case9_path());
  MachineParams m = machine_params_from_block(c.block("g2"), c.frequency);
  CHECK(m.H == 3.7);
  CHECK(m.omega_s == doctest::Approx(376.99111843).epsilon(1e-10));
  CHECK(m.xd_p == 0.1198);
}
