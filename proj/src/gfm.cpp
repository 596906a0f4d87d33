// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "gridsplit/devices.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

namespace {

constexpr int kVars = gfm::kStates + gfm::kInputs;

// Linear combination of the 13 states followed by the 4 inputs.
struct Lin {
  std::array<double, kVars> c{};

  static Lin state(int i) {
    Lin l;
    l.c[static_cast<std::size_t>(i)] = 1.0;
    return l;
  }
  static Lin input(int i) { return state(gfm::kStates + i); }

  Lin operator+(const Lin& o) const {
    Lin r;
    for (std::size_t k = 0; k < c.size(); ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  Lin operator-(const Lin& o) const {
    Lin r;
    for (std::size_t k = 0; k < c.size(); ++k) r.c[k] = c[k] - o.c[k];
    return r;
  }
  Lin operator-() const { return Lin{} - *this; }
  friend Lin operator*(double s, const Lin& l) {
    Lin r;
    for (std::size_t k = 0; k < l.c.size(); ++k) r.c[k] = s * l.c[k];
    return r;
  }
  Lin operator/(double s) const { return (1.0 / s) * *this; }
};

}  // namespace

double GfmParams::v_peak() const { return V_rated * std::sqrt(2.0 / 3.0); }
double GfmParams::i_base() const { return S_rated / (1.5 * v_peak()); }

void GfmParams::validate() const {
  auto fail = [](const char* m) { throw Error(ErrorCode::validation, std::string("gfm parameters: ") + m); };
  if (!(L_f > 0.0)) fail("L_f must be positive");
  if (!(C_f > 0.0)) fail("C_f must be positive");
  if (!(L_g > 0.0)) fail("L_g must be positive");
  if (!(L_v > 0.0)) fail("L_v must be positive");
  if (!(w_lpf > 0.0)) fail("w_lpf must be positive");
  if (!(w1 > 0.0)) fail("w1 must be positive");
  if (!(S_rated > 0.0)) fail("S_r must be positive");
  if (!(V_rated > 0.0)) fail("V_r must be positive");
  if (!(I_max > 0.0)) fail("I_max must be positive");
}

GfmOperatingPoint zero_power_point(double v_peak) {
  GfmOperatingPoint op;
  op.v_Cd0 = v_peak;
  op.v_cd0 = v_peak;
  return op;
}

GfmDefinition gfm_definition_from_block(const ParamBlock& b, double frequency, double base_mva) {
  GfmDefinition def;
  GfmParams& p = def.module;
  p.w1 = b.get_or("w1", 2.0 * M_PI * frequency);
  p.R_f = b.get("R_f");
  p.L_f = b.get("L_f");
  p.C_f = b.get("C_f");
  p.R_g = b.get("R_g");
  p.L_g = b.get("L_g");
  p.L_v = b.get("L_v");
  p.R_v = b.has("R_v") ? b.get("R_v") : b.get("Rv_over_Xv") * p.w1 * p.L_v;
  p.Kp_id = b.get("Kp_id");
  p.Ki_id = b.get("Ki_id");
  p.Kp_iq = b.get("Kp_iq");
  p.Ki_iq = b.get("Ki_iq");
  p.w_lpf = b.get("w_lpf");
  p.S_rated = b.get("S_r");
  p.V_rated = b.get_or("V_r", 380.0);
  p.I_max = b.get_or("I_max", 1.1);
  p.tau_dc = b.get_or("tau_dc", 0.05);
  // Droop gains are given per unit of the module rating.
  p.m_p = b.get("m_p") * p.w1 / p.S_rated;
  p.n_q = b.get("n_q") * p.v_peak() / p.S_rated;
  p.op = zero_power_point(p.v_peak());
  p.validate();

  double n = b.get_or("n", 200.0);
  if (!(n >= 1.0) || n != std::floor(n)) throw Error(ErrorCode::validation, "gfm block: n must be an integer >= 1");
  def.aggregate.n_modules = static_cast<int>(n);
  def.aggregate.module_rating = p.S_rated;
  def.aggregate.system_base = base_mva * 1e6;
  def.aggregate.transformer_count = static_cast<int>(b.get_or("transformers", 100.0));
  return def;
}

GfmStateSpace gfm_build_state_space(const GfmParams& p) {
  p.validate();
  using namespace gfm;
  const GfmOperatingPoint& o = p.op;
  auto X = [](int i) { return Lin::state(i); };
  auto U = [](int i) { return Lin::input(i); };
  const Lin th = X(theta_ps);

  // Park transform of grid-frame quantities into the control frame.
  const Lin vCd_c = X(v_Cd) + o.v_Cq0 * th;
  const Lin vCq_c = X(v_Cq) - o.v_Cd0 * th;
  const Lin igd_c = X(i_gd) + o.i_gq0 * th;
  const Lin igq_c = X(i_gq) - o.i_gd0 * th;
  const Lin iLd_c = X(i_Ld) + o.i_Lq0 * th;
  const Lin iLq_c = X(i_Lq) - o.i_Ld0 * th;

  // Current loops with feed-forward, then inverse Park of the command.
  const Lin vcd_c = p.Kp_id * (X(i_Ld_ref) - iLd_c) + p.Ki_id * X(Int_id) - p.w1 * p.L_f * iLq_c;
  const Lin vcq_c = p.Kp_iq * (X(i_Lq_ref) - iLq_c) + p.Ki_iq * X(Int_iq) - p.w1 * p.L_f * iLd_c;
  const Lin vcd = vcd_c - o.v_cq0 * th;
  const Lin vcq = vcq_c + o.v_cd0 * th;

  // Linearized powers.
  const Lin P_c = 1.5 * (o.i_gd0 * vCd_c + o.i_gq0 * vCq_c) + 1.5 * (o.v_Cd0 * igd_c + o.v_Cq0 * igq_c);
  const Lin Q_c = 1.5 * (-o.i_gq0 * vCd_c + o.i_gd0 * vCq_c) + 1.5 * (o.v_Cq0 * igd_c + o.v_Cd0 * igq_c);

  const Lin E = p.n_q * (U(Q_ref) - X(Q_lpf));

  std::array<Lin, kStates> d;
  d[i_gd] = (X(v_Cd) - U(v_gd) - p.R_g * X(i_gd) + p.w1 * p.L_g * X(i_gq)) / p.L_g;
  d[i_gq] = (X(v_Cq) - U(v_gq) - p.R_g * X(i_gq) - p.w1 * p.L_g * X(i_gd)) / p.L_g;
  d[v_Cd] = (X(i_Ld) - X(i_gd) + p.w1 * p.C_f * X(v_Cq)) / p.C_f;
  d[v_Cq] = (X(i_Lq) - X(i_gq) - p.w1 * p.C_f * X(v_Cd)) / p.C_f;
  d[i_Ld] = (vcd - X(v_Cd) - p.R_f * X(i_Ld) + p.w1 * p.L_f * X(i_Lq)) / p.L_f;
  d[i_Lq] = (vcq - X(v_Cq) - p.R_f * X(i_Lq) - p.w1 * p.L_f * X(i_Ld)) / p.L_f;
  d[Int_id] = X(i_Ld_ref) - iLd_c;
  d[Int_iq] = X(i_Lq_ref) - iLq_c;
  d[i_Ld_ref] = (E - vCd_c - p.R_v * X(i_Ld_ref) + p.w1 * p.L_v * X(i_Lq_ref)) / p.L_v;
  d[i_Lq_ref] = (-vCq_c - p.R_v * X(i_Lq_ref) - p.w1 * p.L_v * X(i_Ld_ref)) / p.L_v;
  d[P_lpf] = p.w_lpf * (P_c - X(P_lpf));
  d[theta_ps] = p.m_p * (U(P_ref) - X(P_lpf));
  d[Q_lpf] = p.w_lpf * (Q_c - X(Q_lpf));

  GfmStateSpace ss;
  for (int r = 0; r < kStates; ++r) {
    for (int c = 0; c < kStates; ++c) ss.A(r, c) = d[static_cast<std::size_t>(r)].c[static_cast<std::size_t>(c)];
    for (int c = 0; c < kInputs; ++c)
      ss.B(r, c) = d[static_cast<std::size_t>(r)].c[static_cast<std::size_t>(kStates + c)];
  }
  return ss;
}

GfmState gfm_derivative(const GfmStateSpace& ss, const GfmState& x, const GfmInput& u) {
  return ss.A * x + ss.B * u;
}

Eigen::VectorXd gfm_derivative(const GfmStateSpace& ss, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  if (x.size() != gfm::kStates || u.size() != gfm::kInputs)
    throw Error(ErrorCode::argument, "gfm_derivative: expected 13 states and 4 inputs");
  return ss.A * x + ss.B * u;
}

StabilityReport gfm_eigen_stability(const GfmA& A) {
  if (!A.allFinite()) throw Error(ErrorCode::non_finite, "gfm_eigen_stability: A has non-finite entries");
  auto eig = [](const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::divergence, "eigensolver did not converge");
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
  };
  StabilityReport rep;
  rep.eigenvalues = eig(A);
  rep.stable = std::all_of(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](Complex l) { return l.real() < 0.0; });
  std::vector<int> keep;
  for (int c = 0; c < A.cols(); ++c) {
    if (A.col(c).isZero(0.0)) rep.decoupled_states.push_back(c);
    else keep.push_back(c);
  }
  Eigen::MatrixXd R(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(keep[i], keep[j]);
  auto reduced = keep.empty() ? std::vector<Complex>{} : eig(R);
  rep.stable_coupled = std::all_of(reduced.begin(), reduced.end(), [](Complex l) { return l.real() < 0.0; });
  return rep;
}

StabilityReport gfm_eigen_stability(const GfmStateSpace& ss) { return gfm_eigen_stability(ss.A); }

GfmParams aggregate(const AggregateSpec& spec, const GfmParams& m) {
  if (spec.n_modules < 1) throw Error(ErrorCode::validation, "aggregate: n_modules must be >= 1");
  const double n = spec.n_modules;
  GfmParams a = m;
  a.R_f = m.R_f / n;
  a.L_f = m.L_f / n;
  a.R_g = m.R_g / n;
  a.L_g = m.L_g / n;
  a.R_v = m.R_v / n;
  a.L_v = m.L_v / n;
  a.C_f = m.C_f * n;
  a.Kp_id = m.Kp_id / n;
  a.Ki_id = m.Ki_id / n;
  a.Kp_iq = m.Kp_iq / n;
  a.Ki_iq = m.Ki_iq / n;
  a.m_p = m.m_p / n;
  a.n_q = m.n_q / n;
  a.S_rated = spec.module_rating > 0.0 ? spec.rating() : m.S_rated * n;
  a.op.i_gd0 = m.op.i_gd0 * n;
  a.op.i_gq0 = m.op.i_gq0 * n;
  a.op.i_Ld0 = m.op.i_Ld0 * n;
  a.op.i_Lq0 = m.op.i_Lq0 * n;
  return a;
}

GfmStateSpace gfm_per_unit(const GfmStateSpace& ss, const GfmParams& p) {
  const double Vb = p.v_peak(), Ib = p.i_base(), Sb = p.S_rated;
  Eigen::Matrix<double, gfm::kStates, 1> t;
  t << Ib, Ib, Vb, Vb, Ib, Ib, Ib, Ib, Ib, Ib, Sb, 1.0, Sb;
  Eigen::Matrix<double, gfm::kInputs, 1> tu;
  tu << Vb, Vb, Sb, Sb;
  GfmStateSpace pu;
  pu.A = t.cwiseInverse().asDiagonal() * ss.A * t.asDiagonal();
  pu.B = t.cwiseInverse().asDiagonal() * ss.B * tu.asDiagonal();
  return pu;
}

Complex gfm_grid_voltage(const GfmParams& p) {
  Complex vC(p.op.v_Cd0, p.op.v_Cq0), ig(p.op.i_gd0, p.op.i_gq0);
  return vC - Complex(p.R_g, p.w1 * p.L_g) * ig;
}

NortonInjection gfm_network_interface(const GfmParams& p, const GfmFrame& frame, const GfmState& x) {
  Complex ig(p.op.i_gd0 + x(gfm::i_gd), p.op.i_gq0 + x(gfm::i_gq));
  NortonInjection out;
  out.current = 1.5 * frame.scale / frame.S_base * ig * std::polar(1.0, frame.angle);
  return out;
}

GfmInput gfm_input_from_bus(const GfmParams& p, const GfmFrame& frame, Complex V_bus, double dP_ref, double dQ_ref) {
  Complex vg = frame.scale * V_bus * std::polar(1.0, -frame.angle) - gfm_grid_voltage(p);
  GfmInput u;
  u << vg.real(), vg.imag(), dP_ref, dQ_ref;
  return u;
}

void gfm_reanchor(const GfmParams& p, GfmFrame& frame, GfmState& x) {
  using namespace gfm;
  const double th = x(theta_ps);
  if (th == 0.0) return;
  const Complex R = std::polar(1.0, -th);
  auto rotate = [&](int d, int q, double d0, double q0) {
    Complex full = (Complex(d0 + x(d), q0 + x(q))) * R;
    x(d) = full.real() - d0;
    x(q) = full.imag() - q0;
  };
  rotate(i_gd, i_gq, p.op.i_gd0, p.op.i_gq0);
  rotate(v_Cd, v_Cq, p.op.v_Cd0, p.op.v_Cq0);
  rotate(i_Ld, i_Lq, p.op.i_Ld0, p.op.i_Lq0);
  x(theta_ps) = 0.0;
  frame.angle += th;
}

bool gfm_clamp_current(const GfmParams& p, GfmState& x) {
  const double limit = p.I_max * p.i_base();
  const double d = p.op.i_Ld0 + x(gfm::i_Ld_ref);
  const double q = p.op.i_Lq0 + x(gfm::i_Lq_ref);
  const double mag = std::hypot(d, q);
  if (mag <= limit) return false;
  const double s = limit / mag;
  x(gfm::i_Ld_ref) = d * s - p.op.i_Ld0;
  x(gfm::i_Lq_ref) = q * s - p.op.i_Lq0;
  return true;
}

double gfm_frequency(const GfmParams& p, const GfmState& x, double dP_ref) {
  return p.w1 + p.m_p * (dP_ref - x(gfm::P_lpf));
}

}  // namespace gridsplit
