// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridsplit/integrate.hpp"

#include <algorithm>

#include "gridsplit/error.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

namespace {

Eigen::VectorXd eval(const Derivative& f, double t, const Eigen::VectorXd& x) {
  Eigen::VectorXd d = f(t, x);
  if (d.size() != x.size()) throw Error(ErrorCode::argument, "derivative has the wrong dimension");
  if (!d.allFinite()) throw Error(ErrorCode::non_finite, "non-finite derivative at t = " + format_double(t));
  return d;
}

void check_h(double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::argument, "step size must be positive");
}

}  // namespace

const char* integrator_name(IntegratorKind kind) noexcept {
  return kind == IntegratorKind::rkf45 ? "rkf45" : "modified_euler";
}

IntegratorKind parse_integrator(const std::string& name) {
  if (name == "modified_euler") return IntegratorKind::modified_euler;
  if (name == "rkf45") return IntegratorKind::rkf45;
  throw Error(ErrorCode::argument, "unknown integrator '" + name + "' (expected modified_euler or rkf45)");
}

void StepSchedule::validate() const {
  if (!(h_fast > 0.0) || !(h_slow >= h_fast))
    throw Error(ErrorCode::validation, "step schedule requires 0 < h_fast <= h_slow");
  if (!(fast_window >= 0.0)) throw Error(ErrorCode::validation, "fast_window must be non-negative");
}

Eigen::VectorXd modified_euler_step(const Derivative& f, const Eigen::VectorXd& x, double t, double h) {
  check_h(h);
  Eigen::VectorXd k1 = eval(f, t, x);
  Eigen::VectorXd k2 = eval(f, t + h, x + h * k1);
  return x + (h / 2.0) * (k1 + k2);
}

RkfResult rkf45_step(const Derivative& f, const Eigen::VectorXd& x, double t, double h) {
  check_h(h);
  Eigen::VectorXd k1 = eval(f, t, x);
  Eigen::VectorXd k2 = eval(f, t + h / 4.0, x + h * (k1 / 4.0));
  Eigen::VectorXd k3 = eval(f, t + 3.0 * h / 8.0, x + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
  Eigen::VectorXd k4 = eval(f, t + 12.0 * h / 13.0,
                            x + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3));
  Eigen::VectorXd k5 = eval(f, t + h,
                            x + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 - 845.0 / 4104.0 * k4));
  Eigen::VectorXd k6 = eval(f, t + h / 2.0,
                            x + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 + 1859.0 / 4104.0 * k4 -
                                     11.0 / 40.0 * k5));
  RkfResult r;
  Eigen::VectorXd incr5 = 16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 + 28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                          2.0 / 55.0 * k6;
  Eigen::VectorXd incr4 = 25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 + 2197.0 / 4104.0 * k4 - 1.0 / 5.0 * k5;
  r.x = x + h * incr5;
  r.error = h * (incr5 - incr4);
  return r;
}

double step_size_at(const StepSchedule& s, double t, double last_disturbance, std::optional<double> next_event) {
  // Tolerance absorbs accumulated rounding in t.
  constexpr double kEps = 1e-9;
  double h = (t - last_disturbance < s.fast_window - kEps) ? s.h_fast : s.h_slow;
  if (next_event && *next_event - t < h) h = *next_event - t;
  return h;
}

}  // namespace gridsplit
