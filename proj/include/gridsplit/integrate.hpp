// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace gridsplit {

enum class IntegratorKind { modified_euler, rkf45 };

const char* integrator_name(IntegratorKind kind) noexcept;
IntegratorKind parse_integrator(const std::string& name);

struct StepSchedule {
  double h_fast = 0.01;
  double h_slow = 0.05;
  double fast_window = 0.5;

  void validate() const;
};

using Derivative = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

Eigen::VectorXd modified_euler_step(const Derivative& f, const Eigen::VectorXd& x, double t, double h);

struct RkfResult {
  Eigen::VectorXd x;      // fifth-order solution
  Eigen::VectorXd error;  // fifth minus fourth order
};

RkfResult rkf45_step(const Derivative& f, const Eigen::VectorXd& x, double t, double h);

/// h_fast inside the window after the last disturbance, else h_slow, cut
/// short to land on `next_event` when given.
double step_size_at(const StepSchedule& s, double t, double last_disturbance,
                    std::optional<double> next_event = std::nullopt);

}  // namespace gridsplit
