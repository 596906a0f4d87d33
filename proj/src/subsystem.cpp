// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "gridsplit/decomp.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/worker_pool.hpp"

namespace gridsplit {

struct DecomposedSolver::Impl {
  struct Subsystem {
    SubsystemView view;
    std::vector<int> port_ids;
    AugmentedSubsystem aug;
    SchurLayout layout;
    SchurFactorization factor;
  };

  PartitionPlan plan;
  RelaxationSettings settings;
  WorkerPool* pool = nullptr;
  std::vector<Branch> branches;
  std::vector<BoundaryPort> ports;
  std::vector<Subsystem> subs;
  std::vector<SubsystemView> views;
  bool factored = false;

  void solve_subsystem(std::size_t s, const CVector& I, CVector& V) {
    Subsystem& sub = subs[s];
    const int nint = static_cast<int>(sub.view.buses.size());
    const int n = sub.aug.Y_mod.dimension();
    CVector rhs(n);
    for (int r = 0; r < nint; ++r) rhs(r) = I(sub.view.buses[static_cast<std::size_t>(r)]);
    for (std::size_t k = 0; k < sub.port_ids.size(); ++k)
      rhs(sub.aug.port_rows[k]) = ports[static_cast<std::size_t>(sub.port_ids[k])].S;

    SchurRhs srhs;
    for (const auto& rows : sub.layout.interior_rows) {
      CVector f(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) f(static_cast<Eigen::Index>(k)) = rhs(rows[k]);
      srhs.f.push_back(std::move(f));
    }
    srhs.g = CVector(static_cast<Eigen::Index>(sub.layout.interface_rows.size()));
    for (std::size_t k = 0; k < sub.layout.interface_rows.size(); ++k)
      srhs.g(static_cast<Eigen::Index>(k)) = rhs(sub.layout.interface_rows[k]);

    SchurSolution sol = sub.factor.solve(srhs, pool);
    CVector x(n);
    for (std::size_t i = 0; i < sub.layout.interior_rows.size(); ++i)
      for (std::size_t k = 0; k < sub.layout.interior_rows[i].size(); ++k)
        x(sub.layout.interior_rows[i][k]) = sol.interior[i](static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < sub.layout.interface_rows.size(); ++k)
      x(sub.layout.interface_rows[k]) = sol.interface(static_cast<Eigen::Index>(k));

    for (int r = 0; r < nint; ++r) V(sub.view.buses[static_cast<std::size_t>(r)]) = x(r);
    for (std::size_t k = 0; k < sub.port_ids.size(); ++k) {
      BoundaryPort& p = ports[static_cast<std::size_t>(sub.port_ids[k])];
      p.V_d = x(sub.aug.port_rows[k]);
      p.V_local = x(sub.aug.port_local[k]);
      p.I = p.cut_y * (p.V_d - p.V_local);
    }
  }
};

DecomposedSolver::DecomposedSolver(const PowerFlowCase& c, PartitionPlan plan, RelaxationSettings settings,
                                   WorkerPool* pool)
    : impl_(std::make_unique<Impl>()) {
  if (!(settings.sigma > 0.0)) throw Error(ErrorCode::argument, "sigma must be positive");
  if (settings.max_iterations < 1) throw Error(ErrorCode::argument, "max_iterations must be at least 1");
  impl_->ports = make_ports(c, plan);
  impl_->plan = std::move(plan);
  impl_->settings = settings;
  impl_->pool = pool;
  impl_->branches = c.branches;
}

DecomposedSolver::~DecomposedSolver() = default;
DecomposedSolver::DecomposedSolver(DecomposedSolver&&) noexcept = default;
DecomposedSolver& DecomposedSolver::operator=(DecomposedSolver&&) noexcept = default;

void DecomposedSolver::factor(const AdmittanceMatrix& Y, const std::vector<Branch>& branches) {
  Impl& m = *impl_;
  m.branches = branches;
  for (auto& p : m.ports) p.cut_y = branches[static_cast<std::size_t>(p.branch)].series_y;
  const std::size_t S = static_cast<std::size_t>(m.plan.subsystem_count);
  m.subs.clear();
  m.subs.resize(S);
  m.views.clear();
  for (std::size_t s = 0; s < S; ++s) {
    m.subs[s].view = make_subsystem_view(Y, m.plan, static_cast<int>(s));
    m.views.push_back(m.subs[s].view);
  }
  for (auto& p : m.ports) {
    const BoundaryPort& q = m.ports[static_cast<std::size_t>(p.peer)];
    p.G = p.cut_y;
    if (m.settings.conductance == PortConductance::driving_point) {
      // A peer with no path to ground (a bare current source) gives G = 0,
      // which would leave the port voltage unchecked by the current test.
      Complex g = driving_point_admittance(m.views[static_cast<std::size_t>(q.subsystem)], q.local_bus, q.cut_y);
      if (std::abs(g) > 1e-6 * std::abs(p.cut_y)) p.G = g;
    }
    p.S = p.G * p.V_d + p.I;
  }
  auto build = [&](std::size_t s) {
    Impl::Subsystem& sub = m.subs[s];
    std::vector<BoundaryPort> local;
    for (std::size_t k = 0; k < m.ports.size(); ++k)
      if (m.ports[k].subsystem == static_cast<int>(s)) {
        sub.port_ids.push_back(static_cast<int>(k));
        local.push_back(m.ports[k]);
      }
    sub.aug = build_augmented(sub.view, local);
    std::vector<int> group;
    for (int b : sub.view.buses)
      group.push_back(m.plan.is_interface(m.branches, b) ? -1 : m.plan.subdomain_of[static_cast<std::size_t>(b)]);
    for (const auto& p : local) group.push_back(m.plan.subdomain_of[static_cast<std::size_t>(p.local_bus)]);
    sub.layout = make_schur_layout(group, m.plan.subdomain_count[s]);
    try {
      sub.factor = SchurFactorization(extract_schur_blocks(sub.aug.Y_mod.to_dense(), sub.layout), m.pool);
    } catch (const SingularMatrixError& e) {
      throw Error(ErrorCode::singular_matrix, "subsystem " + std::to_string(s) + ": " + e.what());
    }
  };
  if (m.pool) {
    m.pool->parallel_for(S, build);
  } else {
    for (std::size_t s = 0; s < S; ++s) build(s);
  }
  m.factored = true;
}

void DecomposedSolver::seed(const CVector& V) { seed_ports(impl_->ports, V); }

RelaxationResult DecomposedSolver::solve(const CVector& I, CVector& V, double time) {
  Impl& m = *impl_;
  if (!m.factored) throw Error(ErrorCode::argument, "DecomposedSolver::solve called before factor");
  V = CVector::Zero(I.size());
  RelaxationResult res;
  const std::size_t S = m.subs.size();
  for (int l = 1; l <= m.settings.max_iterations; ++l) {
    if (m.pool) {
      m.pool->parallel_for(S, [&](std::size_t s) { m.solve_subsystem(s, I, V); });
    } else {
      for (std::size_t s = 0; s < S; ++s) m.solve_subsystem(s, I, V);
    }
    ConvergenceReport rep = check_convergence(m.ports, m.settings.sigma);
    res.iterations = l;
    res.mismatch.push_back(rep.max_mismatch);
    m.ports = relax_boundary(m.ports);
    if (rep.converged) return res;
  }
  throw DivergenceError(time, res.iterations, res.mismatch.back(),
                        "boundary relaxation did not converge within " +
                            std::to_string(m.settings.max_iterations) + " iterations at t = " +
                            format_double(time) + " (max port mismatch " +
                            format_double(res.mismatch.back()) + ")");
}

const PartitionPlan& DecomposedSolver::plan() const { return impl_->plan; }
const std::vector<BoundaryPort>& DecomposedSolver::ports() const { return impl_->ports; }
const std::vector<SubsystemView>& DecomposedSolver::views() const { return impl_->views; }
const RelaxationSettings& DecomposedSolver::settings() const { return impl_->settings; }
void DecomposedSolver::set_sigma(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::argument, "sigma must be positive");
  impl_->settings.sigma = sigma;
}

}  // namespace gridsplit
