// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "gridsplit/decomp.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

std::vector<BoundaryPort> make_ports(const PowerFlowCase& c, const PartitionPlan& plan) {
  std::vector<BoundaryPort> ports;
  for (int k : plan.subsystem_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    BoundaryPort a, b;
    a.subsystem = plan.subsystem_of[static_cast<std::size_t>(br.from)];
    a.local_bus = br.from;
    b.subsystem = plan.subsystem_of[static_cast<std::size_t>(br.to)];
    b.local_bus = br.to;
    a.branch = b.branch = k;
    a.cut_y = b.cut_y = br.series_y;
    a.G = b.G = br.series_y;
    a.peer = static_cast<int>(ports.size()) + 1;
    b.peer = static_cast<int>(ports.size());
    ports.push_back(a);
    ports.push_back(b);
  }
  return ports;
}

void seed_ports(std::vector<BoundaryPort>& ports, const CVector& V) {
  for (auto& p : ports) {
    const BoundaryPort& q = ports[static_cast<std::size_t>(p.peer)];
    p.V_local = V(p.local_bus);
    p.V_d = V(q.local_bus);
    p.I = p.cut_y * (p.V_d - p.V_local);
    p.S = p.G * p.V_d + p.I;
  }
}

SubsystemView make_subsystem_view(const AdmittanceMatrix& Y, const PartitionPlan& plan, int subsystem) {
  SubsystemView view;
  view.index = subsystem;
  view.buses = plan.buses_of(subsystem);
  view.interior = Y.principal(view.buses);
  return view;
}

AugmentedSubsystem build_augmented(const SubsystemView& sub, const std::vector<BoundaryPort>& ports) {
  const int nint = sub.interior.dimension();
  const int n = nint + static_cast<int>(ports.size());
  AugmentedSubsystem aug;
  aug.Y_mod = AdmittanceMatrix(n);
  for (const auto& e : sub.interior.entries()) aug.Y_mod.add(e.row, e.col, e.value);
  for (std::size_t k = 0; k < ports.size(); ++k) {
    const BoundaryPort& p = ports[k];
    if (p.cut_y == Complex{}) throw Error(ErrorCode::validation, "boundary port has zero cut admittance");
    int j = -1;
    for (std::size_t r = 0; r < sub.buses.size(); ++r)
      if (sub.buses[r] == p.local_bus) j = static_cast<int>(r);
    if (j < 0) throw Error(ErrorCode::argument, "boundary port references a bus outside the subsystem");
    const int row = nint + static_cast<int>(k);
    aug.Y_mod.add(row, row, p.G + p.cut_y);
    aug.Y_mod.add(row, j, -p.cut_y);
    aug.Y_mod.add(j, row, -p.cut_y);
    aug.port_rows.push_back(row);
    aug.port_local.push_back(j);
  }
  return aug;
}

Complex driving_point_admittance(const SubsystemView& view, int bus, Complex exclude) {
  CMatrix Y = view.interior.to_dense();
  int b = -1;
  for (std::size_t r = 0; r < view.buses.size(); ++r)
    if (view.buses[r] == bus) b = static_cast<int>(r);
  if (b < 0) throw Error(ErrorCode::argument, "bus is not in the subsystem");
  Y(b, b) -= exclude;
  const Eigen::Index n = Y.rows();
  if (n == 1) return Y(0, 0);
  std::vector<Eigen::Index> rest;
  for (Eigen::Index r = 0; r < n; ++r)
    if (r != b) rest.push_back(r);
  const Eigen::Index m = static_cast<Eigen::Index>(rest.size());
  CMatrix A(m, m);
  CVector col(m), row(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = Y(rest[i], rest[j]);
    col(i) = Y(rest[i], b);
    row(i) = Y(b, rest[i]);
  }
  ComplexLu lu(A, "driving-point admittance");
  return Y(b, b) - (row.transpose() * lu.solve(col))(0);
}

std::vector<BoundaryPort> relax_boundary(const std::vector<BoundaryPort>& ports) {
  std::vector<BoundaryPort> next = ports;
  for (std::size_t k = 0; k < ports.size(); ++k) {
    const BoundaryPort& q = ports[static_cast<std::size_t>(ports[k].peer)];
    next[k].V_d = q.V_local;
    next[k].I = -q.I;
    next[k].S = ports[k].G * q.V_local - q.I;
  }
  return next;
}

ConvergenceReport check_convergence(const std::vector<BoundaryPort>& ports, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::argument, "sigma must be positive");
  ConvergenceReport rep;
  rep.mismatch.resize(ports.size());
  for (std::size_t k = 0; k < ports.size(); ++k) {
    double m = std::abs(ports[k].I + ports[static_cast<std::size_t>(ports[k].peer)].I);
    if (!std::isfinite(m)) m = HUGE_VAL;
    rep.mismatch[k] = m;
    rep.max_mismatch = std::max(rep.max_mismatch, m);
  }
  rep.converged = rep.max_mismatch <= sigma;
  return rep;
}

}  // namespace gridsplit
