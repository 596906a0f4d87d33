// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "gridsplit/decomp.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/worker_pool.hpp"
#include "support.hpp"

using namespace gridsplit;
using namespace gridsplit::testing;

namespace {

EdgeRef edge(const PowerFlowCase& c, int a, int b) { return EdgeRef{c.bus_index(a), c.bus_index(b)}; }

PartitionPlan case9_plan(const PowerFlowCase& c) {
  return make_partition(c, {edge(c, 1, 4)}, {edge(c, 6, 7), edge(c, 9, 4)});
}

AdmittanceMatrix grounded(const PowerFlowCase& c) {
  AdmittanceMatrix Y = build_admittance(c);
  for (int bus : {1, 2, 3}) Y.add(c.bus_index(bus), c.bus_index(bus), Complex(0.0, -8.0));
  return Y;
}

BoundaryPort port_pair_side(Complex V, Complex I, Complex G, int peer) {
  BoundaryPort p;
  p.V_local = V;
  p.I = I;
  p.G = G;
  p.cut_y = G;
  p.peer = peer;
  return p;
}

}  // namespace

TEST_CASE("make_partition: case9 two-stage cut") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = case9_plan(c);
  CHECK(plan.subsystem_count == 2);
  const int s_inv = plan.subsystem_of[static_cast<std::size_t>(c.bus_index(1))];
  const int s_rest = plan.subsystem_of[static_cast<std::size_t>(c.bus_index(4))];
  CHECK(s_inv != s_rest);
  CHECK(plan.buses_of(s_inv).size() == 1);
  CHECK(plan.subdomain_count[static_cast<std::size_t>(s_inv)] == 1);
  CHECK(plan.subdomain_count[static_cast<std::size_t>(s_rest)] == 2);
  CHECK(plan.subsystem_cuts.size() == 1);
  CHECK(plan.subdomain_cuts.size() == 2);
  for (int k : plan.subdomain_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    CHECK(plan.subdomain_of[static_cast<std::size_t>(br.from)] != plan.subdomain_of[static_cast<std::size_t>(br.to)]);
  }
}

TEST_CASE("make_partition: no cuts is monolithic") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = make_partition(c, {}, {});
  CHECK(plan.subsystem_count == 1);
  CHECK(plan.subdomain_count == std::vector<int>{1});
  CHECK(plan.balance_spread == 0);
}

TEST_CASE("make_partition: single-bus subdomain is accepted") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = make_partition(c, {}, {edge(c, 1, 4)});
  CHECK(plan.subsystem_count == 1);
  CHECK(plan.subdomain_count == std::vector<int>{2});
  CHECK(plan.balance_spread == 7);
}

TEST_CASE("make_partition: errors") {
  PowerFlowCase c = load_case(case9_path());
  auto code_of = [&](std::vector<EdgeRef> sys, std::vector<EdgeRef> dom) {
    try {
      make_partition(c, sys, dom);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  CHECK(code_of({edge(c, 1, 5)}, {}) == ErrorCode::partition);        // no such branch
  CHECK(code_of({edge(c, 4, 5)}, {}) == ErrorCode::partition);        // does not disconnect
  CHECK(code_of({edge(c, 1, 4)}, {edge(c, 4, 5)}) == ErrorCode::partition);
  CHECK(code_of({edge(c, 1, 4), edge(c, 4, 1)}, {}) == ErrorCode::partition);
}

TEST_CASE("ports: peers form an involution and carry the cut admittance") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = case9_plan(c);
  auto ports = make_ports(c, plan);
  REQUIRE(ports.size() == 2);
  for (std::size_t k = 0; k < ports.size(); ++k) {
    const auto& p = ports[k];
    CHECK(ports[static_cast<std::size_t>(ports[static_cast<std::size_t>(p.peer)].peer)].local_bus == p.local_bus);
    CHECK(p.cut_y == c.branches[static_cast<std::size_t>(p.branch)].series_y);
    CHECK(p.subsystem != ports[static_cast<std::size_t>(p.peer)].subsystem);
  }
}

TEST_CASE("build_augmented: one interior bus and one port") {
  SubsystemView view;
  view.buses = {0};
  view.interior = AdmittanceMatrix(1);
  view.interior.add(0, 0, Complex(1.0, -3.0));
  BoundaryPort p;
  p.local_bus = 0;
  p.cut_y = Complex(0, -10);
  p.G = Complex(0, -10);
  AugmentedSubsystem aug = build_augmented(view, {p});
  CMatrix M = aug.Y_mod.to_dense();
  REQUIRE(M.rows() == 2);
  CHECK(M(1, 1) == Complex(0, -20));
  CHECK(M(0, 1) == Complex(0, 10));
  CHECK(M(1, 0) == Complex(0, 10));
  CHECK(M(0, 0) == Complex(1.0, -3.0));
  CHECK(aug.port_rows == std::vector<int>{1});
}

TEST_CASE("build_augmented: zero ports and two ports on one bus") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = case9_plan(c);
  AdmittanceMatrix Y = build_admittance(c);
  SubsystemView view = make_subsystem_view(Y, plan, plan.subsystem_of[static_cast<std::size_t>(c.bus_index(4))]);
  AugmentedSubsystem bare = build_augmented(view, {});
  CHECK(bare.Y_mod == view.interior);

  BoundaryPort p;
  p.local_bus = c.bus_index(4);
  p.cut_y = p.G = Complex(0, -5);
  AugmentedSubsystem two = build_augmented(view, {p, p});
  const int n = view.interior.dimension();
  CHECK(two.Y_mod.dimension() == n + 2);
  CHECK(two.port_local[0] == two.port_local[1]);
  CMatrix M = two.Y_mod.to_dense();
  CHECK(M(n, two.port_local[0]) == Complex(0, 5));
  CHECK(M(n + 1, two.port_local[0]) == Complex(0, 5));
  CHECK(M(n, n + 1) == Complex{});
  CHECK((M.topLeftCorner(n, n) - view.interior.to_dense()).cwiseAbs().maxCoeff() == 0.0);

  p.cut_y = Complex{};
  CHECK_THROWS_AS(build_augmented(view, {p}), Error);
}

TEST_CASE("reassembly: subsystem blocks plus cut stamps give the global Y") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = case9_plan(c);
  AdmittanceMatrix Y = build_admittance(c);
  CMatrix R = CMatrix::Zero(9, 9);
  for (int s = 0; s < plan.subsystem_count; ++s) {
    SubsystemView v = make_subsystem_view(Y, plan, s);
    CMatrix M = v.interior.to_dense();
    for (std::size_t i = 0; i < v.buses.size(); ++i)
      for (std::size_t j = 0; j < v.buses.size(); ++j)
        R(v.buses[i], v.buses[j]) += M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  for (int k : plan.subsystem_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    R(br.from, br.to) -= br.series_y;
    R(br.to, br.from) -= br.series_y;
  }
  CHECK((R - Y.to_dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relax_boundary: arithmetic example") {
  std::vector<BoundaryPort> ports = {port_pair_side(Complex(0.9, 0.1), Complex(0.3, 0.0), Complex(0, -10), 1),
                                     port_pair_side(Complex(1.0, 0.0), Complex(0.2, 0.1), Complex(0, -10), 0)};
  auto next = relax_boundary(ports);
  CHECK(next[0].V_d == Complex(1.0, 0.0));
  CHECK(next[0].I == Complex(-0.2, -0.1));
  CHECK(std::abs(next[0].S - Complex(-0.2, -10.1)) < 1e-15);
  CHECK(next[1].V_d == Complex(0.9, 0.1));
  CHECK(next[1].I == Complex(-0.3, 0.0));
}

TEST_CASE("relax_boundary: consistent ports and the zero case are fixed points") {
  std::vector<BoundaryPort> ports = {port_pair_side(Complex(1, 0.2), Complex(0.4, -0.1), Complex(0, -10), 1),
                                     port_pair_side(Complex(1, 0.2), Complex(-0.4, 0.1), Complex(0, -10), 0)};
  for (auto& p : ports) {
    p.V_d = p.V_local;
    p.S = p.G * p.V_d + p.I;
  }
  auto next = relax_boundary(ports);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(next[k].V_d == ports[k].V_d);
    CHECK(next[k].I == ports[k].I);
    CHECK(next[k].S == ports[k].S);
  }
  std::vector<BoundaryPort> zero = {port_pair_side({}, {}, Complex(0, -10), 1),
                                    port_pair_side({}, {}, Complex(0, -10), 0)};
  auto z = relax_boundary(zero);
  CHECK(z[0].S == Complex{});
  CHECK(z[1].S == Complex{});
}

TEST_CASE("relax_boundary: port order does not change the result") {
  std::mt19937_64 rng(3);
  std::vector<BoundaryPort> ports;
  for (int k = 0; k < 6; ++k)
    ports.push_back(port_pair_side(random_complex(rng), random_complex(rng), random_complex(rng), k ^ 1));
  auto ref = relax_boundary(ports);
  std::vector<int> order(ports.size());
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> where(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) where[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    std::vector<BoundaryPort> perm;
    for (int k : order) {
      BoundaryPort p = ports[static_cast<std::size_t>(k)];
      p.peer = where[static_cast<std::size_t>(p.peer)];
      perm.push_back(p);
    }
    auto out = relax_boundary(perm);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& a = out[i];
      const auto& b = ref[static_cast<std::size_t>(order[i])];
      CHECK(a.V_d == b.V_d);
      CHECK(a.I == b.I);
      CHECK(a.S == b.S);
    }
  }
}

TEST_CASE("check_convergence: predicate") {
  auto pair = [](Complex a, Complex b) {
    return std::vector<BoundaryPort>{port_pair_side({}, a, Complex(0, -1), 1), port_pair_side({}, b, Complex(0, -1), 0)};
  };
  auto r1 = check_convergence(pair(Complex(0.5, 0.1), Complex(-0.5, -0.1)), 1e-6);
  CHECK(r1.converged);
  CHECK(r1.max_mismatch == 0.0);
  auto r2 = check_convergence(pair(0.5, -0.4), 1e-6);
  CHECK_FALSE(r2.converged);
  CHECK(r2.max_mismatch == doctest::Approx(0.1).epsilon(1e-12));
  const double sigma = std::abs(Complex(0.75) + Complex(-0.5));
  auto r3 = check_convergence(pair(0.75, -0.5), sigma);
  CHECK(r3.max_mismatch == sigma);
  CHECK(r3.converged);
  CHECK_THROWS_AS(check_convergence(pair(0, 0), 0.0), Error);
}

TEST_CASE("fixed point: ports seeded from the monolithic solution") {
  PowerFlowCase c = load_case(case9_path());
  PartitionPlan plan = case9_plan(c);
  AdmittanceMatrix Y = grounded(c);
  std::mt19937_64 rng(11);
  CVector I(9);
  for (int i = 0; i < 9; ++i) I(i) = random_complex(rng);
  CVector V = monolithic_solve(Y, I);
  auto ports = make_ports(c, plan);
  seed_ports(ports, V);
  auto next = relax_boundary(ports);
  for (std::size_t k = 0; k < ports.size(); ++k) {
    CHECK(next[k].V_d == ports[k].V_d);
    CHECK(std::abs(next[k].I - ports[k].I) <= 1e-15);
    CHECK(std::abs(next[k].S - ports[k].S) <= 1e-14);
  }
  CHECK(check_convergence(next, 1e-12).converged);
}

TEST_CASE("driving_point_admittance: series chain") {
  SubsystemView v;
  v.buses = {4, 7};
  v.interior = AdmittanceMatrix(2);
  const Complex a(0, -4), g(2, 0);
  v.interior.add(0, 0, a);
  v.interior.add(0, 1, -a);
  v.interior.add(1, 0, -a);
  v.interior.add(1, 1, a + g);
  CHECK(std::abs(driving_point_admittance(v, 4, {}) - a * g / (a + g)) < 1e-14);
  CHECK(std::abs(driving_point_admittance(v, 7, Complex(1, 0)) - (g - 1.0 + Complex(0, 0))) < 1e-14);
  CHECK_THROWS_AS(driving_point_admittance(v, 5, {}), Error);
}

TEST_CASE("DecomposedSolver matches the monolithic solve") {
  PowerFlowCase c = load_case(case9_path());
  AdmittanceMatrix Y = grounded(c);
  std::mt19937_64 rng(5);
  CVector I(9);
  for (int i = 0; i < 9; ++i) I(i) = random_complex(rng);
  const CVector ref = monolithic_solve(Y, I);
  WorkerPool pool(3);
  for (PortConductance mode : {PortConductance::cut, PortConductance::driving_point}) {
    RelaxationSettings settings;
    settings.sigma = 1e-12;
    settings.max_iterations = 500;
    settings.conductance = mode;
    DecomposedSolver solver(c, case9_plan(c), settings, &pool);
    solver.factor(Y, c.branches);
    solver.seed(CVector::Ones(9));
    CVector V = CVector::Zero(9);
    RelaxationResult r = solver.solve(I, V);
    CHECK(r.iterations >= 1);
    CHECK(r.mismatch.back() <= 1e-12);
    CHECK((V - ref).cwiseAbs().maxCoeff() < 1e-9);
    CVector V2 = V;
    RelaxationResult again = solver.solve(I, V2);
    CHECK(again.iterations == 1);
  }
}

TEST_CASE("schur: block-diagonal system decouples") {
  std::mt19937_64 rng(2);
  SchurBlocks b;
  SchurRhs rhs;
  for (int i = 0; i < 2; ++i) {
    CMatrix L = CMatrix::Identity(3, 3) * 4.0;
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) L(r, s) += random_complex(rng);
    b.local.push_back(L);
    b.B.push_back(CMatrix::Zero(3, 2));
    b.C.push_back(CMatrix::Zero(2, 3));
    CVector f(3);
    for (int r = 0; r < 3; ++r) f(r) = random_complex(rng);
    rhs.f.push_back(f);
  }
  b.D4 = CMatrix::Identity(2, 2) * Complex(2, 1);
  rhs.g = CVector::Ones(2);
  SchurSolution sol = schur_solve(b, rhs);
  for (int i = 0; i < 2; ++i) {
    CVector ref = Eigen::FullPivLU<CMatrix>(b.local[static_cast<std::size_t>(i)]).solve(rhs.f[static_cast<std::size_t>(i)]);
    CHECK((sol.interior[static_cast<std::size_t>(i)] - ref).norm() < 1e-13);
  }
  CHECK((sol.interface - rhs.g / Complex(2, 1)).norm() < 1e-15);
}

TEST_CASE("schur: 8x8 system with two subdomains") {
  std::mt19937_64 rng(8);
  CMatrix M = CMatrix::Identity(8, 8) * 6.0;
  for (int r = 0; r < 8; ++r)
    for (int s = 0; s < 8; ++s) M(r, s) += random_complex(rng);
  std::vector<int> group = {0, 1, 0, -1, 1, 0, -1, 1};
  SchurLayout layout = make_schur_layout(group, 2);
  for (int g = 0; g < 2; ++g)
    for (int r : layout.interior_rows[static_cast<std::size_t>(g)])
      for (int s : layout.interior_rows[static_cast<std::size_t>(1 - g)]) M(r, s) = 0.0;
  SchurBlocks blocks = extract_schur_blocks(M, layout);
  CHECK(blocks.local[0].rows() == 3);
  CHECK(blocks.D4.rows() == 2);
  CVector x(8);
  for (int r = 0; r < 8; ++r) x(r) = random_complex(rng);
  CVector rhs_full = M * x;
  SchurRhs rhs;
  for (const auto& rows : layout.interior_rows) {
    CVector f(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) f(static_cast<Eigen::Index>(k)) = rhs_full(rows[k]);
    rhs.f.push_back(f);
  }
  rhs.g = CVector(2);
  for (std::size_t k = 0; k < 2; ++k) rhs.g(static_cast<Eigen::Index>(k)) = rhs_full(layout.interface_rows[k]);
  SchurSolution sol = schur_solve(blocks, rhs);
  CVector ref = Eigen::FullPivLU<CMatrix>(M).solve(rhs_full);
  double err = 0.0;
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t k = 0; k < layout.interior_rows[g].size(); ++k)
      err = std::max(err, std::abs(sol.interior[g](static_cast<Eigen::Index>(k)) - ref(layout.interior_rows[g][k])));
  for (std::size_t k = 0; k < 2; ++k)
    err = std::max(err, std::abs(sol.interface(static_cast<Eigen::Index>(k)) - ref(layout.interface_rows[k])));
  CHECK(err < 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("schur: reassembly is the permuted matrix") {
  std::mt19937_64 rng(4);
  CMatrix M(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int s = 0; s < 6; ++s) M(r, s) = random_complex(rng);
  std::vector<int> group = {1, -1, 0, 0, -1, 1};
  SchurLayout layout = make_schur_layout(group, 2);
  for (int r : layout.interior_rows[0])
    for (int s : layout.interior_rows[1]) M(r, s) = M(s, r) = 0.0;
  CMatrix A = assemble_schur_blocks(extract_schur_blocks(M, layout));
  std::vector<int> perm;
  for (const auto& rows : layout.interior_rows) perm.insert(perm.end(), rows.begin(), rows.end());
  perm.insert(perm.end(), layout.interface_rows.begin(), layout.interface_rows.end());
  for (int r = 0; r < 6; ++r)
    for (int s = 0; s < 6; ++s) CHECK(A(r, s) == M(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(s)]));
}

TEST_CASE("schur: singular local block names the subdomain") {
  SchurBlocks b;
  b.local = {CMatrix::Identity(2, 2), CMatrix::Zero(2, 2)};
  b.B = {CMatrix::Zero(2, 1), CMatrix::Zero(2, 1)};
  b.C = {CMatrix::Zero(1, 2), CMatrix::Zero(1, 2)};
  b.D4 = CMatrix::Identity(1, 1);
  SchurRhs rhs{{CVector::Ones(2), CVector::Ones(2)}, CVector::Ones(1)};
  try {
    schur_solve(b, rhs);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_matrix);
    CHECK(std::string(e.what()).find("subdomain 1") != std::string::npos);
  }
}
