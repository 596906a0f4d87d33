// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "gridsplit/error.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

PowerFlowSolution solve_power_flow(const PowerFlowCase& c, double tol, int max_iter) {
  const int n = static_cast<int>(c.buses.size());
  const CMatrix Y = build_admittance(c).to_dense();

  CVector V = CVector::Ones(n);
  Eigen::VectorXd P_spec = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd Q_spec = Eigen::VectorXd::Zero(n);
  for (const auto& b : c.buses) {
    P_spec(b.id) -= b.load.real();
    Q_spec(b.id) -= b.load.imag();
  }
  for (const auto& g : c.generators) {
    P_spec(g.bus) += g.pg / c.base_mva;
    if (c.buses[static_cast<std::size_t>(g.bus)].kind != BusKind::pq) V(g.bus) = g.vg;
  }

  std::vector<int> pvpq, pq;
  for (const auto& b : c.buses) {
    if (b.kind != BusKind::slack) pvpq.push_back(b.id);
    if (b.kind == BusKind::pq) pq.push_back(b.id);
  }
  const int np = static_cast<int>(pvpq.size());
  const int nq = static_cast<int>(pq.size());

  PowerFlowSolution sol;
  for (int it = 0; it <= max_iter; ++it) {
    CVector I = Y * V;
    CVector S = V.cwiseProduct(I.conjugate());
    Eigen::VectorXd F(np + nq);
    for (int k = 0; k < np; ++k) F(k) = S(pvpq[k]).real() - P_spec(pvpq[k]);
    for (int k = 0; k < nq; ++k) F(np + k) = S(pq[k]).imag() - Q_spec(pq[k]);
    if (F.size() == 0 || F.cwiseAbs().maxCoeff() < tol) {
      sol.V = V;
      sol.S = S;
      sol.iterations = it;
      return sol;
    }
    if (it == max_iter) break;

    CVector Vn = V.cwiseQuotient(V.cwiseAbs().cast<Complex>());
    CMatrix dVa = CMatrix::Zero(n, n), dVm = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Complex yv = Y(i, j) * V(j);
        Complex yvn = Y(i, j) * Vn(j);
        dVa(i, j) = Complex(0, 1) * V(i) * std::conj((i == j ? I(i) : Complex{}) - yv);
        dVm(i, j) = V(i) * std::conj(yvn) + (i == j ? std::conj(I(i)) * Vn(i) : Complex{});
      }
    }
    Eigen::MatrixXd J(np + nq, np + nq);
    for (int r = 0; r < np; ++r) {
      for (int k = 0; k < np; ++k) J(r, k) = dVa(pvpq[r], pvpq[k]).real();
      for (int k = 0; k < nq; ++k) J(r, np + k) = dVm(pvpq[r], pq[k]).real();
    }
    for (int r = 0; r < nq; ++r) {
      for (int k = 0; k < np; ++k) J(np + r, k) = dVa(pq[r], pvpq[k]).imag();
      for (int k = 0; k < nq; ++k) J(np + r, np + k) = dVm(pq[r], pq[k]).imag();
    }
    Eigen::VectorXd dx = J.fullPivLu().solve(-F);
    if (!dx.allFinite()) break;
    for (int k = 0; k < np; ++k) {
      int b = pvpq[k];
      V(b) = std::polar(std::abs(V(b)), std::arg(V(b)) + dx(k));
    }
    for (int k = 0; k < nq; ++k) {
      int b = pq[k];
      V(b) = std::polar(std::abs(V(b)) + dx(np + k), std::arg(V(b)));
    }
  }
  throw Error(ErrorCode::divergence, "power flow did not converge");
}

}  // namespace gridsplit
