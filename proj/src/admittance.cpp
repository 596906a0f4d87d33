// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <string>

#include "gridsplit/error.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

Complex AdmittanceMatrix::at(int row, int col) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                             [](const Entry& e, const std::pair<int, int>& k) {
                               return std::pair{e.row, e.col} < k;
                             });
  if (it != entries_.end() && it->row == row && it->col == col) return it->value;
  return {};
}

void AdmittanceMatrix::add(int row, int col, Complex value) {
  if (row < 0 || row >= n_ || col < 0 || col >= n_)
    throw Error(ErrorCode::argument, "admittance entry out of range");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                             [](const Entry& e, const std::pair<int, int>& k) {
                               return std::pair{e.row, e.col} < k;
                             });
  if (it != entries_.end() && it->row == row && it->col == col) {
    it->value += value;
  } else {
    entries_.insert(it, Entry{row, col, value});
  }
}

CMatrix AdmittanceMatrix::to_dense() const {
  CMatrix m = CMatrix::Zero(n_, n_);
  for (const auto& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

CVector AdmittanceMatrix::multiply(const CVector& v) const {
  CVector out = CVector::Zero(n_);
  for (const auto& e : entries_) out(e.row) += e.value * v(e.col);
  return out;
}

AdmittanceMatrix AdmittanceMatrix::principal(const std::vector<int>& rows) const {
  std::vector<int> local(static_cast<std::size_t>(n_), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) local[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);
  AdmittanceMatrix out(static_cast<int>(rows.size()));
  for (const auto& e : entries_) {
    int r = local[static_cast<std::size_t>(e.row)];
    int c = local[static_cast<std::size_t>(e.col)];
    if (r >= 0 && c >= 0) out.entries_.push_back(Entry{r, c, e.value});
  }
  std::sort(out.entries_.begin(), out.entries_.end(),
            [](const Entry& a, const Entry& b) { return std::pair{a.row, a.col} < std::pair{b.row, b.col}; });
  return out;
}

bool operator==(const AdmittanceMatrix& a, const AdmittanceMatrix& b) {
  if (a.n_ != b.n_ || a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t k = 0; k < a.entries_.size(); ++k) {
    const auto& x = a.entries_[k];
    const auto& y = b.entries_[k];
    if (x.row != y.row || x.col != y.col || x.value != y.value) return false;
  }
  return true;
}

AdmittanceMatrix build_admittance(int n, const std::vector<Branch>& branches,
                                  const std::vector<std::vector<Complex>>& bus_shunts) {
  std::map<std::pair<int, int>, Complex> off;
  for (const auto& br : branches) {
    if (!br.in_service) continue;
    off[{br.from, br.to}] -= br.series_y;
    off[{br.to, br.from}] -= br.series_y;
  }
  // Series part of the diagonal is minus the row's off-diagonal sum, so
  // branch-only rows cancel exactly.
  std::vector<Complex> diag(static_cast<std::size_t>(n));
  for (const auto& [key, v] : off) diag[static_cast<std::size_t>(key.first)] += v;
  for (auto& d : diag) d = -d;
  for (const auto& br : branches) {
    if (!br.in_service || br.charging == 0.0) continue;
    Complex half(0.0, br.charging / 2.0);
    diag[static_cast<std::size_t>(br.from)] += half;
    diag[static_cast<std::size_t>(br.to)] += half;
  }
  for (std::size_t i = 0; i < bus_shunts.size() && i < diag.size(); ++i)
    for (const Complex& s : bus_shunts[i]) diag[i] += s;

  AdmittanceMatrix Y(n);
  std::map<std::pair<int, int>, Complex> all = off;
  for (int i = 0; i < n; ++i) all[{i, i}] = diag[static_cast<std::size_t>(i)];
  for (const auto& [key, v] : all) Y.add(key.first, key.second, v);
  return Y;
}

AdmittanceMatrix build_admittance(const PowerFlowCase& c) {
  std::vector<std::vector<Complex>> shunts(c.buses.size());
  for (std::size_t i = 0; i < c.buses.size(); ++i)
    if (c.buses[i].shunt != Complex{}) shunts[i].push_back(c.buses[i].shunt);
  return build_admittance(static_cast<int>(c.buses.size()), c.branches, shunts);
}

CVector monolithic_solve(const AdmittanceMatrix& Y, const CVector& I) {
  if (I.size() != Y.dimension())
    throw Error(ErrorCode::argument, "monolithic_solve: injection length does not match Y");
  ComplexLu lu(Y.to_dense(), "monolithic_solve");
  CVector V = lu.solve(I);
#ifdef GRIDSPLIT_CHECKED_SOLVES
  double res = inf_norm(Y.multiply(V) - I);
  if (res > 1e-10 * std::max(inf_norm(I), 1e-300) && res > 1e-300)
    throw Error(ErrorCode::singular_matrix,
                "monolithic_solve: residual " + format_double(res) + " exceeds tolerance");
#endif
  return V;
}

}  // namespace gridsplit
