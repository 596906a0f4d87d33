// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridsplit/linalg.hpp"

#include <cmath>
#include <utility>

#include "gridsplit/error.hpp"

namespace gridsplit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::partition: return "partition";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::steady_state: return "steady_state";
    case ErrorCode::io: return "io";
    case ErrorCode::argument: return "argument";
    case ErrorCode::missing_benchmark: return "missing_benchmark";
    case ErrorCode::non_finite: return "non_finite";
  }
  return "unknown";
}

ComplexLu::ComplexLu(CMatrix a, const std::string& context, double pivot_tol)
    : lu_(std::move(a)) {
  const Eigen::Index n = lu_.rows();
  if (lu_.cols() != n) throw Error(ErrorCode::argument, context + ": matrix is not square");
  perm_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) perm_[static_cast<std::size_t>(k)] = k;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    double best = std::abs(lu_(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      double m = std::abs(lu_(i, k));
      if (m > best) {
        best = m;
        p = i;
      }
    }
    if (!(best >= pivot_tol)) throw SingularMatrixError(static_cast<std::size_t>(k), context);
    if (p != k) {
      lu_.row(k).swap(lu_.row(p));
      std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(p)]);
    }
    const Complex pivot = lu_(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      Complex l = lu_(i, k) / pivot;
      lu_(i, k) = l;
      if (l == Complex{}) continue;
      for (Eigen::Index j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
    }
  }
}

CVector ComplexLu::solve(const CVector& b) const {
  const Eigen::Index n = lu_.rows();
  if (b.size() != n) throw Error(ErrorCode::argument, "lu solve: dimension mismatch");
  CVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex s = b(perm_[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < i; ++j) s -= lu_(i, j) * y(j);
    y(i) = s;
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Complex s = y(i);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= lu_(i, j) * y(j);
    y(i) = s / lu_(i, i);
  }
  return y;
}

CMatrix ComplexLu::solve(const CMatrix& b) const {
  CMatrix out(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) out.col(c) = solve(CVector(b.col(c)));
  return out;
}

double inf_norm(const CVector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v(i)));
  return m;
}

}  // namespace gridsplit
