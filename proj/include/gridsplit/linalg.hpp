// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gridsplit {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Dense LU with partial pivoting. A pivot smaller than `pivot_tol` in
/// magnitude raises SingularMatrixError carrying the failing column.
class ComplexLu {
 public:
  static constexpr double kPivotTolerance = 1e-12;

  ComplexLu() = default;
  explicit ComplexLu(CMatrix a, const std::string& context = "lu",
                     double pivot_tol = kPivotTolerance);

  Eigen::Index size() const { return lu_.rows(); }
  CVector solve(const CVector& b) const;
  CMatrix solve(const CMatrix& b) const;

 private:
  CMatrix lu_;
  std::vector<Eigen::Index> perm_;
};

double inf_norm(const CVector& v);

}  // namespace gridsplit
