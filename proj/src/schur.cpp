// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "gridsplit/decomp.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/worker_pool.hpp"

namespace gridsplit {

namespace {

void for_each(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (pool) {
    pool->parallel_for(n, fn);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

CMatrix gather(const CMatrix& M, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M(rows[r], cols[c]);
  return out;
}

void check_rhs(const SchurBlocks& blocks, const SchurRhs& rhs) {
  if (rhs.f.size() != blocks.local.size() || rhs.g.size() != blocks.D4.rows())
    throw Error(ErrorCode::argument, "schur_solve: right-hand side does not match the blocks");
  for (std::size_t i = 0; i < rhs.f.size(); ++i)
    if (rhs.f[i].size() != blocks.local[i].rows())
      throw Error(ErrorCode::argument, "schur_solve: right-hand side does not match subdomain " + std::to_string(i));
}

}  // namespace

SchurLayout make_schur_layout(const std::vector<int>& group, int group_count) {
  SchurLayout layout;
  layout.interior_rows.resize(static_cast<std::size_t>(group_count));
  for (std::size_t r = 0; r < group.size(); ++r) {
    int g = group[r];
    if (g < 0) {
      layout.interface_rows.push_back(static_cast<int>(r));
    } else {
      if (g >= group_count) throw Error(ErrorCode::argument, "schur layout: group index out of range");
      layout.interior_rows[static_cast<std::size_t>(g)].push_back(static_cast<int>(r));
    }
  }
  return layout;
}

SchurBlocks extract_schur_blocks(const CMatrix& M, const SchurLayout& layout) {
  SchurBlocks b;
  const std::size_t N = layout.interior_rows.size();
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if (i == j) continue;
      for (int r : layout.interior_rows[i])
        for (int c : layout.interior_rows[j])
          if (M(r, c) != Complex{})
            throw Error(ErrorCode::partition, "schur blocks: subdomains " + std::to_string(i) + " and " +
                                                  std::to_string(j) + " are coupled outside the interface");
    }
    b.local.push_back(gather(M, layout.interior_rows[i], layout.interior_rows[i]));
    b.B.push_back(gather(M, layout.interior_rows[i], layout.interface_rows));
    b.C.push_back(gather(M, layout.interface_rows, layout.interior_rows[i]));
  }
  b.D4 = gather(M, layout.interface_rows, layout.interface_rows);
  return b;
}

CMatrix assemble_schur_blocks(const SchurBlocks& blocks) {
  Eigen::Index n = blocks.D4.rows();
  for (const auto& l : blocks.local) n += l.rows();
  CMatrix M = CMatrix::Zero(n, n);
  const Eigen::Index ne = blocks.D4.rows();
  const Eigen::Index off_e = n - ne;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < blocks.local.size(); ++i) {
    const Eigen::Index ni = blocks.local[i].rows();
    M.block(off, off, ni, ni) = blocks.local[i];
    M.block(off, off_e, ni, ne) = blocks.B[i];
    M.block(off_e, off, ne, ni) = blocks.C[i];
    off += ni;
  }
  M.block(off_e, off_e, ne, ne) = blocks.D4;
  return M;
}

SchurFactorization::SchurFactorization(SchurBlocks blocks, WorkerPool* pool) : blocks_(std::move(blocks)) {
  const std::size_t N = blocks_.local.size();
  local_lu_.resize(N);
  local_inv_B_.resize(N);
  for_each(pool, N, [&](std::size_t i) {
    local_lu_[i] = ComplexLu(blocks_.local[i], "subdomain " + std::to_string(i));
    local_inv_B_[i] = local_lu_[i].solve(blocks_.B[i]);
  });
  has_interface_ = blocks_.D4.rows() > 0;
  if (has_interface_) {
    CMatrix reduced = blocks_.D4;
    for (std::size_t i = 0; i < N; ++i) reduced -= blocks_.C[i] * local_inv_B_[i];
    reduced_lu_ = ComplexLu(std::move(reduced), "reduced interface matrix");
  }
}

SchurSolution SchurFactorization::solve(const SchurRhs& rhs, WorkerPool* pool) const {
  check_rhs(blocks_, rhs);
  const std::size_t N = local_lu_.size();
  SchurSolution sol;
  sol.interior.resize(N);
  for_each(pool, N, [&](std::size_t i) { sol.interior[i] = local_lu_[i].solve(rhs.f[i]); });
  if (!has_interface_) {
    sol.interface = CVector(0);
    return sol;
  }
  CVector g = rhs.g;
  for (std::size_t i = 0; i < N; ++i) g -= blocks_.C[i] * sol.interior[i];
  sol.interface = reduced_lu_.solve(g);
  for_each(pool, N, [&](std::size_t i) { sol.interior[i] -= local_inv_B_[i] * sol.interface; });
  return sol;
}

SchurSolution schur_solve(const SchurBlocks& blocks, const SchurRhs& rhs, WorkerPool* pool) {
  check_rhs(blocks, rhs);
  return SchurFactorization(blocks, pool).solve(rhs, pool);
}

}  // namespace gridsplit
