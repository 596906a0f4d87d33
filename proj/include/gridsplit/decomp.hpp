// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "gridsplit/linalg.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

class WorkerPool;

/// Edge named by its endpoint bus indices (either orientation).
struct EdgeRef {
  int a = 0;
  int b = 0;
};

struct PartitionPlan {
  int subsystem_count = 1;
  std::vector<int> subsystem_of;          // per bus
  std::vector<int> subsystem_cuts;        // branch indices
  std::vector<int> subdomain_cuts;        // branch indices
  std::vector<int> subdomain_of;          // per bus, index within its subsystem
  std::vector<int> subdomain_count;       // per subsystem
  int balance_spread = 0;                 // max - min bus count over all subdomains

  std::vector<int> buses_of(int subsystem) const;
  bool is_interface(const std::vector<Branch>& branches, int bus) const;
};

PartitionPlan make_partition(const PowerFlowCase& c, const std::vector<EdgeRef>& subsystem_cuts,
                             const std::vector<EdgeRef>& subdomain_cuts);

struct BoundaryPort {
  int subsystem = 0;
  int local_bus = 0;   // global bus index of interior bus j
  int branch = -1;     // cut branch
  Complex cut_y;
  Complex G;
  Complex V_d;
  Complex S;
  Complex I;           // y (V_d - V_local): current from the boundary bus into bus j
  Complex V_local;     // last solved voltage of bus j
  int peer = -1;       // index of the matching port in the port list
};

/// Two ports per subsystem cut branch, stored as peers (2k, 2k+1).
std::vector<BoundaryPort> make_ports(const PowerFlowCase& c, const PartitionPlan& plan);

/// Fills V_d, I, S, V_local from a solved global voltage vector.
void seed_ports(std::vector<BoundaryPort>& ports, const CVector& V);

struct SubsystemView {
  int index = 0;
  std::vector<int> buses;        // global indices, ascending
  AdmittanceMatrix interior;     // principal submatrix of the global Y
};

SubsystemView make_subsystem_view(const AdmittanceMatrix& Y, const PartitionPlan& plan, int subsystem);

struct AugmentedSubsystem {
  AdmittanceMatrix Y_mod;
  std::vector<int> port_rows;    // row of ports[k]
  std::vector<int> port_local;   // row of the interior bus ports[k] attaches to
};

AugmentedSubsystem build_augmented(const SubsystemView& sub, const std::vector<BoundaryPort>& ports);

/// One Jacobi sweep over all ports using only values from the previous sweep.
std::vector<BoundaryPort> relax_boundary(const std::vector<BoundaryPort>& ports);

struct ConvergenceReport {
  bool converged = false;
  double max_mismatch = 0.0;
  std::vector<double> mismatch;  // per port |I + I_peer|
};

ConvergenceReport check_convergence(const std::vector<BoundaryPort>& ports, double sigma);

/// Block system after permuting to [interior_1 .. interior_N, interface].
/// local[i] is the subdomain block, B[i] its coupling to the interface
/// columns, C[i] the interface rows coupling back, D4 the interface block.
struct SchurBlocks {
  std::vector<CMatrix> local;
  std::vector<CMatrix> B;
  std::vector<CMatrix> C;
  CMatrix D4;
};

struct SchurRhs {
  std::vector<CVector> f;   // per subdomain
  CVector g;                // interface
};

struct SchurSolution {
  std::vector<CVector> interior;
  CVector interface;
};

/// Row grouping used to build blocks: group[r] in [0, N) or -1 for interface.
struct SchurLayout {
  std::vector<std::vector<int>> interior_rows;
  std::vector<int> interface_rows;
};

SchurLayout make_schur_layout(const std::vector<int>& group, int group_count);
SchurBlocks extract_schur_blocks(const CMatrix& M, const SchurLayout& layout);
CMatrix assemble_schur_blocks(const SchurBlocks& blocks);

SchurSolution schur_solve(const SchurBlocks& blocks, const SchurRhs& rhs, WorkerPool* pool = nullptr);

/// Factorized form of schur_solve for repeated right-hand sides.
class SchurFactorization {
 public:
  SchurFactorization() = default;
  SchurFactorization(SchurBlocks blocks, WorkerPool* pool = nullptr);
  SchurSolution solve(const SchurRhs& rhs, WorkerPool* pool = nullptr) const;
  std::size_t subdomains() const { return local_lu_.size(); }

 private:
  SchurBlocks blocks_;
  std::vector<ComplexLu> local_lu_;
  std::vector<CMatrix> local_inv_B_;
  ComplexLu reduced_lu_;
  bool has_interface_ = false;
};

/// cut: G = cut-branch admittance. driving_point: G = admittance the peer
/// subsystem presents at the remote bus with the cut branch removed.
enum class PortConductance { cut, driving_point };

struct RelaxationSettings {
  double sigma = 1e-8;
  int max_iterations = 50;
  PortConductance conductance = PortConductance::cut;
};

/// Driving-point admittance of `view` at local bus `bus`, with `exclude`
/// subtracted from that bus's diagonal.
Complex driving_point_admittance(const SubsystemView& view, int bus, Complex exclude);

struct RelaxationResult {
  int iterations = 0;
  std::vector<double> mismatch;  // max port mismatch after each iteration
};

/// Stage 1 + stage 2 network solver: subsystems coupled through boundary
/// ports, each subsystem solved by Schur complement over its subdomains.
class DecomposedSolver {
 public:
  DecomposedSolver(const PowerFlowCase& c, PartitionPlan plan, RelaxationSettings settings,
                   WorkerPool* pool = nullptr);
  ~DecomposedSolver();
  DecomposedSolver(DecomposedSolver&&) noexcept;
  DecomposedSolver& operator=(DecomposedSolver&&) noexcept;

  /// Rebuilds every Y_mod and factorization from a new global Y. Cut
  /// admittances are refreshed from `branches`; G keeps its value.
  void factor(const AdmittanceMatrix& Y, const std::vector<Branch>& branches);
  void seed(const CVector& V);
  RelaxationResult solve(const CVector& I, CVector& V, double time = 0.0);

  const PartitionPlan& plan() const;
  const std::vector<BoundaryPort>& ports() const;
  const std::vector<SubsystemView>& views() const;
  const RelaxationSettings& settings() const;
  void set_sigma(double sigma);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridsplit
