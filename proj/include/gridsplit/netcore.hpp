// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridsplit/linalg.hpp"

namespace gridsplit {

enum class BusKind { slack, pv, pq };
enum class DeviceKind { machine, gfm };

const char* bus_kind_name(BusKind kind) noexcept;
const char* device_kind_name(DeviceKind kind) noexcept;

struct Bus {
  int id = 0;       // contiguous 0-based index
  int number = 0;   // label used in the case file and output headers
  BusKind kind = BusKind::pq;
  double base_kv = 0.0;
  Complex shunt;    // pu, Gs + jBs
  Complex load;     // pu, Pd + jQd
  // Raw file columns (MW / MVAr) kept so serialization is exact.
  double pd = 0.0, qd = 0.0, gs = 0.0, bs = 0.0;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  Complex series_y;
  double charging = 0.0;
  bool in_service = true;
};

struct GeneratorRecord {
  int bus = 0;
  DeviceKind kind = DeviceKind::machine;
  std::string key;
  double pg = 0.0;   // MW as written in the file
  double vg = 1.0;   // voltage setpoint, pu
};

/// Named key-value block such as `[gfm gfm1]`. Entry order is preserved.
struct ParamBlock {
  DeviceKind kind = DeviceKind::machine;
  std::string name;
  std::vector<std::pair<std::string, double>> values;

  bool has(const std::string& key) const;
  double get(const std::string& key) const;
  double get_or(const std::string& key, double fallback) const;
  void set(const std::string& key, double value);
};

struct PowerFlowCase {
  double base_mva = 100.0;
  double frequency = 60.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<GeneratorRecord> generators;
  std::vector<ParamBlock> blocks;

  int bus_index(int number) const;  // -1 if absent
  const ParamBlock& block(const std::string& name) const;
  double omega_s() const;
};

/// Shortest decimal representation that round-trips.
std::string format_double(double v);

PowerFlowCase parse_case(const std::string& text, const std::string& source = "<string>");
PowerFlowCase load_case(const std::filesystem::path& path);
std::string serialize_case(const PowerFlowCase& c);
void validate_case(const PowerFlowCase& c);

/// Sparse complex matrix with entries kept sorted by (row, col).
class AdmittanceMatrix {
 public:
  struct Entry {
    int row;
    int col;
    Complex value;
  };

  AdmittanceMatrix() = default;
  explicit AdmittanceMatrix(int n) : n_(n) {}

  int dimension() const { return n_; }
  const std::vector<Entry>& entries() const { return entries_; }

  Complex at(int row, int col) const;
  void add(int row, int col, Complex value);
  CMatrix to_dense() const;
  CVector multiply(const CVector& v) const;
  AdmittanceMatrix principal(const std::vector<int>& rows) const;

  friend bool operator==(const AdmittanceMatrix& a, const AdmittanceMatrix& b);

 private:
  int n_ = 0;
  std::vector<Entry> entries_;
};

/// Branch stamps in table order, then each bus's shunt components in order.
/// Rebuilding from the same inputs is bit-identical.
AdmittanceMatrix build_admittance(const PowerFlowCase& c);
AdmittanceMatrix build_admittance(int n, const std::vector<Branch>& branches,
                                  const std::vector<std::vector<Complex>>& bus_shunts);

CVector monolithic_solve(const AdmittanceMatrix& Y, const CVector& I);

struct PowerFlowSolution {
  CVector V;
  CVector S;  // net injection per bus, pu
  int iterations = 0;
};

/// Newton power flow used only for initialization: loads as constant power,
/// PV/slack setpoints from the generator table.
PowerFlowSolution solve_power_flow(const PowerFlowCase& c, double tol = 1e-11, int max_iter = 30);

}  // namespace gridsplit
