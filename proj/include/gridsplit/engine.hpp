// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridsplit/decomp.hpp"
#include "gridsplit/devices.hpp"
#include "gridsplit/integrate.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

enum class EventKind { bus_fault_apply, bus_fault_clear, line_change, load_step };

const char* event_kind_name(EventKind kind) noexcept;

/// Targets are file labels: bus numbers, or a 1-based branch row (or its
/// endpoints) for line_change.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::bus_fault_apply;
  int target = 0;
  std::optional<std::pair<int, int>> endpoints;
  Complex payload;
  bool has_payload = false;
};

struct BusPair {
  int a = 0;
  int b = 0;
};

struct ScenarioSpec {
  std::string name;
  std::filesystem::path case_path;
  std::vector<BusPair> subsystem_cuts;
  std::vector<BusPair> subdomain_cuts;
  std::vector<Event> events;
  double horizon = 5.0;
  double sigma = 1e-8;
  int max_iterations = 50;
  PortConductance conductance = PortConductance::cut;
  StepSchedule schedule;
  IntegratorKind integrator = IntegratorKind::modified_euler;
  bool benchmark = false;
  Complex fault_shunt{1e6, 0.0};
  double gfm_substep = 1e-5;

  void validate() const;
};

ScenarioSpec parse_scenario(const std::string& text, const std::string& source = "<string>",
                            const std::filesystem::path& base_dir = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// Resolves `name` as a path, then with the extension, then in the bundled
/// data directory.
std::filesystem::path resolve_data_file(const std::string& name, const std::string& extension,
                                        const std::filesystem::path& subdir = {});

/// Network with separately held shunt components so events are exactly
/// reversible.
class NetworkModel {
 public:
  explicit NetworkModel(const PowerFlowCase& c);

  int size() const { return static_cast<int>(base_shunt_.size()); }
  const std::vector<Branch>& branches() const { return branches_; }

  void set_load(int bus, Complex y) { load_[bus] = y; }
  Complex load(int bus) const { return load_[bus]; }
  void add_device_shunt(int bus, Complex y) { device_[bus] += y; }
  void set_fault(int bus, Complex y) { fault_[bus] = y; }
  void clear_fault(int bus) { fault_[bus] = Complex{}; }
  Complex fault(int bus) const { return fault_[bus]; }
  void change_branch(int branch, Complex delta);

  AdmittanceMatrix admittance() const;

 private:
  std::vector<Branch> branches_;
  std::vector<Complex> base_shunt_;
  std::vector<Complex> load_;
  std::vector<Complex> device_;
  std::vector<Complex> fault_;
};

struct ResolvedEvent {
  Event event;
  int bus = -1;
  int branch = -1;
};

ResolvedEvent resolve_event(const PowerFlowCase& c, const Event& e);

/// Applies an event; V is the pre-event voltage used by load_step.
void apply_event(NetworkModel& net, const ResolvedEvent& e, const CVector& V,
                 Complex fault_shunt);

struct MachineUnit {
  int bus = 0;
  std::string key;
  MachineParams params;
};

struct GfmUnit {
  int bus = 0;
  std::string key;
  GfmParams params;
  GfmStateSpace ss;
};

struct SystemState {
  double t = 0.0;
  std::vector<MachineState> machines;
  std::vector<GfmState> gfm;
  std::vector<GfmFrame> frames;
  CVector V;
};

struct InitialState {
  std::vector<MachineUnit> machines;
  std::vector<GfmUnit> gfms;
  NetworkModel network;
  SystemState state;
  PowerFlowSolution power_flow;
  std::vector<std::pair<std::string, double>> residuals;  // per device, max |derivative|
};

constexpr double kSteadyStateTolerance = 1e-8;

InitialState initialize(const ScenarioSpec& spec, const PowerFlowCase& c);

struct TimeSeriesResult {
  std::vector<int> bus_numbers;
  std::vector<int> machine_buses;
  std::vector<int> gfm_buses;
  std::vector<double> times;
  std::vector<CVector> bus_V;
  std::vector<std::vector<MachineState>> machines;
  std::vector<std::vector<GfmState>> gfm;        // theta_ps reported as accumulated angle
  std::vector<std::vector<double>> gfm_omega;    // rad/s
  std::vector<int> iterations;
  std::vector<std::uint8_t> clamped;
  std::optional<std::vector<CVector>> benchmark_V;
};

struct StepLog {
  double t = 0.0;
  double h = 0.0;
  int iterations = 0;
  std::vector<std::vector<double>> mismatch;  // per network solve, per iteration
  double rkf_error = 0.0;
};

struct PhaseTimes {
  double initialize = 0.0;
  double devices = 0.0;
  double network = 0.0;
  double benchmark = 0.0;
};

struct ConvergenceLog {
  std::vector<StepLog> steps;
  PhaseTimes wall;
  int total_iterations = 0;
};

struct RunOptions {
  std::size_t workers = 1;
  std::optional<double> sigma;
  std::optional<PortConductance> conductance;
  std::optional<IntegratorKind> integrator;
  std::optional<bool> benchmark;
  std::optional<StepSchedule> schedule;
};

struct RunOutput {
  TimeSeriesResult result;
  ConvergenceLog log;
};

RunOutput run(const ScenarioSpec& spec, const PowerFlowCase& c, const RunOptions& options = {});
RunOutput run(const ScenarioSpec& spec, const RunOptions& options = {});

struct DeviationReport {
  std::vector<int> bus_numbers;
  std::vector<double> per_bus_max;
  std::vector<double> per_bus_time;
  double max = 0.0;
  double time_of_max = 0.0;
  int bus_of_max = 0;
};

DeviationReport compare_to_benchmark(const TimeSeriesResult& result);

std::vector<std::string> csv_header(const TimeSeriesResult& result);
void write_csv(const TimeSeriesResult& result, std::ostream& out);
void write_csv(const TimeSeriesResult& result, const std::filesystem::path& path);
std::string summary_json(const RunOutput& output, const ScenarioSpec& spec);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::filesystem::path& path);

/// Per-bus max deviation between two runs (complex when both carry angles),
/// or between the decomposed and bench_ columns of one run when `b` is empty.
DeviationReport compare_csv(const CsvTable& a, const CsvTable* b);

}  // namespace gridsplit
