// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "gridsplit/engine.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

std::vector<std::string> csv_header(const TimeSeriesResult& r) {
  std::vector<std::string> h = {"t", "iter"};
  for (int b : r.bus_numbers) h.push_back("V_mag_bus" + std::to_string(b));
  for (int b : r.bus_numbers) h.push_back("V_ang_bus" + std::to_string(b));
  for (int b : r.machine_buses) h.push_back("delta_g" + std::to_string(b));
  for (int b : r.machine_buses) h.push_back("omega_g" + std::to_string(b));
  for (std::size_t k = 0; k < r.gfm_buses.size(); ++k) {
    std::string prefix = k == 0 ? "gfm_x" : "gfm" + std::to_string(k + 1) + "_x";
    for (int i = 1; i <= gfm::kStates; ++i) h.push_back(prefix + std::to_string(i));
  }
  if (r.benchmark_V)
    for (int b : r.bus_numbers) h.push_back("bench_V_mag_bus" + std::to_string(b));
  return h;
}

void write_csv(const TimeSeriesResult& r, std::ostream& out) {
  auto header = csv_header(r);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << format_double(r.times[k]) << ',' << r.iterations[k];
    const CVector& V = r.bus_V[k];
    for (Eigen::Index b = 0; b < V.size(); ++b) out << ',' << format_double(std::abs(V(b)));
    for (Eigen::Index b = 0; b < V.size(); ++b) out << ',' << format_double(std::arg(V(b)));
    for (const auto& m : r.machines[k]) out << ',' << format_double(m.delta);
    for (const auto& m : r.machines[k]) out << ',' << format_double(m.omega);
    for (const auto& x : r.gfm[k])
      for (int i = 0; i < gfm::kStates; ++i) out << ',' << format_double(x(i));
    if (r.benchmark_V) {
      const CVector& B = (*r.benchmark_V)[k];
      for (Eigen::Index b = 0; b < B.size(); ++b) out << ',' << format_double(std::abs(B(b)));
    }
    out << "\n";
  }
}

void write_csv(const TimeSeriesResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  write_csv(r, out);
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

std::string summary_json(const RunOutput& output, const ScenarioSpec& spec) {
  const TimeSeriesResult& r = output.result;
  const ConvergenceLog& log = output.log;
  nlohmann::ordered_json j;
  j["scenario"] = spec.name;
  j["case"] = spec.case_path.string();
  j["integrator"] = integrator_name(spec.integrator);
  j["sigma"] = spec.sigma;
  j["boundary_conductance"] = spec.conductance == PortConductance::driving_point ? "driving_point" : "cut";
  j["horizon"] = spec.horizon;
  j["rows"] = r.times.size();
  j["total_iterations"] = log.total_iterations;
  std::vector<int> it = r.iterations;
  std::sort(it.begin(), it.end());
  j["max_iterations_per_step"] = it.empty() ? 0 : it.back();
  j["median_iterations_per_step"] = it.empty() ? 0.0
                                   : it.size() % 2 ? it[it.size() / 2]
                                                   : 0.5 * (it[it.size() / 2 - 1] + it[it.size() / 2]);
  j["clamped_steps"] = std::count(r.clamped.begin(), r.clamped.end(), 1);
  if (r.benchmark_V) {
    DeviationReport d = compare_to_benchmark(r);
    nlohmann::ordered_json dev;
    dev["max"] = d.max;
    dev["bus"] = d.bus_of_max;
    dev["time"] = d.time_of_max;
    nlohmann::ordered_json per_bus = nlohmann::ordered_json::object();
    for (std::size_t b = 0; b < d.bus_numbers.size(); ++b)
      per_bus[std::to_string(d.bus_numbers[b])] = d.per_bus_max[b];
    dev["per_bus"] = per_bus;
    j["max_deviation"] = dev;
  } else {
    j["max_deviation"] = nullptr;
  }
  nlohmann::ordered_json wall;
  wall["initialize"] = log.wall.initialize;
  wall["devices"] = log.wall.devices;
  wall["network"] = log.wall.network;
  wall["benchmark"] = log.wall.benchmark;
  j["wall_clock_s"] = wall;
  return j.dump(2);
}

}  // namespace gridsplit

namespace gridsplit {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      auto comma = s.find(',', start);
      out.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = fields;
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(path.string(), line_no, "row has " + std::to_string(fields.size()) + " fields, header has " +
                                                   std::to_string(t.header.size()));
    std::vector<double> row;
    for (const auto& f : fields) {
      try {
        std::size_t used = 0;
        double v = std::stod(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path.string(), line_no, "not a number: '" + f + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty() || t.column("t") < 0) throw Error(ErrorCode::parse, path.string() + ": missing 't' column");
  return t;
}

DeviationReport compare_csv(const CsvTable& a, const CsvTable* b) {
  const std::string prefix = "V_mag_bus";
  std::vector<std::string> buses;
  for (const auto& h : a.header)
    if (h.rfind(prefix, 0) == 0) buses.push_back(h.substr(prefix.size()));
  if (buses.empty()) throw Error(ErrorCode::argument, "no V_mag_bus columns to compare");
  const int ta = a.column("t");
  if (b) {
    const int tb = b->column("t");
    if (a.rows.size() != b->rows.size()) throw Error(ErrorCode::argument, "mismatched time axes: row counts differ");
    for (std::size_t k = 0; k < a.rows.size(); ++k)
      if (std::abs(a.rows[k][static_cast<std::size_t>(ta)] - b->rows[k][static_cast<std::size_t>(tb)]) > 1e-9)
        throw Error(ErrorCode::argument, "mismatched time axes at row " + std::to_string(k + 1));
  }
  DeviationReport rep;
  for (const auto& bus : buses) {
    rep.bus_numbers.push_back(std::stoi(bus));
    const int ma = a.column(prefix + bus);
    const int aa = a.column("V_ang_bus" + bus);
    int mb = -1, ab = -1;
    const CsvTable* other = b ? b : &a;
    if (b) {
      mb = b->column(prefix + bus);
      ab = b->column("V_ang_bus" + bus);
    } else {
      mb = a.column("bench_V_mag_bus" + bus);
    }
    if (mb < 0) throw Error(ErrorCode::argument, b ? "second file lacks bus " + bus : "no benchmark columns in file");
    double worst = 0.0, when = 0.0;
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      const auto& ra = a.rows[k];
      const auto& rb = other->rows[k];
      double d;
      if (b && aa >= 0 && ab >= 0) {
        d = std::abs(std::polar(ra[static_cast<std::size_t>(ma)], ra[static_cast<std::size_t>(aa)]) -
                     std::polar(rb[static_cast<std::size_t>(mb)], rb[static_cast<std::size_t>(ab)]));
      } else {
        d = std::abs(ra[static_cast<std::size_t>(ma)] - rb[static_cast<std::size_t>(mb)]);
      }
      if (d > worst || std::isnan(d)) {
        worst = std::isnan(d) ? HUGE_VAL : d;
        when = ra[static_cast<std::size_t>(ta)];
      }
    }
    rep.per_bus_max.push_back(worst);
    rep.per_bus_time.push_back(when);
    if (worst > rep.max || rep.per_bus_max.size() == 1) {
      rep.max = worst;
      rep.time_of_max = when;
      rep.bus_of_max = rep.bus_numbers.back();
    }
  }
  return rep;
}

}  // namespace gridsplit
