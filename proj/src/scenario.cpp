// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridsplit/engine.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool to_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

// Accepts "a", "a+jb", "a-jb", "jb", "-jb".
bool to_complex(const std::string& tok, Complex& out) {
  auto j = tok.find('j');
  if (j == std::string::npos) {
    double re;
    if (!to_double(tok, re)) return false;
    out = Complex(re, 0.0);
    return true;
  }
  std::string re_part, im_part;
  if (j == 0) {
    im_part = tok.substr(1);
  } else {
    char sign = tok[j - 1];
    if (sign != '+' && sign != '-') return false;
    re_part = tok.substr(0, j - 1);
    im_part = (sign == '-' ? "-" : "") + tok.substr(j + 1);
  }
  double re = 0.0, im = 0.0;
  if (!re_part.empty() && !to_double(re_part, re)) return false;
  if (!to_double(im_part, im)) return false;
  out = Complex(re, im);
  return true;
}

bool to_pair(const std::string& tok, BusPair& out) {
  auto dash = tok.find('-', 1);
  if (dash == std::string::npos) return false;
  double a, b;
  if (!to_double(tok.substr(0, dash), a) || !to_double(tok.substr(dash + 1), b)) return false;
  if (a != std::floor(a) || b != std::floor(b)) return false;
  out = BusPair{static_cast<int>(a), static_cast<int>(b)};
  return true;
}

}  // namespace

const char* event_kind_name(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::bus_fault_apply: return "bus_fault_apply";
    case EventKind::bus_fault_clear: return "bus_fault_clear";
    case EventKind::line_change: return "line_change";
    case EventKind::load_step: return "load_step";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::validation, "scenario: " + m); };
  schedule.validate();
  if (!(horizon > 0.0)) fail("horizon must be positive");
  if (!(sigma > 0.0)) fail("sigma must be positive");
  if (max_iterations < 1) fail("max_iterations must be at least 1");
  if (!(gfm_substep > 0.0)) fail("gfm_substep must be positive");
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (!(events[k].time >= 0.0)) fail("event time must be non-negative");
    if (k > 0 && events[k].time < events[k - 1].time) fail("events must be sorted by time");
    if (!(events[k].time < horizon)) fail("horizon must exceed every event time");
  }
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& source,
                            const std::filesystem::path& base_dir) {
  ScenarioSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& m) { throw ParseError(source, line_no, m); };
  auto number = [&](const std::string& v) {
    double d;
    if (!to_double(v, d)) fail("expected a number, got '" + v + "'");
    return d;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.empty()) fail("missing value for '" + key + "'");
    if (key == "name") {
      spec.name = val;
    } else if (key == "case") {
      std::filesystem::path p = val;
      if (!base_dir.empty() && p.is_relative()) {
        for (const auto& cand : {base_dir / p, base_dir / (val + ".case")})
          if (std::filesystem::exists(cand)) {
            p = cand;
            break;
          }
      }
      spec.case_path = p;
    } else if (key == "subsystem_cut" || key == "subdomain_cut") {
      BusPair e;
      if (!to_pair(val, e)) fail("expected '<from>-<to>', got '" + val + "'");
      (key == "subsystem_cut" ? spec.subsystem_cuts : spec.subdomain_cuts).push_back(e);
    } else if (key == "boundary_conductance") {
      if (val == "cut") spec.conductance = PortConductance::cut;
      else if (val == "driving_point") spec.conductance = PortConductance::driving_point;
      else fail("boundary_conductance must be 'cut' or 'driving_point'");
    } else if (key == "sigma") {
      spec.sigma = number(val);
    } else if (key == "max_iterations") {
      spec.max_iterations = static_cast<int>(number(val));
    } else if (key == "integrator") {
      if (val != "modified_euler" && val != "rkf45") fail("unknown integrator '" + val + "'");
      spec.integrator = parse_integrator(val);
    } else if (key == "h_fast") {
      spec.schedule.h_fast = number(val);
    } else if (key == "h_slow") {
      spec.schedule.h_slow = number(val);
    } else if (key == "fast_window") {
      spec.schedule.fast_window = number(val);
    } else if (key == "horizon") {
      spec.horizon = number(val);
    } else if (key == "benchmark") {
      if (val == "true" || val == "1") spec.benchmark = true;
      else if (val == "false" || val == "0") spec.benchmark = false;
      else fail("benchmark must be true or false");
    } else if (key == "fault_shunt") {
      if (!to_complex(val, spec.fault_shunt)) fail("bad complex value '" + val + "'");
    } else if (key == "gfm_substep") {
      spec.gfm_substep = number(val);
    } else if (key == "event") {
      std::istringstream ev(val);
      std::vector<std::string> tok;
      std::string t;
      while (ev >> t) tok.push_back(t);
      if (tok.size() < 3 || tok.size() > 4) fail("expected 'event = <time> <kind> <target> [payload]'");
      Event e;
      e.time = number(tok[0]);
      if (tok[1] == "bus_fault_apply") e.kind = EventKind::bus_fault_apply;
      else if (tok[1] == "bus_fault_clear") e.kind = EventKind::bus_fault_clear;
      else if (tok[1] == "line_change") e.kind = EventKind::line_change;
      else if (tok[1] == "load_step") e.kind = EventKind::load_step;
      else fail("unknown event kind '" + tok[1] + "'");
      BusPair ends;
      if (e.kind == EventKind::line_change && to_pair(tok[2], ends)) {
        e.endpoints = std::pair{ends.a, ends.b};
      } else {
        double target = number(tok[2]);
        if (target != std::floor(target)) fail("event target must be an integer");
        e.target = static_cast<int>(target);
      }
      if (tok.size() == 4) {
        if (!to_complex(tok[3], e.payload)) fail("bad event payload '" + tok[3] + "'");
        e.has_payload = true;
      }
      if ((e.kind == EventKind::line_change || e.kind == EventKind::load_step) && !e.has_payload)
        fail(std::string(event_kind_name(e.kind)) + " needs a payload");
      spec.events.push_back(e);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (spec.case_path.empty()) {
    line_no = 0;
    fail("scenario does not name a case");
  }
  std::stable_sort(spec.events.begin(), spec.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ScenarioSpec spec = parse_scenario(ss.str(), path.string(), path.parent_path());
  if (spec.name.empty()) spec.name = path.stem().string();
  return spec;
}

std::filesystem::path resolve_data_file(const std::string& name, const std::string& extension,
                                        const std::filesystem::path& subdir) {
  namespace fs = std::filesystem;
  const fs::path data = GRIDSPLIT_DATA_DIR;
  std::vector<fs::path> candidates = {name, name + extension};
  if (fs::path(name).is_relative()) {
    candidates.push_back(data / subdir / name);
    candidates.push_back(data / subdir / (name + extension));
    candidates.push_back(data / (name + extension));
  }
  for (const auto& c : candidates)
    if (fs::is_regular_file(c)) return c;
  throw Error(ErrorCode::io, "file not found: '" + name + "'");
}

}  // namespace gridsplit
