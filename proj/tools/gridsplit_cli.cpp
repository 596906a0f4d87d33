// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Links only the C interface.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gridsplit/gridsplit.h"

namespace {

enum Exit { kOk = 0, kCompareFail = 1, kDivergence = 2, kInputError = 3 };

int exit_for(gs_status s) {
  if (s == GS_OK) return kOk;
  if (s == GS_ERR_DIVERGENCE || s == GS_ERR_NON_FINITE) return kDivergence;
  return kInputError;
}

int report(gs_status s) {
  std::cerr << "gridsplit: " << gs_status_name(s) << ": " << gs_last_error() << "\n";
  return exit_for(s);
}

struct RunArgs {
  std::string scenario;
  std::string case_name;
  std::string out;
  std::string summary;
  std::string integrator;
  std::string conductance;
  std::optional<double> sigma;
  int benchmark = -1;
  std::optional<double> h_fast;
  std::optional<double> h_slow;
  std::size_t workers = 0;
};

int cmd_run(const RunArgs& a) {
  gs_scenario* scn = nullptr;
  gs_status s = gs_scenario_load(a.scenario.c_str(), &scn);
  if (s != GS_OK) return report(s);
  gs_case* c = nullptr;
  if (!a.case_name.empty()) {
    s = gs_case_load(a.case_name.c_str(), &c);
    if (s != GS_OK) {
      gs_scenario_free(scn);
      return report(s);
    }
  }
  gs_run_options o;
  gs_run_options_init(&o);
  if (a.workers > 0) o.workers = a.workers;
  if (a.sigma) o.sigma = *a.sigma;
  if (a.integrator == "modified_euler") o.integrator = GS_INTEGRATOR_MODIFIED_EULER;
  else if (a.integrator == "rkf45") o.integrator = GS_INTEGRATOR_RKF45;
  if (a.conductance == "cut") o.conductance = 0;
  else if (a.conductance == "driving_point") o.conductance = 1;
  if (a.benchmark >= 0) o.benchmark = a.benchmark;
  if (a.h_fast) o.h_fast = *a.h_fast;
  if (a.h_slow) o.h_slow = *a.h_slow;

  gs_result* r = nullptr;
  s = gs_run(scn, c, &o, &r);
  gs_case_free(c);
  gs_scenario_free(scn);
  if (s != GS_OK) {
    if (s == GS_ERR_DIVERGENCE)
      std::cerr << "gridsplit: diverged at t=" << gs_last_divergence_time() << "\n";
    return report(s);
  }
  int code = kOk;
  if (!a.out.empty()) {
    s = gs_result_write_csv(r, a.out.c_str());
    if (s != GS_OK) code = report(s);
  }
  char* json = nullptr;
  s = gs_result_summary_json(r, &json);
  if (s == GS_OK) {
    if (a.summary.empty()) {
      std::cout << json << "\n";
    } else {
      std::ofstream f(a.summary);
      f << json << "\n";
      if (!f) code = kInputError, std::cerr << "gridsplit: cannot write " << a.summary << "\n";
    }
    gs_string_free(json);
  } else {
    code = report(s);
  }
  gs_result_free(r);
  return code;
}

struct Sweep {
  std::string key;
  double from = 0.0, step = 0.0, to = 0.0;
};

bool parse_sweep(const std::string& text, Sweep& out) {
  auto eq = text.find('=');
  if (eq == std::string::npos) return false;
  out.key = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  auto c1 = rest.find(':');
  auto c2 = rest.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) return false;
  char* end = nullptr;
  out.from = std::strtod(rest.substr(0, c1).c_str(), &end);
  out.step = std::strtod(rest.substr(c1 + 1, c2 - c1 - 1).c_str(), &end);
  out.to = std::strtod(rest.substr(c2 + 1).c_str(), &end);
  return std::isfinite(out.from) && std::isfinite(out.to) && out.step > 0.0 && out.to >= out.from;
}

int print_eig(const gs_case* c, std::size_t k, const char* label) {
  double re[13], im[13];
  int stable = 0, coupled = 0;
  gs_status s = gs_gfm_eigenvalues(c, k, re, im, &stable, &coupled);
  if (s != GS_OK) return report(s);
  std::cout << label << " stable=" << (stable ? "yes" : "no")
            << " stable_coupled=" << (coupled ? "yes" : "no") << "\n";
  for (int i = 0; i < 13; ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %.10g %+.10gj\n", re[i], im[i]);
    std::cout << buf;
  }
  return kOk;
}

int write_sweep_row(const gs_case* c, const std::string& value, std::ostream& out) {
  double re[13], im[13];
  int stable = 0, coupled = 0;
  gs_status s = gs_gfm_eigenvalues(c, 0, re, im, &stable, &coupled);
  if (s != GS_OK) return report(s);
  double max_re = re[0];
  for (double r : re) max_re = std::max(max_re, r);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", max_re);
  out << value << ',' << stable << ',' << coupled << ',' << buf;
  for (int i = 0; i < 13; ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", re[i], im[i]);
    out << buf;
  }
  out << '\n';
  return kOk;
}

int cmd_eig(const std::string& case_name, const std::string& sweep_text, const std::string& out_path) {
  gs_case* c = nullptr;
  gs_status s = gs_case_load(case_name.c_str(), &c);
  if (s != GS_OK) return report(s);
  std::size_t n = gs_case_gfm_count(c);
  if (n == 0) {
    std::cerr << "gridsplit: case has no GFM\n";
    gs_case_free(c);
    return kInputError;
  }
  int code = kOk;
  if (sweep_text.empty()) {
    for (std::size_t k = 0; k < n && code == kOk; ++k) {
      const char* name = nullptr;
      gs_gfm_name(c, k, &name);
      code = print_eig(c, k, name);
    }
    gs_case_free(c);
    return code;
  }
  Sweep sw;
  if (!parse_sweep(sweep_text, sw)) {
    std::cerr << "gridsplit: bad --sweep, expected KEY=from:step:to\n";
    gs_case_free(c);
    return kInputError;
  }
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "gridsplit: cannot write '" << out_path << "'\n";
      gs_case_free(c);
      return kInputError;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  const char* name = nullptr;
  gs_gfm_name(c, 0, &name);
  const std::string block = name;
  out << sw.key << ",stable,stable_coupled,max_real";
  for (int i = 1; i <= 13; ++i) out << ",re" << i << ",im" << i;
  out << '\n';
  const long steps = std::lround(std::floor((sw.to - sw.from) / sw.step + 1e-9));
  for (long i = 0; i <= steps && code == kOk; ++i) {
    const double v = sw.from + static_cast<double>(i) * sw.step;
    gs_case* w = nullptr;
    s = gs_case_clone(c, &w);
    if (s == GS_OK) s = gs_case_set_param(w, block.c_str(), sw.key.c_str(), v);
    if (s != GS_OK) {
      gs_case_free(w);
      code = report(s);
      break;
    }
    char value[32];
    std::snprintf(value, sizeof value, "%.10g", v);
    code = write_sweep_row(w, value, out);
    gs_case_free(w);
  }
  gs_case_free(c);
  return code;
}

int cmd_compare(const std::vector<std::string>& files, double tol) {
  std::vector<double> per_bus(256);
  std::vector<int> buses(256);
  double max = 0.0, time = 0.0;
  int bus = 0;
  std::size_t count = 0;
  gs_status s = gs_compare_csv(files[0].c_str(), files.size() > 1 ? files[1].c_str() : nullptr, &max,
                               &bus, &time, &count, per_bus.data(), buses.data(), per_bus.size());
  if (s != GS_OK) return report(s);
  for (std::size_t i = 0; i < count && i < per_bus.size(); ++i)
    std::cout << "bus " << buses[i] << " max_deviation " << per_bus[i] << "\n";
  std::cout << "max_deviation " << max << " at bus " << bus << " t=" << time << "\n";
  bool ok = max <= tol;
  std::cout << (ok ? "PASS" : "FAIL") << " tol=" << tol << "\n";
  return ok ? kOk : kCompareFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridsplit: transient stability with hybrid domain decomposition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gs_version()));

  RunArgs ra;
  std::string integrator;
  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("--scenario,scenario", ra.scenario, "Scenario file or bundled name")->required();
  run->add_option("--case", ra.case_name, "Override the scenario's case");
  run->add_option("--out", ra.out, "CSV output path");
  run->add_option("--summary", ra.summary, "Write the JSON summary here instead of stdout");
  run->add_option("--workers", ra.workers, "Worker threads (default GRIDSPLIT_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--sigma", ra.sigma, "Boundary mismatch tolerance")->check(CLI::PositiveNumber);
  run->add_option("--integrator", ra.integrator, "modified_euler or rkf45")
      ->check(CLI::IsMember({"modified_euler", "rkf45"}));
  run->add_option("--conductance", ra.conductance, "Boundary conductance: cut or driving_point")
      ->check(CLI::IsMember({"cut", "driving_point"}));
  auto* bench_on = run->add_flag_callback("--benchmark", [&ra] { ra.benchmark = 1; }, "Run the monolithic benchmark alongside");
  run->add_flag_callback("--no-benchmark", [&ra] { ra.benchmark = 0; }, "Skip the monolithic benchmark")->excludes(bench_on);
  run->add_option("--h-fast", ra.h_fast, "Step size inside the disturbance window")
      ->check(CLI::PositiveNumber);
  run->add_option("--h-slow", ra.h_slow, "Step size elsewhere")->check(CLI::PositiveNumber);

  std::string eig_case = "case9";
  std::string sweep;
  auto* eig = app.add_subcommand("eig", "GFM eigenvalues");
  eig->add_option("--case,case", eig_case, "Case file or bundled name");
  std::string eig_out;
  eig->add_option("--sweep", sweep, "KEY=from:step:to, e.g. Rv_over_Xv=0.1:0.1:1");
  eig->add_option("--out", eig_out, "Write the sweep CSV here instead of stdout");

  std::vector<std::string> files;
  double tol = 1e-6;
  auto* cmp = app.add_subcommand("compare", "Max voltage deviation between traces");
  cmp->add_option("files", files, "One CSV with bench columns, or two CSVs")
      ->required()
      ->expected(1, 2);
  cmp->add_option("--tol", tol, "Pass threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  if (*run) return cmd_run(ra);
  if (*eig) return cmd_eig(eig_case, sweep, eig_out);
  return cmd_compare(files, tol);
}
