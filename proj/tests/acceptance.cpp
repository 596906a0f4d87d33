// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion. `--only N` runs one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "gfm_oracle.hpp"
#include "gridsplit/decomp.hpp"
#include "gridsplit/engine.hpp"
#include "gridsplit/error.hpp"
#include "support.hpp"

using namespace gridsplit;
using namespace gridsplit::testing;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ScenarioSpec bundled(const std::string& name) { return load_scenario(scenario_path(name)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict benchmark_equivalence() {
  Verdict v{true, ""};
  for (const char* name : {"fault_bus2", "line6_change", "load_step_075"}) {
    RunOptions o;
    o.sigma = 1e-8;
    o.benchmark = true;
    auto t0 = std::chrono::steady_clock::now();
    RunOutput out = run(bundled(name), o);
    const double wall = seconds_since(t0);
    const double dev = compare_to_benchmark(out.result).max;
    const bool ok = dev <= 1e-6 && wall < 60.0 && out.result.times.back() == 5.0;
    v.pass = v.pass && ok;
    v.detail += std::string(name) + " dev=" + fmt("%.2e", dev) + " wall=" + fmt("%.2fs", wall) + "; ";
  }
  return v;
}

Verdict iteration_counts() {
  Verdict v{true, ""};
  for (const char* name : {"line6_change", "fault_bus2"}) {
    RunOptions o;
    o.sigma = 1e-6;
    std::vector<int> it = run(bundled(name), o).result.iterations;
    std::sort(it.begin(), it.end());
    const double median = it.size() % 2 ? it[it.size() / 2] : 0.5 * (it[it.size() / 2 - 1] + it[it.size() / 2]);
    const bool ok = it.back() <= 5 && median <= 3.0;
    v.pass = v.pass && ok;
    v.detail += std::string(name) + " max=" + std::to_string(it.back()) + " median=" + fmt("%g", median) + "; ";
  }
  return v;
}

Verdict gfm_model() {
  const GfmDefinition def = table_gfm();
  const GfmParams p = aggregate(def.aggregate, def.module);
  const GfmStateSpace ss = gfm_build_state_space(p);
  const bool shapes = ss.A.rows() == 13 && ss.A.cols() == 13 && ss.B.rows() == 13 && ss.B.cols() == 4;
  const StabilityReport st = gfm_eigen_stability(ss);
  double max_re = -HUGE_VAL;
  for (Complex l : st.eigenvalues) max_re = std::max(max_re, l.real());
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    GfmState x;
    GfmInput u;
    for (int i = 0; i < 13; ++i) x(i) = n01(rng);
    for (int i = 0; i < 4; ++i) u(i) = n01(rng);
    const GfmState ref = gfm_oracle(p, x, u);
    const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
    worst = std::max(worst, (gfm_derivative(ss, x, u) - ref).cwiseAbs().maxCoeff() / scale);
  }
  Verdict v;
  v.pass = shapes && st.stable && worst <= 1e-12;
  v.detail = std::string("A 13x13, B 13x4 ") + (shapes ? "ok" : "wrong") + "; all 13 Re<0: " +
             (st.stable ? "yes" : "no") + " (max Re " + fmt("%.3e", max_re) + "; 12 coupled modes stable: " +
             (st.stable_coupled ? "yes" : "no") + "); oracle max rel err " + fmt("%.2e", worst);
  return v;
}

Verdict swing_spot() {
  MachineParams m;
  m.H = 3.7;
  m.D = 0.0;
  m.omega_s = 2.0 * M_PI * 60.0;
  m.tau_g = 5.0;
  m.dp = 0.01;
  m.xd_p = 0.1;
  m.P_m_ref = 1.0;
  const double d = swing_derivative(m, MachineState{0.0, m.omega_s, 1.0, 1.0}, 0.9).d_omega;
  return {std::abs(d - 5.0945) <= 1e-4, "domega/dt = " + fmt("%.6f", d)};
}

double decay_error(bool rkf, double h) {
  const Derivative f = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  const int steps = static_cast<int>(std::lround(1.0 / h));
  for (int k = 0; k < steps; ++k) x = rkf ? rkf45_step(f, x, k * h, h).x : modified_euler_step(f, x, k * h, h);
  return std::abs(x(0) - std::exp(-1.0));
}

Verdict integrator_orders() {
  const double me = std::log2(decay_error(false, 0.01) / decay_error(false, 0.005));
  const double rk = std::log2(decay_error(true, 0.1) / decay_error(true, 0.05));
  // Uniform 1 ms steps over the whole fault run.
  ScenarioSpec s = bundled("fault_bus2");
  RunOptions o;
  o.benchmark = false;
  o.schedule = StepSchedule{0.001, 0.001, s.schedule.fast_window};
  o.integrator = IntegratorKind::modified_euler;
  const TimeSeriesResult a = run(s, o).result;
  o.integrator = IntegratorKind::rkf45;
  const TimeSeriesResult b = run(s, o).result;
  double dev = HUGE_VAL;
  if (a.times == b.times) {
    dev = 0.0;
    for (std::size_t k = 0; k < a.times.size(); ++k) dev = std::max(dev, (a.bus_V[k] - b.bus_V[k]).cwiseAbs().maxCoeff());
  }
  Verdict v;
  v.pass = std::abs(me - 2.0) <= 0.3 && rk >= 4.0 && dev <= 1e-3;
  v.detail = "ME order " + fmt("%.3f", me) + ", RKF45 order " + fmt("%.3f", rk) + ", fault ME vs RKF45 at h=1ms " +
             fmt("%.2e", dev) + " pu";
  return v;
}

Verdict fault_phenomenology() {
  const TimeSeriesResult r = run(bundled("fault_bus2")).result;
  const int faulted = 1;
  std::size_t pre = 0;
  while (r.times[pre + 1] < 1.2 || (r.times[pre + 1] == 1.2 && r.times[pre] != 1.2)) ++pre;
  // pre is the last row before the fault is applied; pre + 1 is the same instant after it.
  bool drop = r.times[pre] == 1.2 && r.times[pre + 1] == 1.2;
  for (int b = 0; b < 9 && drop; ++b) drop = std::abs(r.bus_V[pre + 1](b)) < std::abs(r.bus_V[pre](b));
  double during = 0.0;
  for (std::size_t k = pre + 1; k < r.times.size() && r.times[k] <= 1.4; ++k) {
    if (r.times[k] == 1.4 && (k + 1 == r.times.size() || r.times[k + 1] != 1.4)) break;
    during = std::max(during, std::abs(r.bus_V[k](faulted)));
  }
  double recover = 0.0;
  for (int b = 0; b < 9; ++b) {
    const double v0 = std::abs(r.bus_V[pre](b));
    recover = std::max(recover, std::abs(std::abs(r.bus_V.back()(b)) - v0) / v0);
  }
  Verdict v;
  v.pass = drop && during <= 0.05 && recover <= 0.02 && r.times.back() == 5.0;
  v.detail = std::string("all buses drop at 1.2+: ") + (drop ? "yes" : "no") + ", bus 2 max during fault " +
             fmt("%.2e", during) + " pu, worst recovery error at 5 s " + fmt("%.3f%%", 100.0 * recover);
  return v;
}

Verdict timescale() {
  ScenarioSpec s = bundled("load_step_075");
  const double t_event = s.events.front().time;
  const TimeSeriesResult r = run(s).result;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  names.push_back("gfm");
  series.emplace_back();
  for (const auto& w : r.gfm_omega) series.back().push_back(w[0]);
  for (std::size_t m = 0; m < r.machine_buses.size(); ++m) {
    names.push_back("g" + std::to_string(r.machine_buses[m]));
    series.emplace_back();
    for (const auto& ms : r.machines) series.back().push_back(ms[m].omega);
  }
  std::vector<double> entry, finals;
  for (const auto& w : series) {
    const double f = w.back();
    finals.push_back(f);
    double t_in = HUGE_VAL;
    bool outside = false;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (r.times[k] < t_event) continue;
      const bool in = std::abs(w[k] - f) <= 1e-3 * std::abs(f);
      if (!in) outside = true;
      if (in && outside) {
        t_in = r.times[k];
        break;
      }
    }
    entry.push_back(t_in);
  }
  const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
  const bool common = (*hi - *lo) <= 1e-3 * std::abs(*hi);
  bool first = true;
  std::string detail;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) first = first && entry[0] < entry[i];
    detail += names[i] + " enters band at " + fmt("%.3f", entry[i]) + " s; ";
  }
  detail += "final spread " + fmt("%.2e", *hi - *lo) + " rad/s";
  return {first && common && std::isfinite(entry[0]), detail};
}

Verdict schur_equivalence() {
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 19);
    const int groups = 1 + static_cast<int>(rng() % 4);
    std::vector<int> group(static_cast<std::size_t>(n));
    for (int& g : group) g = static_cast<int>(rng() % static_cast<unsigned>(groups + 1)) - 1;
    group[0] = 0;
    CMatrix M(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) M(r, c) = random_complex(rng);
    for (int r = 0; r < n; ++r) {
      M(r, r) += Complex(static_cast<double>(n), 0.0);
      for (int c = 0; c < n; ++c)
        if (group[static_cast<std::size_t>(r)] >= 0 && group[static_cast<std::size_t>(c)] >= 0 &&
            group[static_cast<std::size_t>(r)] != group[static_cast<std::size_t>(c)])
          M(r, c) = 0.0;
    }
    int used = 0;
    std::vector<int> remap(static_cast<std::size_t>(groups), -1);
    for (int& g : group)
      if (g >= 0) {
        if (remap[static_cast<std::size_t>(g)] < 0) remap[static_cast<std::size_t>(g)] = used++;
        g = remap[static_cast<std::size_t>(g)];
      }
    const SchurLayout layout = make_schur_layout(group, used);
    CVector b(n);
    for (int r = 0; r < n; ++r) b(r) = random_complex(rng);
    SchurRhs rhs;
    for (const auto& rows : layout.interior_rows) {
      CVector f(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) f(static_cast<Eigen::Index>(k)) = b(rows[k]);
      rhs.f.push_back(f);
    }
    rhs.g = CVector(static_cast<Eigen::Index>(layout.interface_rows.size()));
    for (std::size_t k = 0; k < layout.interface_rows.size(); ++k) rhs.g(static_cast<Eigen::Index>(k)) = b(layout.interface_rows[k]);
    const SchurSolution sol = schur_solve(extract_schur_blocks(M, layout), rhs);
    const CVector ref = Eigen::FullPivLU<CMatrix>(M).solve(b);
    CVector x(n);
    for (std::size_t g = 0; g < layout.interior_rows.size(); ++g)
      for (std::size_t k = 0; k < layout.interior_rows[g].size(); ++k)
        x(layout.interior_rows[g][k]) = sol.interior[g](static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < layout.interface_rows.size(); ++k)
      x(layout.interface_rows[k]) = sol.interface(static_cast<Eigen::Index>(k));
    worst = std::max(worst, (x - ref).norm() / ref.norm());
  }
  return {worst <= 1e-10, "200 systems, worst relative error " + fmt("%.2e", worst)};
}

Verdict determinism() {
  Verdict v{true, ""};
  for (const char* name : {"steady", "fault_bus2", "line6_change", "load_step_075"}) {
    std::string text[2];
    for (int i = 0; i < 2; ++i) {
      RunOptions o;
      o.workers = i == 0 ? 1 : 8;
      std::ostringstream out;
      write_csv(run(bundled(name), o).result, out);
      text[i] = out.str();
    }
    const bool same = text[0] == text[1];
    v.pass = v.pass && same;
    v.detail += std::string(name) + (same ? " identical; " : " DIFFERS; ");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--only") only = std::atoi(argv[i + 1]);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"benchmark equivalence", benchmark_equivalence},
      {"relaxation iteration counts", iteration_counts},
      {"GFM model shape and stability", gfm_model},
      {"swing spot value", swing_spot},
      {"integrator orders", integrator_orders},
      {"fault phenomenology", fault_phenomenology},
      {"timescale separation", timescale},
      {"Schur oracle equivalence", schur_equivalence},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only && only != id) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
