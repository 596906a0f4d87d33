// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridsplit/gridsplit.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "gridsplit/devices.hpp"
#include "gridsplit/engine.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/netcore.hpp"
#include "gridsplit/worker_pool.hpp"

struct gs_case {
  gridsplit::PowerFlowCase c;
};

struct gs_scenario {
  gridsplit::ScenarioSpec spec;
  std::string case_path;
};

struct gs_result {
  gridsplit::RunOutput output;
  gridsplit::ScenarioSpec spec;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

namespace {

thread_local std::string g_last_error;
thread_local double g_divergence_time = std::numeric_limits<double>::quiet_NaN();

gs_status fail(gs_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
gs_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return GS_OK;
  } catch (const gridsplit::DivergenceError& e) {
    g_divergence_time = e.time();
    return fail(GS_ERR_DIVERGENCE, e.what());
  } catch (const gridsplit::Error& e) {
    return fail(static_cast<gs_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GS_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

gs_status null_arg(const char* what) {
  return fail(GS_ERR_ARGUMENT, std::string("null argument: ") + what);
}

std::vector<const gridsplit::ParamBlock*> gfm_blocks(const gridsplit::PowerFlowCase& c) {
  std::vector<const gridsplit::ParamBlock*> out;
  for (const auto& g : c.generators) {
    if (g.kind != gridsplit::DeviceKind::gfm) continue;
    out.push_back(&c.block(g.key));
  }
  return out;
}

void tabulate(gs_result& r) {
  std::ostringstream os;
  gridsplit::write_csv(r.output.result, os);
  r.header = gridsplit::csv_header(r.output.result);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(r.header.size());
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      row.push_back(std::strtod(line.substr(pos, comma - pos).c_str(), nullptr));
      pos = comma + 1;
    }
    r.rows.push_back(std::move(row));
  }
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return g_last_error.c_str(); }

const char* gs_status_name(gs_status status) {
  if (status == GS_OK) return "ok";
  if (status == GS_ERR_INTERNAL) return "internal";
  if (status >= GS_ERR_PARSE && status <= GS_ERR_NON_FINITE)
    return gridsplit::error_code_name(static_cast<gridsplit::ErrorCode>(static_cast<int>(status)));
  return "unknown";
}

void gs_string_free(char* s) { std::free(s); }

gs_status gs_case_load(const char* name, gs_case** out) {
  if (name == nullptr) return null_arg("name");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto path = gridsplit::resolve_data_file(name, ".case");
    auto h = std::make_unique<gs_case>();
    h->c = gridsplit::load_case(path);
    *out = h.release();
  });
}

gs_status gs_case_parse(const char* text, gs_case** out) {
  if (text == nullptr) return null_arg("text");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<gs_case>();
    h->c = gridsplit::parse_case(text);
    gridsplit::validate_case(h->c);
    *out = h.release();
  });
}

gs_status gs_case_clone(const gs_case* c, gs_case** out) {
  if (c == nullptr) return null_arg("case");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new gs_case(*c); });
}

void gs_case_free(gs_case* c) { delete c; }

size_t gs_case_bus_count(const gs_case* c) { return c ? c->c.buses.size() : 0; }
size_t gs_case_branch_count(const gs_case* c) { return c ? c->c.branches.size() : 0; }
size_t gs_case_generator_count(const gs_case* c) { return c ? c->c.generators.size() : 0; }

size_t gs_case_gfm_count(const gs_case* c) {
  if (c == nullptr) return 0;
  size_t n = 0;
  for (const auto& g : c->c.generators)
    if (g.kind == gridsplit::DeviceKind::gfm) ++n;
  return n;
}

gs_status gs_case_serialize(const gs_case* c, char** out) {
  if (c == nullptr) return null_arg("case");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = dup_string(gridsplit::serialize_case(c->c)); });
}

gs_status gs_case_set_param(gs_case* c, const char* block, const char* key, double value) {
  if (c == nullptr) return null_arg("case");
  if (block == nullptr) return null_arg("block");
  if (key == nullptr) return null_arg("key");
  return guarded([&] {
    for (auto& b : c->c.blocks) {
      if (b.name == block) {
        b.set(key, value);
        gridsplit::validate_case(c->c);
        return;
      }
    }
    throw gridsplit::Error(gridsplit::ErrorCode::argument,
                           std::string("no parameter block named '") + block + "'");
  });
}

gs_status gs_gfm_name(const gs_case* c, size_t gfm_index, const char** name) {
  if (c == nullptr) return null_arg("case");
  if (name == nullptr) return null_arg("name");
  return guarded([&] {
    auto blocks = gfm_blocks(c->c);
    if (gfm_index >= blocks.size())
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "GFM index out of range");
    *name = blocks[gfm_index]->name.c_str();
  });
}

gs_status gs_gfm_eigenvalues(const gs_case* c, size_t gfm_index, double* re, double* im,
                             int* stable, int* stable_coupled) {
  if (c == nullptr) return null_arg("case");
  return guarded([&] {
    auto blocks = gfm_blocks(c->c);
    if (gfm_index >= blocks.size())
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "GFM index out of range");
    auto def = gridsplit::gfm_definition_from_block(*blocks[gfm_index], c->c.frequency,
                                                    c->c.base_mva);
    auto p = gridsplit::aggregate(def.aggregate, def.module);
    auto rep = gridsplit::gfm_eigen_stability(gridsplit::gfm_build_state_space(p));
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
      if (re) re[i] = rep.eigenvalues[i].real();
      if (im) im[i] = rep.eigenvalues[i].imag();
    }
    if (stable) *stable = rep.stable ? 1 : 0;
    if (stable_coupled) *stable_coupled = rep.stable_coupled ? 1 : 0;
  });
}

gs_status gs_scenario_load(const char* name, gs_scenario** out) {
  if (name == nullptr) return null_arg("name");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto path = gridsplit::resolve_data_file(name, ".scn", "scenarios");
    auto h = std::make_unique<gs_scenario>();
    h->spec = gridsplit::load_scenario(path);
    h->case_path = h->spec.case_path.string();
    *out = h.release();
  });
}

gs_status gs_scenario_parse(const char* text, const char* base_dir, gs_scenario** out) {
  if (text == nullptr) return null_arg("text");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<gs_scenario>();
    h->spec = gridsplit::parse_scenario(text, "<string>",
                                        base_dir ? std::filesystem::path(base_dir)
                                                 : std::filesystem::path());
    h->case_path = h->spec.case_path.string();
    *out = h.release();
  });
}

void gs_scenario_free(gs_scenario* s) { delete s; }

gs_status gs_scenario_case_path(const gs_scenario* s, const char** path) {
  if (s == nullptr) return null_arg("scenario");
  if (path == nullptr) return null_arg("path");
  *path = s->case_path.c_str();
  return GS_OK;
}

void gs_run_options_init(gs_run_options* o) {
  if (o == nullptr) return;
  o->workers = gridsplit::default_worker_count();
  o->sigma = 0.0;
  o->integrator = GS_INTEGRATOR_DEFAULT;
  o->benchmark = -1;
  o->h_fast = 0.0;
  o->h_slow = 0.0;
  o->conductance = -1;
}

gs_status gs_run(const gs_scenario* s, const gs_case* c, const gs_run_options* o, gs_result** out) {
  if (s == nullptr) return null_arg("scenario");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  gs_run_options opts;
  gs_run_options_init(&opts);
  if (o != nullptr) opts = *o;
  return guarded([&] {
    gridsplit::ScenarioSpec spec = s->spec;
    gridsplit::RunOptions ro;
    if (opts.workers < 1)
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "workers must be at least 1");
    ro.workers = opts.workers;
    if (opts.sigma > 0.0) ro.sigma = opts.sigma;
    if (std::isnan(opts.sigma))
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "sigma must be a number");
    if (opts.integrator == GS_INTEGRATOR_MODIFIED_EULER)
      ro.integrator = gridsplit::IntegratorKind::modified_euler;
    else if (opts.integrator == GS_INTEGRATOR_RKF45)
      ro.integrator = gridsplit::IntegratorKind::rkf45;
    else if (opts.integrator != GS_INTEGRATOR_DEFAULT)
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "unknown integrator");
    if (opts.benchmark >= 0) ro.benchmark = opts.benchmark != 0;
    if (opts.conductance == 0) ro.conductance = gridsplit::PortConductance::cut;
    else if (opts.conductance == 1) ro.conductance = gridsplit::PortConductance::driving_point;
    else if (opts.conductance != -1)
      throw gridsplit::Error(gridsplit::ErrorCode::argument, "unknown boundary conductance mode");
    if (opts.h_fast > 0.0 || opts.h_slow > 0.0) {
      auto sched = s->spec.schedule;
      if (opts.h_fast > 0.0) sched.h_fast = opts.h_fast;
      if (opts.h_slow > 0.0) sched.h_slow = opts.h_slow;
      sched.validate();
      ro.schedule = sched;
    }
    if (ro.sigma) spec.sigma = *ro.sigma;
    if (ro.conductance) spec.conductance = *ro.conductance;
    if (ro.integrator) spec.integrator = *ro.integrator;
    if (ro.benchmark) spec.benchmark = *ro.benchmark;
    if (ro.schedule) spec.schedule = *ro.schedule;
    gridsplit::RunOptions plain;
    plain.workers = ro.workers;
    auto h = std::make_unique<gs_result>();
    h->spec = spec;
    h->output = c ? gridsplit::run(spec, c->c, plain) : gridsplit::run(spec, plain);
    tabulate(*h);
    *out = h.release();
  });
}

void gs_result_free(gs_result* r) { delete r; }

size_t gs_result_rows(const gs_result* r) { return r ? r->rows.size() : 0; }
size_t gs_result_columns(const gs_result* r) { return r ? r->header.size() : 0; }

const char* gs_result_column_name(const gs_result* r, size_t col) {
  if (r == nullptr || col >= r->header.size()) return nullptr;
  return r->header[col].c_str();
}

gs_status gs_result_value(const gs_result* r, size_t row, size_t col, double* out) {
  if (r == nullptr) return null_arg("result");
  if (out == nullptr) return null_arg("out");
  if (row >= r->rows.size() || col >= r->header.size())
    return fail(GS_ERR_ARGUMENT, "row or column out of range");
  *out = r->rows[row][col];
  return GS_OK;
}

gs_status gs_result_write_csv(const gs_result* r, const char* path) {
  if (r == nullptr) return null_arg("result");
  if (path == nullptr) return null_arg("path");
  return guarded([&] { gridsplit::write_csv(r->output.result, std::filesystem::path(path)); });
}

gs_status gs_result_summary_json(const gs_result* r, char** out) {
  if (r == nullptr) return null_arg("result");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = dup_string(gridsplit::summary_json(r->output, r->spec)); });
}

gs_status gs_result_max_deviation(const gs_result* r, double* max, int* bus, double* time) {
  if (r == nullptr) return null_arg("result");
  return guarded([&] {
    auto rep = gridsplit::compare_to_benchmark(r->output.result);
    if (max) *max = rep.max;
    if (bus) *bus = rep.bus_of_max;
    if (time) *time = rep.time_of_max;
  });
}

double gs_last_divergence_time(void) { return g_divergence_time; }

gs_status gs_compare_csv(const char* a, const char* b, double* max, int* bus, double* time,
                         size_t* count, double* per_bus, int* buses, size_t capacity) {
  if (a == nullptr) return null_arg("a");
  return guarded([&] {
    auto ta = gridsplit::read_csv(a);
    gridsplit::DeviationReport rep;
    if (b != nullptr) {
      auto tb = gridsplit::read_csv(b);
      rep = gridsplit::compare_csv(ta, &tb);
    } else {
      rep = gridsplit::compare_csv(ta, nullptr);
    }
    if (max) *max = rep.max;
    if (bus) *bus = rep.bus_of_max;
    if (time) *time = rep.time_of_max;
    if (count) *count = rep.bus_numbers.size();
    for (std::size_t i = 0; i < rep.bus_numbers.size() && i < capacity; ++i) {
      if (per_bus) per_bus[i] = rep.per_bus_max[i];
      if (buses) buses[i] = rep.bus_numbers[i];
    }
  });
}

}  // extern "C"
