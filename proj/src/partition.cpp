// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "gridsplit/decomp.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

std::string edge_name(const PowerFlowCase& c, int a, int b) {
  return std::to_string(c.buses[static_cast<std::size_t>(a)].number) + "-" +
         std::to_string(c.buses[static_cast<std::size_t>(b)].number);
}

std::vector<int> resolve_edges(const PowerFlowCase& c, const std::vector<EdgeRef>& edges,
                               std::set<int>& taken) {
  const int n = static_cast<int>(c.buses.size());
  std::vector<int> out;
  for (const auto& e : edges) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
      throw Error(ErrorCode::partition, "invalid edge: unknown bus");
    bool found = false;
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
      const Branch& br = c.branches[k];
      bool match = (br.from == e.a && br.to == e.b) || (br.from == e.b && br.to == e.a);
      if (!match || !br.in_service) continue;
      found = true;
      if (!taken.insert(static_cast<int>(k)).second)
        throw Error(ErrorCode::partition, "invalid edge " + edge_name(c, e.a, e.b) + ": listed more than once");
      out.push_back(static_cast<int>(k));
    }
    if (!found)
      throw Error(ErrorCode::partition, "invalid edge " + edge_name(c, e.a, e.b) + ": no in-service branch");
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Labels components in order of their lowest bus index.
std::vector<int> label_components(std::vector<int>& parent, int n) {
  std::map<int, int> label;
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    auto it = label.find(r);
    if (it == label.end()) it = label.emplace(r, static_cast<int>(label.size())).first;
    out[static_cast<std::size_t>(i)] = it->second;
  }
  return out;
}

}  // namespace

std::vector<int> PartitionPlan::buses_of(int subsystem) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < subsystem_of.size(); ++i)
    if (subsystem_of[i] == subsystem) out.push_back(static_cast<int>(i));
  return out;
}

bool PartitionPlan::is_interface(const std::vector<Branch>& branches, int bus) const {
  for (int k : subdomain_cuts) {
    const Branch& br = branches[static_cast<std::size_t>(k)];
    if (br.from == bus || br.to == bus) return true;
  }
  return false;
}

PartitionPlan make_partition(const PowerFlowCase& c, const std::vector<EdgeRef>& subsystem_cuts,
                             const std::vector<EdgeRef>& subdomain_cuts) {
  const int n = static_cast<int>(c.buses.size());
  PartitionPlan plan;
  std::set<int> taken;
  plan.subsystem_cuts = resolve_edges(c, subsystem_cuts, taken);
  plan.subdomain_cuts = resolve_edges(c, subdomain_cuts, taken);
  const std::set<int> sys_cut(plan.subsystem_cuts.begin(), plan.subsystem_cuts.end());

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const Branch& br = c.branches[k];
    if (!br.in_service || sys_cut.count(static_cast<int>(k))) continue;
    parent[static_cast<std::size_t>(find_root(parent, br.from))] = find_root(parent, br.to);
  }
  plan.subsystem_of = label_components(parent, n);
  plan.subsystem_count = 1 + *std::max_element(plan.subsystem_of.begin(), plan.subsystem_of.end());
  for (int k : plan.subsystem_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    if (plan.subsystem_of[static_cast<std::size_t>(br.from)] == plan.subsystem_of[static_cast<std::size_t>(br.to)])
      throw Error(ErrorCode::partition, "subsystem cut " + edge_name(c, br.from, br.to) +
                                            " does not disconnect its endpoints; both stay in subsystem " +
                                            std::to_string(plan.subsystem_of[static_cast<std::size_t>(br.from)]));
  }

  const std::set<int> dom_cut(plan.subdomain_cuts.begin(), plan.subdomain_cuts.end());
  for (int k : plan.subdomain_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    if (plan.subsystem_of[static_cast<std::size_t>(br.from)] != plan.subsystem_of[static_cast<std::size_t>(br.to)])
      throw Error(ErrorCode::partition, "invalid edge " + edge_name(c, br.from, br.to) +
                                            ": subdomain cut joins two subsystems");
  }
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const Branch& br = c.branches[k];
    if (!br.in_service || sys_cut.count(static_cast<int>(k)) || dom_cut.count(static_cast<int>(k))) continue;
    parent[static_cast<std::size_t>(find_root(parent, br.from))] = find_root(parent, br.to);
  }
  std::vector<int> global = label_components(parent, n);
  plan.subdomain_of.assign(static_cast<std::size_t>(n), 0);
  plan.subdomain_count.assign(static_cast<std::size_t>(plan.subsystem_count), 0);
  std::map<int, int> local;
  for (int i = 0; i < n; ++i) {
    int s = plan.subsystem_of[static_cast<std::size_t>(i)];
    auto it = local.find(global[static_cast<std::size_t>(i)]);
    if (it == local.end())
      it = local.emplace(global[static_cast<std::size_t>(i)], plan.subdomain_count[static_cast<std::size_t>(s)]++).first;
    plan.subdomain_of[static_cast<std::size_t>(i)] = it->second;
  }
  for (int k : plan.subdomain_cuts) {
    const Branch& br = c.branches[static_cast<std::size_t>(k)];
    if (global[static_cast<std::size_t>(br.from)] == global[static_cast<std::size_t>(br.to)])
      throw Error(ErrorCode::partition, "subdomain cut " + edge_name(c, br.from, br.to) +
                                            " does not disconnect its endpoints within the subsystem");
  }

  std::map<int, int> counts;
  for (int i = 0; i < n; ++i) ++counts[global[static_cast<std::size_t>(i)]];
  int lo = n, hi = 0;
  for (const auto& [g, cnt] : counts) {
    lo = std::min(lo, cnt);
    hi = std::max(hi, cnt);
  }
  plan.balance_spread = hi - lo;
  return plan;
}

}  // namespace gridsplit
