// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "gridsplit/engine.hpp"
#include "gridsplit/error.hpp"

namespace gridsplit {

NetworkModel::NetworkModel(const PowerFlowCase& c) : branches_(c.branches) {
  const std::size_t n = c.buses.size();
  base_shunt_.resize(n);
  for (std::size_t i = 0; i < n; ++i) base_shunt_[i] = c.buses[i].shunt;
  load_.assign(n, Complex{});
  device_.assign(n, Complex{});
  fault_.assign(n, Complex{});
}

void NetworkModel::change_branch(int branch, Complex delta) {
  if (delta == Complex{}) return;
  Branch& br = branches_[static_cast<std::size_t>(branch)];
  Complex y = br.series_y + delta;
  if (y == Complex{}) {
    br.in_service = false;
    return;
  }
  br.series_y = y;
  Complex z = 1.0 / y;
  br.r = z.real();
  br.x = z.imag();
}

AdmittanceMatrix NetworkModel::admittance() const {
  const std::size_t n = base_shunt_.size();
  std::vector<std::vector<Complex>> shunts(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (Complex s : {base_shunt_[i], load_[i], device_[i], fault_[i]})
      if (s != Complex{}) shunts[i].push_back(s);
  }
  return build_admittance(static_cast<int>(n), branches_, shunts);
}

ResolvedEvent resolve_event(const PowerFlowCase& c, const Event& e) {
  ResolvedEvent r;
  r.event = e;
  if (e.kind == EventKind::line_change) {
    if (e.endpoints) {
      int a = c.bus_index(e.endpoints->first);
      int b = c.bus_index(e.endpoints->second);
      for (std::size_t k = 0; k < c.branches.size() && r.branch < 0; ++k) {
        const Branch& br = c.branches[k];
        if ((br.from == a && br.to == b) || (br.from == b && br.to == a)) r.branch = static_cast<int>(k);
      }
      if (r.branch < 0)
        throw Error(ErrorCode::validation, "line_change target " + std::to_string(e.endpoints->first) + "-" +
                                               std::to_string(e.endpoints->second) + " does not exist");
    } else {
      if (e.target < 1 || e.target > static_cast<int>(c.branches.size()))
        throw Error(ErrorCode::validation, "line_change target branch " + std::to_string(e.target) +
                                               " does not exist");
      r.branch = e.target - 1;
    }
  } else {
    r.bus = c.bus_index(e.target);
    if (r.bus < 0)
      throw Error(ErrorCode::validation, std::string(event_kind_name(e.kind)) + " target bus " +
                                             std::to_string(e.target) + " does not exist");
  }
  return r;
}

void apply_event(NetworkModel& net, const ResolvedEvent& r, const CVector& V, Complex fault_shunt) {
  const Event& e = r.event;
  switch (e.kind) {
    case EventKind::bus_fault_apply:
      net.set_fault(r.bus, e.has_payload ? e.payload : fault_shunt);
      break;
    case EventKind::bus_fault_clear:
      net.clear_fault(r.bus);
      break;
    case EventKind::line_change:
      net.change_branch(r.branch, e.payload);
      break;
    case EventKind::load_step: {
      // Constant impedance sized so the power drawn at the pre-event voltage
      // rises by the payload.
      const double v2 = std::norm(V(r.bus));
      if (!(v2 > 0.0)) throw Error(ErrorCode::validation, "load_step at a bus with zero voltage");
      net.set_load(r.bus, net.load(r.bus) + std::conj(e.payload) / v2);
      break;
    }
  }
}

}  // namespace gridsplit
