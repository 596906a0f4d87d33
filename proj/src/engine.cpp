// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridsplit/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "gridsplit/error.hpp"
#include "gridsplit/worker_pool.hpp"

namespace gridsplit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string device_label(const std::string& key, int bus_number) {
  return "'" + key + "' at bus " + std::to_string(bus_number);
}

// Integrates one GFM over [0, tau] with the grid voltage ramping linearly
// from the value behind input u0 to the one behind u1, in sub-steps no
// longer than `substep`. With `phase` given, the frame is re-anchored after
// every sub-step and the accumulated rotation is added to *phase.
GfmState advance_gfm(const GfmUnit& g, IntegratorKind kind, const GfmState& x0, const GfmInput& u0,
                     const GfmInput& u1, double tau, double substep, bool& clamped, double* phase) {
  if (!(tau > 0.0)) return x0;
  const int m = std::max(1, static_cast<int>(std::ceil(tau / substep - 1e-9)));
  const double hh = tau / m;
  const GfmInput du = u1 - u0;
  const Complex vg0 = gfm_grid_voltage(g.params);
  Complex rot(1.0, 0.0);
  Derivative f = [&](double s, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    GfmInput u = u0 + du * (s / tau);
    if (rot != Complex(1.0, 0.0)) {
      const Complex vg = (Complex(u(0), u(1)) + vg0) * rot - vg0;
      u(0) = vg.real();
      u(1) = vg.imag();
    }
    return g.ss.A * x + g.ss.B * u;
  };
  GfmFrame local;
  Eigen::VectorXd x = x0;
  for (int i = 0; i < m; ++i) {
    const double s = tau * i / m;
    x = kind == IntegratorKind::rkf45 ? rkf45_step(f, x, s, hh).x : modified_euler_step(f, x, s, hh);
    GfmState xs = x;
    if (gfm_clamp_current(g.params, xs)) clamped = true;
    if (phase) {
      gfm_reanchor(g.params, local, xs);
      rot = std::polar(1.0, -local.angle);
    }
    x = xs;
  }
  if (phase) *phase += local.angle;
  return x;
}

constexpr int kCouplingPasses = 20;

class Path {
 public:
  Path(const InitialState& init, const PowerFlowCase& c, const ScenarioSpec& spec, IntegratorKind kind,
       std::optional<PartitionPlan> plan, double sigma, WorkerPool* pool)
      : machines_(init.machines), gfms_(init.gfms), net_(init.network), state_(init.state), kind_(kind),
        substep_(spec.gfm_substep), coupling_tol_(sigma) {
    if (plan) {
      RelaxationSettings rs;
      rs.sigma = sigma;
      rs.max_iterations = spec.max_iterations;
      rs.conductance = spec.conductance;
      solver_.emplace(c, std::move(*plan), rs, pool);
    }
    refactor("initialization");
    if (solver_) solver_->seed(state_.V);
  }

  const SystemState& state() const { return state_; }
  NetworkModel& network() { return net_; }
  void set_network(const NetworkModel& n) { net_ = n; }
  int iterations() const { return iterations_; }
  bool clamped() const { return clamped_; }
  double network_seconds() const { return network_seconds_; }
  double rkf_error() const { return rkf_error_; }
  const std::vector<std::vector<double>>& mismatch() const { return mismatch_; }

  void refactor(const std::string& context) {
    const auto t0 = Clock::now();
    AdmittanceMatrix Y = net_.admittance();
    try {
      if (solver_) solver_->factor(Y, net_.branches());
      else lu_ = ComplexLu(Y.to_dense(), "monolithic network");
      if (!gfms_.empty()) {
        // Driving-point and transfer impedances between GFM buses, used only
        // to linearize the end-of-step coupling.
        const ComplexLu& lu = solver_ ? ComplexLu(Y.to_dense(), "GFM coupling") : lu_;
        const Eigen::Index ng = static_cast<Eigen::Index>(gfms_.size());
        Z_gfm_ = CMatrix(ng, ng);
        for (Eigen::Index k = 0; k < ng; ++k) {
          CVector e = CVector::Zero(net_.size());
          e(gfms_[static_cast<std::size_t>(k)].bus) = 1.0;
          CVector z = lu.solve(e);
          for (Eigen::Index l = 0; l < ng; ++l) Z_gfm_(l, k) = z(gfms_[static_cast<std::size_t>(l)].bus);
        }
      }
    } catch (const SingularMatrixError& e) {
      throw Error(ErrorCode::singular_matrix, context + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singular_matrix) throw;
      throw Error(ErrorCode::singular_matrix, context + ": " + e.what());
    }
    network_seconds_ += seconds_since(t0);
  }

  void begin_row() {
    iterations_ = 0;
    clamped_ = false;
    rkf_error_ = 0.0;
    mismatch_.clear();
  }

  // Network solve for the current device states (used after events).
  void resolve() { state_.V = solve(state_.machines, state_.gfm, std::vector<double>(gfms_.size(), 0.0), state_.t); }

  // One network step. The GFM input is taken to ramp linearly from its
  // value at t0 to an end value w; stages and the end state all use that
  // ramp, and w is solved so it matches the input implied by the end-of-step
  // bus voltage.
  void step(double h, double t_end) {
    const double t0 = state_.t;
    const CVector V0 = state_.V;
    const std::vector<GfmState> g0 = state_.gfm;
    const std::size_t nm = machines_.size(), ng = gfms_.size();
    const Eigen::Index nu = 2 * static_cast<Eigen::Index>(ng);

    std::vector<GfmInput> u0(ng);
    for (std::size_t k = 0; k < ng; ++k)
      u0[k] = gfm_input_from_bus(gfms_[k].params, state_.frames[k], V0(gfms_[k].bus));

    Eigen::VectorXd s0(3 * static_cast<Eigen::Index>(nm));
    for (std::size_t i = 0; i < nm; ++i) {
      s0(3 * i) = state_.machines[i].delta;
      s0(3 * i + 1) = state_.machines[i].omega;
      s0(3 * i + 2) = state_.machines[i].P_m;
    }
    auto unpack = [&](const Eigen::VectorXd& s) {
      std::vector<MachineState> ms = state_.machines;
      for (std::size_t i = 0; i < nm; ++i) {
        ms[i].delta = s(3 * i);
        ms[i].omega = s(3 * i + 1);
        ms[i].P_m = s(3 * i + 2);
      }
      return ms;
    };

    std::vector<MachineState> m1;
    std::vector<GfmState> g1(ng);
    std::vector<double> phase1(ng, 0.0);
    CVector V1;
    bool clamped = false;
    auto evaluate = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      clamped = false;
      std::vector<std::tuple<double, std::vector<GfmState>, std::vector<double>>> track;
      auto gfm_at = [&](double tau) -> const std::tuple<double, std::vector<GfmState>, std::vector<double>>& {
        for (const auto& entry : track)
          if (std::get<0>(entry) == tau) return entry;
        std::vector<GfmState> g(ng);
        std::vector<double> phase(ng, 0.0);
        for (std::size_t k = 0; k < ng; ++k) {
          GfmInput ut = u0[k];
          ut(0) += (w(2 * k) - u0[k](0)) * (tau / h);
          ut(1) += (w(2 * k + 1) - u0[k](1)) * (tau / h);
          g[k] = advance_gfm(gfms_[k], kind_, g0[k], u0[k], ut, tau, substep_, clamped, &phase[k]);
        }
        track.emplace_back(tau, std::move(g), std::move(phase));
        return track.back();
      };
      track.reserve(8);
      track.emplace_back(0.0, g0, std::vector<double>(ng, 0.0));
      Derivative F = [&](double t, const Eigen::VectorXd& s) -> Eigen::VectorXd {
        const double tau = t - t0;
        std::vector<MachineState> ms = unpack(s);
        CVector V = V0;
        if (!(tau == 0.0 && s == s0)) {
          const auto& [tt, gs, ph] = gfm_at(tau);
          V = solve(ms, gs, ph, t);
        }
        Eigen::VectorXd d(s.size());
        for (std::size_t i = 0; i < nm; ++i) {
          const MachineUnit& m = machines_[i];
          SwingRates r = swing_derivative(m.params, ms[i], machine_electrical_power(m.params, ms[i], V(m.bus)));
          d(3 * i) = r.d_delta;
          d(3 * i + 1) = r.d_omega;
          d(3 * i + 2) = r.d_P_m;
        }
        return d;
      };
      Eigen::VectorXd s1 = s0;
      if (nm == 0) {
        // No slow states; only the end-of-step network solve below.
      } else if (kind_ == IntegratorKind::rkf45) {
        RkfResult r = rkf45_step(F, s0, t0, h);
        s1 = r.x;
        rkf_error_ = std::max(rkf_error_, r.error.cwiseAbs().maxCoeff());
      } else {
        s1 = modified_euler_step(F, s0, t0, h);
      }
      m1 = unpack(s1);
      const auto& end = gfm_at(h);
      g1 = std::get<1>(end);
      phase1 = std::get<2>(end);
      V1 = solve(m1, g1, phase1, t_end);
      Eigen::VectorXd out(nu);
      for (std::size_t k = 0; k < ng; ++k) {
        GfmInput u = gfm_input_from_bus(gfms_[k].params, state_.frames[k], V1(gfms_[k].bus));
        out(2 * k) = u(0);
        out(2 * k + 1) = u(1);
      }
      return out;
    };

    Eigen::VectorXd w(nu), scale(nu);
    for (std::size_t k = 0; k < ng; ++k) {
      w(2 * k) = u0[k](0);
      w(2 * k + 1) = u0[k](1);
      scale(2 * k) = scale(2 * k + 1) = 1.0 + gfms_[k].params.v_peak();
    }
    Eigen::VectorXd r = evaluate(w) - w;
    if (ng > 0) {
      const Eigen::MatrixXd J = coupling_jacobian(h) - Eigen::MatrixXd::Identity(nu, nu);
      const auto lu = J.fullPivLu();
      for (int pass = 1;; ++pass) {
        w -= lu.solve(r);
        r = evaluate(w) - w;
        const double change = r.cwiseQuotient(scale).cwiseAbs().maxCoeff();
        if (!std::isfinite(change))
          throw Error(ErrorCode::non_finite, "non-finite GFM input at t = " + format_double(t_end));
        if (change <= coupling_tol_) break;
        if (pass == kCouplingPasses)
          throw DivergenceError(t_end, pass, change,
                                "GFM/network coupling did not converge at t = " + format_double(t_end) +
                                    " (relative input change " + format_double(change) + ")");
      }
    }
    clamped_ = clamped_ || clamped;
    // Reanchoring changes coordinates only; the injection and V1 stay valid.
    for (std::size_t k = 0; k < ng; ++k) {
      state_.frames[k].angle += phase1[k];
      gfm_reanchor(gfms_[k].params, state_.frames[k], g1[k]);
    }
    state_.machines = m1;
    state_.gfm = g1;
    state_.t = t_end;
    state_.V = V1;
  }

 private:
  // Sensitivity of the end-of-step GFM inputs to the assumed end inputs.
  Eigen::MatrixXd coupling_jacobian(double h) {
    const std::size_t ng = gfms_.size();
    const Eigen::Index nu = 2 * static_cast<Eigen::Index>(ng);
    std::vector<Eigen::Matrix2d> K(ng);
    for (std::size_t k = 0; k < ng; ++k) K[k] = ramp_response(k, h);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nu, nu);
    for (std::size_t k = 0; k < ng; ++k) {
      const GfmFrame& fk = state_.frames[k];
      for (int i = 0; i < 2; ++i) {
        const Complex dI = 1.5 * fk.scale / fk.S_base * Complex(K[k](0, i), K[k](1, i)) * std::polar(1.0, fk.angle);
        for (std::size_t l = 0; l < ng; ++l) {
          const GfmFrame& fl = state_.frames[l];
          const Complex du = fl.scale * Z_gfm_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) * dI *
                             std::polar(1.0, -fl.angle);
          J(2 * static_cast<Eigen::Index>(l), 2 * static_cast<Eigen::Index>(k) + i) = du.real();
          J(2 * static_cast<Eigen::Index>(l) + 1, 2 * static_cast<Eigen::Index>(k) + i) = du.imag();
        }
      }
    }
    return J;
  }

  // Grid current at the end of a step of length h per unit ramp of the
  // grid-voltage input, from rest.
  Eigen::Matrix2d ramp_response(std::size_t k, double h) {
    for (const auto& [hk, kk, m] : ramp_cache_)
      if (hk == h && kk == k) return m;
    Eigen::Matrix2d m;
    const GfmInput zero = GfmInput::Zero();
    for (int i = 0; i < 2; ++i) {
      GfmInput u1 = zero;
      u1(i) = 1.0;
      bool ignored = false;
      GfmUnit unclamped = gfms_[k];
      unclamped.params.I_max = std::numeric_limits<double>::infinity();
      GfmState x = advance_gfm(unclamped, kind_, GfmState::Zero(), zero, u1, h, substep_, ignored, nullptr);
      m(0, i) = x(gfm::i_gd);
      m(1, i) = x(gfm::i_gq);
    }
    ramp_cache_.emplace_back(h, k, m);
    return m;
  }

  // `phase` is each GFM's rotation relative to its stored frame.
  CVector injections(const std::vector<MachineState>& ms, const std::vector<GfmState>& gs,
                     const std::vector<double>& phase) const {
    CVector I = CVector::Zero(net_.size());
    for (std::size_t i = 0; i < machines_.size(); ++i)
      I(machines_[i].bus) += machine_norton(machines_[i].params, ms[i]).current;
    for (std::size_t k = 0; k < gfms_.size(); ++k) {
      GfmFrame f = state_.frames[k];
      f.angle += phase[k];
      I(gfms_[k].bus) += gfm_network_interface(gfms_[k].params, f, gs[k]).current;
    }
    return I;
  }

  CVector solve(const std::vector<MachineState>& ms, const std::vector<GfmState>& gs,
                const std::vector<double>& phase, double t) {
    const auto t0 = Clock::now();
    CVector I = injections(ms, gs, phase);
    CVector V;
    if (solver_) {
      RelaxationResult r = solver_->solve(I, V, t);
      iterations_ = std::max(iterations_, r.iterations);
      mismatch_.push_back(r.mismatch);
    } else {
      V = lu_.solve(I);
      iterations_ = std::max(iterations_, 1);
    }
    network_seconds_ += seconds_since(t0);
    return V;
  }

  std::vector<MachineUnit> machines_;
  std::vector<GfmUnit> gfms_;
  NetworkModel net_;
  SystemState state_;
  IntegratorKind kind_;
  double substep_;
  double coupling_tol_;
  std::optional<DecomposedSolver> solver_;
  ComplexLu lu_;
  CMatrix Z_gfm_;
  std::vector<std::tuple<double, std::size_t, Eigen::Matrix2d>> ramp_cache_;
  int iterations_ = 0;
  bool clamped_ = false;
  double rkf_error_ = 0.0;
  double network_seconds_ = 0.0;
  std::vector<std::vector<double>> mismatch_;
};

EdgeRef to_edge(const PowerFlowCase& c, const BusPair& p) {
  EdgeRef e{c.bus_index(p.a), c.bus_index(p.b)};
  if (e.a < 0 || e.b < 0)
    throw Error(ErrorCode::partition, "invalid edge " + std::to_string(p.a) + "-" + std::to_string(p.b) +
                                          ": unknown bus");
  return e;
}

}  // namespace

InitialState initialize(const ScenarioSpec& spec, const PowerFlowCase& c) {
  spec.validate();
  PowerFlowSolution pf = solve_power_flow(c);
  NetworkModel net(c);
  for (const auto& b : c.buses)
    if (b.load != Complex{}) net.set_load(b.id, std::conj(b.load) / std::norm(pf.V(b.id)));

  std::vector<MachineUnit> machines;
  std::vector<GfmUnit> gfms;
  std::vector<MachineState> ms;
  for (const auto& g : c.generators) {
    const ParamBlock& blk = c.block(g.key);
    const int number = c.buses[static_cast<std::size_t>(g.bus)].number;
    const Complex S_gen = pf.S(g.bus) + c.buses[static_cast<std::size_t>(g.bus)].load;
    if (g.kind == DeviceKind::machine) {
      MachineUnit u{g.bus, g.key, machine_params_from_block(blk, c.frequency)};
      const Complex V = pf.V(g.bus);
      const Complex I = std::conj(S_gen / V);
      const Complex E = V + Complex(0.0, u.params.xd_p) * I;
      MachineState s;
      s.delta = std::arg(E);
      s.E_p = std::abs(E);
      s.omega = u.params.omega_s;
      net.add_device_shunt(g.bus, machine_norton(u.params, s).shunt);
      machines.push_back(u);
      ms.push_back(s);
    } else {
      GfmDefinition def = gfm_definition_from_block(blk, c.frequency, c.base_mva);
      GfmUnit u;
      u.bus = g.bus;
      u.key = g.key;
      u.params = aggregate(def.aggregate, def.module);
      u.ss = gfm_build_state_space(u.params);
      const Complex S_op = 1.5 * Complex(u.params.op.v_Cd0, u.params.op.v_Cq0) *
                           std::conj(Complex(u.params.op.i_gd0, u.params.op.i_gq0)) / (c.base_mva * 1e6);
      if (std::abs(S_gen - S_op) > 1e-6)
        throw Error(ErrorCode::steady_state, "gfm " + device_label(g.key, number) +
                                                 ": power-flow injection does not match its operating point");
      gfms.push_back(u);
    }
  }

  AdmittanceMatrix Y = net.admittance();
  CVector I = CVector::Zero(static_cast<Eigen::Index>(c.buses.size()));
  for (std::size_t i = 0; i < machines.size(); ++i) I(machines[i].bus) += machine_norton(machines[i].params, ms[i]).current;
  CVector V = monolithic_solve(Y, I);

  std::vector<std::pair<std::string, double>> residuals;
  for (std::size_t i = 0; i < machines.size(); ++i) {
    MachineParams& p = machines[i].params;
    const double Pe = machine_electrical_power(p, ms[i], V(machines[i].bus));
    ms[i].P_m = Pe;
    if (std::isnan(p.P_m_ref)) p.P_m_ref = Pe;
    SwingRates r = swing_derivative(p, ms[i], Pe);
    residuals.emplace_back(machines[i].key,
                           std::max({std::abs(r.d_delta), std::abs(r.d_omega), std::abs(r.d_P_m)}));
  }
  std::vector<GfmFrame> frames;
  std::vector<GfmState> xs;
  for (const auto& g : gfms) {
    GfmFrame f;
    f.S_base = c.base_mva * 1e6;
    f.scale = std::abs(gfm_grid_voltage(g.params)) / std::abs(V(g.bus));
    f.angle = std::arg(V(g.bus)) - std::arg(gfm_grid_voltage(g.params));
    GfmState x = GfmState::Zero();
    GfmStateSpace pu = gfm_per_unit(g.ss, g.params);
    GfmInput u = gfm_input_from_bus(g.params, f, V(g.bus));
    GfmInput u_pu = u;
    u_pu(0) /= g.params.v_peak();
    u_pu(1) /= g.params.v_peak();
    u_pu(2) /= g.params.S_rated;
    u_pu(3) /= g.params.S_rated;
    residuals.emplace_back(g.key, (pu.A * x + pu.B * u_pu).cwiseAbs().maxCoeff());
    frames.push_back(f);
    xs.push_back(x);
  }
  for (const auto& [key, r] : residuals)
    if (!(r < kSteadyStateTolerance))
      throw Error(ErrorCode::steady_state, "steady-state check failed for device '" + key +
                                               "': max |derivative| = " + format_double(r));

  InitialState init{machines, gfms, net, SystemState{}, pf, residuals};
  init.state.t = 0.0;
  init.state.machines = ms;
  init.state.gfm = xs;
  init.state.frames = frames;
  init.state.V = V;
  return init;
}

RunOutput run(const ScenarioSpec& spec_in, const PowerFlowCase& c, const RunOptions& options) {
  ScenarioSpec spec = spec_in;
  if (options.sigma) spec.sigma = *options.sigma;
  if (options.conductance) spec.conductance = *options.conductance;
  if (options.integrator) spec.integrator = *options.integrator;
  if (options.benchmark) spec.benchmark = *options.benchmark;
  if (options.schedule) spec.schedule = *options.schedule;
  spec.validate();

  RunOutput out;
  const auto t_init = Clock::now();
  std::vector<EdgeRef> sys_cuts, dom_cuts;
  for (const auto& p : spec.subsystem_cuts) sys_cuts.push_back(to_edge(c, p));
  for (const auto& p : spec.subdomain_cuts) dom_cuts.push_back(to_edge(c, p));
  PartitionPlan plan = make_partition(c, sys_cuts, dom_cuts);
  std::vector<ResolvedEvent> events;
  for (const auto& e : spec.events) events.push_back(resolve_event(c, e));

  InitialState init = initialize(spec, c);
  WorkerPool pool(options.workers);
  Path dec(init, c, spec, spec.integrator, plan, spec.sigma, &pool);
  std::optional<Path> bench;
  if (spec.benchmark) bench.emplace(init, c, spec, spec.integrator, std::nullopt, spec.sigma, nullptr);
  out.log.wall.initialize = seconds_since(t_init);

  TimeSeriesResult& res = out.result;
  for (const auto& b : c.buses) res.bus_numbers.push_back(b.number);
  for (const auto& m : init.machines) res.machine_buses.push_back(c.buses[static_cast<std::size_t>(m.bus)].number);
  for (const auto& g : init.gfms) res.gfm_buses.push_back(c.buses[static_cast<std::size_t>(g.bus)].number);
  if (bench) res.benchmark_V.emplace();
  std::vector<double> angle0;
  for (const auto& f : init.state.frames) angle0.push_back(f.angle);

  auto record = [&](double h) {
    const SystemState& s = dec.state();
    res.times.push_back(s.t);
    res.bus_V.push_back(s.V);
    res.machines.push_back(s.machines);
    std::vector<GfmState> gx;
    std::vector<double> gw;
    for (std::size_t k = 0; k < s.gfm.size(); ++k) {
      GfmState x = s.gfm[k];
      x(gfm::theta_ps) += s.frames[k].angle - angle0[k];
      gx.push_back(x);
      gw.push_back(gfm_frequency(init.gfms[k].params, s.gfm[k]));
    }
    res.gfm.push_back(gx);
    res.gfm_omega.push_back(gw);
    res.iterations.push_back(dec.iterations());
    res.clamped.push_back(dec.clamped() ? 1 : 0);
    if (bench) res.benchmark_V->push_back(bench->state().V);
    StepLog log;
    log.t = s.t;
    log.h = h;
    log.iterations = dec.iterations();
    log.mismatch = dec.mismatch();
    log.rkf_error = dec.rkf_error();
    out.log.total_iterations += dec.iterations();
    out.log.steps.push_back(std::move(log));
  };

  auto timed = [&](auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    return seconds_since(t0);
  };

  dec.begin_row();
  dec.resolve();
  if (bench) {
    bench->begin_row();
    bench->resolve();
  }
  record(0.0);

  double t = 0.0;
  double last_disturbance = -std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  constexpr double kTimeEps = 1e-9;
  for (;;) {
    if (next < events.size() && events[next].event.time <= t + kTimeEps) {
      dec.begin_row();
      if (bench) bench->begin_row();
      std::string context;
      while (next < events.size() && events[next].event.time <= t + kTimeEps) {
        const ResolvedEvent& e = events[next];
        apply_event(dec.network(), e, dec.state().V, spec.fault_shunt);
        context += std::string(context.empty() ? "" : ", ") + event_kind_name(e.event.kind) + " at t = " +
                   format_double(e.event.time);
        ++next;
      }
      last_disturbance = t;
      dec.refactor(context);
      out.log.wall.devices += timed([&] { dec.resolve(); });
      if (bench) {
        bench->set_network(dec.network());
        out.log.wall.benchmark += timed([&] {
          bench->refactor(context);
          bench->resolve();
        });
      }
      record(0.0);
    }
    if (t >= spec.horizon - kTimeEps) break;

    std::optional<double> next_time;
    if (next < events.size()) next_time = events[next].event.time;
    double h = step_size_at(spec.schedule, t, last_disturbance, next_time);
    // Snap to a nanosecond grid so repeated additions do not drift.
    double t_end = std::round((t + h) * 1e9) / 1e9;
    if (next_time && h == *next_time - t) t_end = *next_time;
    h = t_end - t;
    if (t_end > spec.horizon - kTimeEps) {
      h = spec.horizon - t;
      t_end = spec.horizon;
    }
    dec.begin_row();
    out.log.wall.devices += timed([&] { dec.step(h, t_end); });
    if (bench) {
      bench->begin_row();
      out.log.wall.benchmark += timed([&] { bench->step(h, t_end); });
    }
    t = t_end;
    record(h);
  }
  out.log.wall.network = dec.network_seconds();
  out.log.wall.devices = std::max(0.0, out.log.wall.devices - out.log.wall.network);
  return out;
}

RunOutput run(const ScenarioSpec& spec, const RunOptions& options) {
  PowerFlowCase c = load_case(resolve_data_file(spec.case_path.string(), ".case"));
  return run(spec, c, options);
}

DeviationReport compare_to_benchmark(const TimeSeriesResult& r) {
  if (!r.benchmark_V) throw Error(ErrorCode::missing_benchmark, "result has no benchmark trace");
  DeviationReport rep;
  rep.bus_numbers = r.bus_numbers;
  const std::size_t n = r.bus_numbers.size();
  rep.per_bus_max.assign(n, 0.0);
  rep.per_bus_time.assign(n, 0.0);
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    for (std::size_t b = 0; b < n; ++b) {
      double d = std::abs(r.bus_V[k](static_cast<Eigen::Index>(b)) - (*r.benchmark_V)[k](static_cast<Eigen::Index>(b)));
      if (d > rep.per_bus_max[b]) {
        rep.per_bus_max[b] = d;
        rep.per_bus_time[b] = r.times[k];
      }
      if (d > rep.max) {
        rep.max = d;
        rep.time_of_max = r.times[k];
        rep.bus_of_max = r.bus_numbers[b];
      }
    }
  }
  return rep;
}

}  // namespace gridsplit
