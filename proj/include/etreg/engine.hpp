#ifndef ETREG_ENGINE_HPP
#define ETREG_ENGINE_HPP

#include "etreg/errors.hpp"
#include "etreg/etc_law.hpp"
#include "etreg/exosystem.hpp"
#include "etreg/internal_model.hpp"
#include "etreg/plant.hpp"
#include "etreg/scenario.hpp"
#include "etreg/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace etreg {

// ---------------------------------------------------------------------------
// Assumption checks and synthesis
// ---------------------------------------------------------------------------

struct AssumptionCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Structural checks on a parsed scenario: neutral stability of the leader,
/// root condition of each steady-state polynomial, gain positivity over the
/// uncertainty box, leader reachability, and (M, Q) admissibility.
inline std::vector<AssumptionCheck> check_assumptions(const ScenarioConfig& cfg) {
    std::vector<AssumptionCheck> out;

    const bool neutral = check_neutral_stability(cfg.S);
    out.push_back({"exosystem neutrally stable", neutral,
                   neutral ? "eigenvalues of S are semi-simple on the imaginary axis"
                           : "S has an eigenvalue off the imaginary axis or is not semi-simple"});

    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        const auto& agent = cfg.agents[i];
        const std::string tag = "agent " + std::to_string(i + 1);
        const bool roots = has_simple_imaginary_roots(agent.polynomial);
        out.push_back({tag + " steady-state polynomial", roots,
                       roots ? "distinct roots with zero real part" : "roots not distinct and purely imaginary"});
        const bool pair = check_pair(agent.M, agent.Q);
        out.push_back({tag + " internal model pair", pair,
                       pair ? "M Hurwitz, (M, Q) controllable" : "M not Hurwitz or (M, Q) uncontrollable"});
    }

    const auto plant = make_plant(cfg.plant_kind);
    const UncertaintyBox box{cfg.uncertainty_bound};
    try {
        const auto bounds = plant->gain_bounds(box);
        out.push_back({"input gain positive", true,
                       "b_m = " + std::to_string(bounds.b_m) + ", b_M = " + std::to_string(bounds.b_M)});
    } catch (const Error& e) {
        out.push_back({"input gain positive", false, e.what()});
    }
    const auto issues = plant->admissibility_issues(box);
    std::string joined;
    for (const auto& s : issues) joined += (joined.empty() ? "" : "; ") + s;
    out.push_back({"plant parameters admissible", issues.empty(), issues.empty() ? "sign conditions hold" : joined});

    const LeaderFollowerGraph graph(cfg.n_followers, cfg.edges);
    const auto missing = unreachable_followers(graph);
    std::string detail = "every follower is reachable from the leader (node 0)";
    if (!missing.empty()) {
        detail = "leader reachability assumption violated: follower node(s)";
        for (auto m : missing) detail += " " + std::to_string(m);
        detail += " not reachable from node 0";
    }
    out.push_back({"leader reachability", missing.empty(), detail});
    return out;
}

/// Everything synthesized from a scenario before integration starts.
struct ClosedLoop {
    LeaderFollowerGraph graph;
    Exosystem exosystem;
    std::shared_ptr<const Plant> plant;
    UncertaintyBox box;
    GainBounds bounds;
    CouplingMatrix coupling;
    std::vector<InternalModel> models;
    TriggerParams params;
    GainReport gains;
};

/// Validates the scenario's structural assumptions and synthesizes the
/// coupling, weighting and internal models. Failures are reported as a
/// ValidationError listing every violated condition.
inline ClosedLoop prepare(const ScenarioConfig& cfg) {
    std::vector<ValidationIssue> issues;
    for (const auto& check : check_assumptions(cfg)) {
        if (check.passed) continue;
        std::string path = "scenario";
        if (check.name == "leader reachability") path = "graph.edges";
        else if (check.name == "exosystem neutrally stable") path = "exosystem.S";
        else if (check.name.rfind("agent ", 0) == 0) {
            const auto idx = std::stoul(check.name.substr(6)) - 1;
            path = "agents[" + std::to_string(idx) + "].internal_model";
        } else path = "plant";
        issues.push_back({path, check.name + ": " + check.detail});
    }
    const auto plant = make_plant(cfg.plant_kind);
    const UncertaintyBox box{cfg.uncertainty_bound};
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        if (!box.contains(cfg.agents[i].w)) {
            issues.push_back({"agents[" + std::to_string(i) + "].w", "uncertainty outside the declared box"});
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));

    LeaderFollowerGraph graph(cfg.n_followers, cfg.edges);
    const auto bounds = plant->gain_bounds(box);
    auto coupling = make_coupling(graph, bounds.b_m, bounds.b_M);
    std::vector<InternalModel> models;
    models.reserve(cfg.agents.size());
    for (const auto& agent : cfg.agents) {
        models.push_back(synthesize_internal_model(agent.polynomial, agent.M, agent.Q));
    }
    TriggerParams params{cfg.sigma, cfg.delta, GainFunction(cfg.a, cfg.omega)};
    const auto gains = verify_gains(cfg.a, cfg.sigma, coupling.lambdas);
    return ClosedLoop{std::move(graph), Exosystem(cfg.S, cfg.v0), plant, box, bounds, std::move(coupling),
                      std::move(models), std::move(params), gains};
}

// ---------------------------------------------------------------------------
// Event location
// ---------------------------------------------------------------------------

/// Earliest t in (t_lo, t_hi] with g(t) >= 0, by bisection, assuming
/// g(t_lo) < 0 <= g(t_hi). Stops once the bracket is narrower than tol_time
/// or the upper end satisfies 0 <= g <= tol_g. Returns t_lo if g(t_lo) >= 0.
template <class TriggerFn>
double locate_crossing(TriggerFn&& g, double t_lo, double t_hi, double tol_g, double tol_time) {
    if (g(t_lo) >= 0.0) return t_lo;
    double g_hi = g(t_hi);
    if (g_hi < 0.0) throw Error(ErrorKind::NoSignChange, "trigger function does not change sign on the interval");
    double lo = t_lo;
    double hi = t_hi;
    while (hi - lo > tol_time && g_hi > tol_g) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm >= 0.0) {
            hi = mid;
            g_hi = gm;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Continuous dynamics
// ---------------------------------------------------------------------------

struct AgentState {
    Vec z;
    double y = 0.0;
    Vec eta;
};

/// Advances one agent by dt <= h with its control frozen: RK4 on the plant,
/// exact propagation of the compensator, leader evaluated in closed form.
inline AgentState step_agent(const Plant& plant, const Vec& w, const EtaPropagator& eta_prop,
                             const Exosystem& exo, const AgentState& s, double u, double t, double dt) {
    if (dt == 0.0) return s;
    const auto n = s.z.size();
    const double b = plant.b(w);
    auto rhs = [&](const Vec& x, const Vec& v) {
        const Vec z = x.head(n);
        const double y = x(n);
        Vec dx(n + 1);
        dx.head(n) = plant.f(z, y, v, w);
        dx(n) = plant.g(z, y, v, w) + b * u;
        return dx;
    };
    Vec x(n + 1);
    x << s.z, s.y;
    const Vec v0 = exo.propagate(t);
    const Vec vm = exo.propagate(t + 0.5 * dt);
    const Vec v1 = exo.propagate(t + dt);
    const Vec k1 = rhs(x, v0);
    const Vec k2 = rhs(x + 0.5 * dt * k1, vm);
    const Vec k3 = rhs(x + 0.5 * dt * k2, vm);
    const Vec k4 = rhs(x + dt * k3, v1);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {x.head(n), x(n), eta_prop.advance(s.eta, u, dt)};
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct EventRecord {
    double t = 0.0;
    double e_v = 0.0;
    double u = 0.0;
};

struct AgentSeries {
    std::vector<double> e;
    std::vector<double> e_v;
    std::vector<double> u;
    std::vector<double> g;
    std::vector<std::uint32_t> triggered;  // events since the previous sample
};

struct SimTrace {
    std::vector<double> t;
    std::vector<AgentSeries> agents;
    std::vector<std::vector<EventRecord>> events;
    double t_end = 0.0;
    double tail_window = 0.0;
    /// Largest trigger-function value seen at any integration step end
    /// (denser than the stored samples when stride > 1).
    double max_step_trigger_value = -std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

/// Hybrid closed-loop simulation of all followers under the event-triggered
/// law. Single-threaded and deterministic: agents are processed in index
/// order and simultaneous events (same refined time) fire together.
class Simulator {
public:
    explicit Simulator(const ScenarioConfig& cfg) : cfg_(cfg), loop_(prepare(cfg)) {
        for (const auto& m : loop_.models) props_.emplace_back(m);
    }

    const ClosedLoop& closed_loop() const noexcept { return loop_; }

    SimTrace run() {
        const auto n = cfg_.agents.size();
        const auto& sim = cfg_.sim;

        states_.clear();
        for (const auto& a : cfg_.agents) states_.push_back({a.z0, a.y0, a.eta0});
        held_.assign(n, HeldSamples{});
        u_.assign(n, 0.0);
        pending_.assign(n, 0);

        SimTrace trace;
        trace.t_end = sim.t_end;
        trace.tail_window = sim.tail_window;
        trace.agents.assign(n, AgentSeries{});
        trace.events.assign(n, {});

        // every agent samples at t = 0
        {
            const Vec ev = virtual_errors(states_, 0.0);
            for (std::size_t i = 0; i < n; ++i) fire(i, 0.0, ev(static_cast<Eigen::Index>(i)), trace);
        }
        record(0.0, trace);

        const auto steps = static_cast<std::size_t>(std::ceil(sim.t_end / sim.h - 1e-9));
        for (std::size_t k = 1; k <= steps; ++k) {
            const double t_prev = std::min(static_cast<double>(k - 1) * sim.h, sim.t_end);
            const double t_next = std::min(static_cast<double>(k) * sim.h, sim.t_end);
            advance_with_events(t_prev, t_next, trace);
            check_divergence(t_next);
            const Vec ev = virtual_errors(states_, t_next);
            for (std::size_t i = 0; i < n; ++i) {
                trace.max_step_trigger_value =
                    std::max(trace.max_step_trigger_value, trigger_at(i, states_, ev));
            }
            if (k % sim.stride == 0 || k == steps) record(t_next, trace);
        }
        return trace;
    }

    /// All agents advanced by dt with the current held controls.
    std::vector<AgentState> step_between_events(const std::vector<AgentState>& states, double t, double dt) const {
        std::vector<AgentState> out;
        out.reserve(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) {
            out.push_back(step_agent(*loop_.plant, cfg_.agents[i].w, props_[i], loop_.exosystem, states[i], u_[i], t,
                                     dt));
        }
        return out;
    }

private:
    double leader_output(double t) const {
        const Vec v = loop_.exosystem.propagate(t);
        return loop_.plant->q(v, Vec::Zero(loop_.plant->uncertainty_dim()));
    }

    Vec virtual_errors(const std::vector<AgentState>& states, double t) const {
        std::vector<double> outputs(states.size() + 1);
        outputs[0] = leader_output(t);
        for (std::size_t i = 0; i < states.size(); ++i) outputs[i + 1] = states[i].y;
        return virtual_error(outputs, loop_.graph);
    }

    double trigger_at(std::size_t i, const std::vector<AgentState>& states, const Vec& ev) const {
        return trigger_value(held_[i], ev(static_cast<Eigen::Index>(i)), states[i].eta, loop_.models[i].Psi,
                             loop_.params);
    }

    void fire(std::size_t i, double t, double e_v, SimTrace& trace) {
        auto& held = held_[i];
        if (held.count > 0) {
            const double gap = t - held.t_k;
            if (gap < cfg_.sim.h * 1e-6) {
                throw Error(ErrorKind::ZenoSuspected, "agent " + std::to_string(i + 1) + " re-triggered after " +
                                                          std::to_string(gap) + " s at t = " + std::to_string(t));
            }
        }
        if (held.count >= cfg_.sim.max_events_per_agent) {
            throw Error(ErrorKind::ZenoSuspected,
                        "agent " + std::to_string(i + 1) + " exceeded the event budget at t = " + std::to_string(t));
        }
        held.update(t, e_v, states_[i].eta, loop_.params.rho);
        u_[i] = control_output(held, loop_.models[i].Psi);
        trace.events[i].push_back({t, e_v, u_[i]});
        ++pending_[i];
    }

    void advance_with_events(double t_from, double t_to, SimTrace& trace) {
        const auto n = states_.size();
        const auto& sim = cfg_.sim;
        double t_cur = t_from;
        while (t_cur < t_to) {
            const double dt = t_to - t_cur;
            auto trial = step_between_events(states_, t_cur, dt);
            const Vec ev_end = virtual_errors(trial, t_cur + dt);
            std::vector<std::size_t> candidates;
            for (std::size_t i = 0; i < n; ++i) {
                if (trigger_at(i, trial, ev_end) >= 0.0) candidates.push_back(i);
            }
            if (candidates.empty()) {
                states_ = std::move(trial);
                return;
            }

            std::vector<double> tau(n, std::numeric_limits<double>::infinity());
            for (auto i : candidates) {
                auto g = [&](double s) {
                    const auto st = step_between_events(states_, t_cur, s);
                    return trigger_at(i, st, virtual_errors(st, t_cur + s));
                };
                tau[i] = locate_crossing(g, 0.0, dt, sim.tol_event, sim.tol_time);
            }
            const double tau_min = *std::min_element(tau.begin(), tau.end());

            states_ = step_between_events(states_, t_cur, tau_min);
            t_cur = tau_min == dt ? t_to : t_cur + tau_min;
            const Vec ev = virtual_errors(states_, t_cur);
            for (std::size_t i = 0; i < n; ++i) {
                if (tau[i] <= tau_min + sim.tol_time) fire(i, t_cur, ev(static_cast<Eigen::Index>(i)), trace);
            }
        }
    }

    void check_divergence(double t) const {
        for (std::size_t i = 0; i < states_.size(); ++i) {
            const auto& s = states_[i];
            const double mag = std::max({s.z.cwiseAbs().maxCoeff(), std::abs(s.y), s.eta.cwiseAbs().maxCoeff()});
            if (!std::isfinite(mag) || mag > cfg_.sim.divergence_bound) {
                throw Error(ErrorKind::DivergenceDetected,
                            "agent " + std::to_string(i + 1) + " state left the bound at t = " + std::to_string(t));
            }
        }
    }

    void record(double t, SimTrace& trace) {
        trace.t.push_back(t);
        const Vec ev = virtual_errors(states_, t);
        const double y0 = leader_output(t);
        for (std::size_t i = 0; i < states_.size(); ++i) {
            auto& series = trace.agents[i];
            series.e.push_back(states_[i].y - y0);
            series.e_v.push_back(ev(static_cast<Eigen::Index>(i)));
            series.u.push_back(u_[i]);
            series.g.push_back(trigger_at(i, states_, ev));
            series.triggered.push_back(pending_[i]);
            pending_[i] = 0;
        }
    }

    ScenarioConfig cfg_;
    ClosedLoop loop_;
    std::vector<EtaPropagator> props_;
    std::vector<AgentState> states_;
    std::vector<HeldSamples> held_;
    std::vector<double> u_;
    std::vector<std::uint32_t> pending_;
};

inline SimTrace run(const ScenarioConfig& cfg) { return Simulator(cfg).run(); }

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct AgentSummary {
    std::size_t trigger_count = 0;
    std::optional<double> min_inter_event;
    std::optional<double> mean_inter_event;
    double tail_sup_error = 0.0;
};

struct TraceSummary {
    std::vector<AgentSummary> agents;
    std::optional<double> global_min_inter_event;
    double tail_start = 0.0;
    double audit_max_trigger_value = -std::numeric_limits<double>::infinity();
    double audit_tolerance = 1e-6;
    bool audit_pass = false;
};

/// Event statistics, tail sup-errors over [t_end - tail_window, t_end], and
/// an audit of the held-sample inequality at every stored sample.
inline TraceSummary summarize(const SimTrace& trace, double audit_tolerance = 1e-6) {
    TraceSummary s;
    s.tail_start = trace.t_end - trace.tail_window;
    s.audit_tolerance = audit_tolerance;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        AgentSummary a;
        const auto& ev = trace.events[i];
        a.trigger_count = ev.size();
        if (ev.size() >= 2) {
            double mn = std::numeric_limits<double>::infinity();
            for (std::size_t k = 1; k < ev.size(); ++k) mn = std::min(mn, ev[k].t - ev[k - 1].t);
            a.min_inter_event = mn;
            a.mean_inter_event = (ev.back().t - ev.front().t) / static_cast<double>(ev.size() - 1);
            if (!s.global_min_inter_event || mn < *s.global_min_inter_event) s.global_min_inter_event = mn;
        }
        if (i < trace.agents.size()) {
            const auto& series = trace.agents[i];
            for (std::size_t k = 0; k < trace.t.size(); ++k) {
                if (trace.t[k] >= s.tail_start - 1e-12) a.tail_sup_error = std::max(a.tail_sup_error, std::abs(series.e[k]));
                s.audit_max_trigger_value = std::max(s.audit_max_trigger_value, series.g[k]);
            }
        }
        s.agents.push_back(a);
    }
    s.audit_pass = s.audit_max_trigger_value <= audit_tolerance;
    return s;
}

}  // namespace etreg

#endif  // ETREG_ENGINE_HPP
