#include "etreg/engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace etreg;

TEST(LocateCrossing, LinearMidpoint) {
    const double t = locate_crossing([](double s) { return s - 0.5; }, 0.0, 1.0, 1e-9, 1e-10);
    EXPECT_NEAR(t, 0.5, 1e-9);
    EXPECT_GE(t - 0.5, 0.0);
}

TEST(LocateCrossing, AlreadyFiredAtLowerEnd) {
    EXPECT_EQ(locate_crossing([](double) { return 0.0; }, 0.25, 1.0, 1e-9, 1e-10), 0.25);
}

TEST(LocateCrossing, QuadraticRoot) {
    for (double c : {0.1, 0.37, 0.9}) {
        const double t = locate_crossing([c](double s) { return s * s - c; }, 0.0, 1.0, 1e-9, 1e-10);
        EXPECT_NEAR(t, std::sqrt(c), 1e-9);
    }
}

TEST(LocateCrossing, NoSignChange) {
    try {
        locate_crossing([](double) { return -1.0; }, 0.0, 1.0, 1e-9, 1e-10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoSignChange);
    }
}

namespace {

Vec lorenz_rhs(const Vec& x, const Vec& w, double u) {
    const auto d = lorenz_derivatives(x.head(2), x(2), w, u);
    return (Vec(3) << d.dz1, d.dz2, d.dy).finished();
}

AgentState integrate_agent(const Plant& plant, const Vec& w, const EtaPropagator& prop, const Exosystem& exo,
                           AgentState s, double u, double t_end, double h) {
    const auto steps = static_cast<long>(std::llround(t_end / h));
    for (long k = 0; k < steps; ++k) s = step_agent(plant, w, prop, exo, s, u, static_cast<double>(k) * h, h);
    return s;
}

}  // namespace

TEST(StepAgent, ZeroStepIsIdentity) {
    LorenzPlant plant;
    const EtaPropagator prop(linalg::companion(std::vector<double>{-2, -3}), last_unit_vector(2));
    const Exosystem exo((Mat(2, 2) << 0, 1, -1, 0).finished(), Vec::Zero(2));
    const AgentState s{(Vec(2) << 0.1, 0.2).finished(), 0.3, (Vec(2) << 1, 2).finished()};
    const auto out = step_agent(plant, Vec::Zero(4), prop, exo, s, 1.5, 0.0, 0.0);
    EXPECT_EQ(out.z, s.z);
    EXPECT_EQ(out.y, s.y);
    EXPECT_EQ(out.eta, s.eta);
}

TEST(StepAgent, MatchesFineRk4Oracle) {
    LorenzPlant plant;
    const EtaPropagator prop(linalg::companion(std::vector<double>{-4, -12, -13, -6}), last_unit_vector(4));
    const Exosystem exo((Mat(2, 2) << 0, 1, -1, 0).finished(), Vec::Zero(2));
    const Vec w = Vec::Zero(4);
    const AgentState s0{Vec::Zero(2), 1.0, Vec::Zero(4)};
    const auto s = integrate_agent(plant, w, prop, exo, s0, 0.0, 0.1, 1e-3);
    const Vec ref = oracle::rk4([&](double, const Vec& x) -> Vec { return lorenz_rhs(x, w, 0.0); },
                                (Vec(3) << 0, 0, 1).finished(), 0.0, 0.1, 1e-5);
    EXPECT_NEAR(s.z(0), ref(0), 1e-8);
    EXPECT_NEAR(s.z(1), ref(1), 1e-8);
    EXPECT_NEAR(s.y, ref(2), 1e-8);
}

TEST(StepAgent, FourthOrderOnStepHalving) {
    LorenzPlant plant;
    const EtaPropagator prop(linalg::companion(std::vector<double>{-4, -12, -13, -6}), last_unit_vector(4));
    const Exosystem exo((Mat(2, 2) << 0, 1, -1, 0).finished(), (Vec(2) << 0.88, -0.48).finished());
    const Vec w = (Vec(4) << 0.4, -0.7, 0.6, -0.2).finished();
    const AgentState s0{(Vec(2) << 1.38, 0.22).finished(), 1.47, Vec::Zero(4)};
    auto terminal = [&](double h) {
        const auto s = integrate_agent(plant, w, prop, exo, s0, -2.0, 1.0, h);
        return (Vec(3) << s.z, s.y).finished();
    };
    const Vec a = terminal(1e-2), b = terminal(5e-3), c = terminal(2.5e-3);
    const double order = std::log2((a - b).norm() / (b - c).norm());
    EXPECT_GE(order, 3.5);
}

TEST(Simulator, OriginIsInvariant) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 1.0;
    cfg.v0.setZero();
    for (auto& a : cfg.agents) {
        a.z0.setZero();
        a.y0 = 0;
        a.eta0.setZero();
    }
    const auto trace = run(cfg);
    for (std::size_t i = 0; i < trace.agents.size(); ++i) {
        EXPECT_EQ(trace.events[i].size(), 1u);
        for (double e : trace.agents[i].e) EXPECT_EQ(e, 0.0);
        for (double u : trace.agents[i].u) EXPECT_EQ(u, 0.0);
    }
}

TEST(Simulator, ShortBenchmarkInvariants) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 2.0;
    Simulator sim(cfg);
    const auto trace = sim.run();
    const auto summary = summarize(trace);
    ASSERT_EQ(trace.t.size(), 2001u);
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const auto& ev = trace.events[i];
        ASSERT_FALSE(ev.empty());
        EXPECT_EQ(ev.front().t, 0.0);
        for (std::size_t k = 1; k < ev.size(); ++k) EXPECT_GT(ev[k].t, ev[k - 1].t);

        // u is piecewise constant and only changes at logged events
        const auto& series = trace.agents[i];
        std::size_t sum = 0;
        for (auto c : series.triggered) sum += c;
        EXPECT_EQ(sum, ev.size());
        for (std::size_t k = 1; k < trace.t.size(); ++k) {
            if (series.triggered[k] == 0) EXPECT_EQ(series.u[k], series.u[k - 1]);
        }
        // the held control equals the value logged with the most recent event
        std::size_t next = 0;
        for (std::size_t k = 0; k < trace.t.size(); ++k) {
            while (next < ev.size() && ev[next].t <= trace.t[k]) ++next;
            EXPECT_EQ(series.u[k], ev[next - 1].u);
        }
        EXPECT_EQ(summary.agents[i].trigger_count, ev.size());
        ASSERT_TRUE(summary.agents[i].min_inter_event.has_value());
        EXPECT_GT(*summary.agents[i].min_inter_event, 0.0);
    }
    EXPECT_TRUE(summary.audit_pass);
    EXPECT_LE(trace.max_step_trigger_value, 1e-6);
}

TEST(Simulator, EventResetsTriggerFunction) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 0.5;
    const auto trace = run(cfg);
    // At a sample coinciding with an event the trigger function is the fresh
    // value -sigma vartheta^2 - delta.
    for (std::size_t i = 0; i < trace.agents.size(); ++i) {
        const double theta = vartheta(trace.agents[i].e_v[0], GainFunction(cfg.a, cfg.omega));
        EXPECT_NEAR(trace.agents[i].g[0], -cfg.sigma * theta * theta - cfg.delta, 1e-12);
    }
}

TEST(Simulator, Deterministic) {
    auto cfg = fixtures::benchmark(true);
    cfg.sim.t_end = 1.5;
    const auto a = run(cfg);
    const auto b = run(cfg);
    ASSERT_EQ(a.t, b.t);
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
        EXPECT_EQ(a.agents[i].e, b.agents[i].e);
        EXPECT_EQ(a.agents[i].g, b.agents[i].g);
        ASSERT_EQ(a.events[i].size(), b.events[i].size());
        for (std::size_t k = 0; k < a.events[i].size(); ++k) EXPECT_EQ(a.events[i][k].t, b.events[i][k].t);
    }
}

TEST(Simulator, StrideThinsSamples) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 1.0;
    cfg.sim.stride = 10;
    const auto trace = run(cfg);
    EXPECT_EQ(trace.t.size(), 101u);
    std::size_t sum = 0;
    for (auto c : trace.agents[1].triggered) sum += c;
    EXPECT_EQ(sum, trace.events[1].size());
}

TEST(Simulator, EventBudgetRaisesZeno) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 2.0;
    cfg.sim.max_events_per_agent = 3;
    try {
        run(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZenoSuspected);
        EXPECT_TRUE(e.is_runtime_failure());
    }
}

TEST(Simulator, DivergenceGuard) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 1.0;
    cfg.sim.divergence_bound = 1.0;
    try {
        run(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DivergenceDetected);
    }
}

TEST(Simulator, UnreachableGraphRejected) {
    auto cfg = fixtures::benchmark();
    cfg.edges = {{0, 1}, {1, 2}, {0, 3}};
    try {
        Simulator sim(cfg);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(e.has_path_prefix("graph.edges"));
        EXPECT_NE(std::string(e.what()).find("reachab"), std::string::npos);
    }
}

TEST(Summarize, EventStatistics) {
    SimTrace trace;
    trace.t_end = 1.0;
    trace.tail_window = 0.5;
    trace.t = {0.0, 0.5, 1.0};
    trace.agents.resize(1);
    trace.agents[0].e = {1.0, -0.3, 0.2};
    trace.agents[0].g = {-1, -1, -1};
    trace.events = {{{0.0, 0, 0}, {0.1, 0, 0}, {0.3, 0, 0}}};
    const auto s = summarize(trace);
    EXPECT_EQ(s.agents[0].trigger_count, 3u);
    EXPECT_NEAR(*s.agents[0].min_inter_event, 0.1, 1e-15);
    EXPECT_NEAR(*s.agents[0].mean_inter_event, 0.15, 1e-15);
    EXPECT_DOUBLE_EQ(s.agents[0].tail_sup_error, 0.3);
    EXPECT_TRUE(s.audit_pass);
}
