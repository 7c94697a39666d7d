#ifndef ETREG_SCENARIO_HPP
#define ETREG_SCENARIO_HPP

#include "etreg/internal_model.hpp"
#include "etreg/linalg.hpp"
#include "etreg/topology.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace etreg {

struct AgentSpec {
    Vec w;
    Vec z0;
    double y0 = 0.0;
    Vec eta0;
    SteadyStatePolynomial polynomial;
    Mat M;
    Vec Q;
};

struct SimSettings {
    double t_end = 10.0;
    double h = 1e-3;
    double tol_event = 1e-9;  // trigger-function resolution
    double tol_time = 1e-10;  // event-time resolution
    double tail_window = 2.0;
    std::size_t stride = 1;
    std::size_t max_events_per_agent = 1000000;
    double divergence_bound = 1e9;
    double audit_tolerance = 1e-6;
};

/// Fully resolved description of one closed-loop run. M and Q are always
/// explicit here; shorthand forms in scenario files are expanded on parse.
struct ScenarioConfig {
    std::string name;
    std::size_t n_followers = 0;
    std::vector<Edge> edges;
    Mat S;
    Vec v0;
    std::string plant_kind = "lorenz";
    Vec uncertainty_bound;
    std::vector<AgentSpec> agents;
    double sigma = 0.0;
    double delta = 0.0;
    double a = 1.0;
    std::vector<double> omega{1.0};
    SimSettings sim;
};

}  // namespace etreg

#endif  // ETREG_SCENARIO_HPP
