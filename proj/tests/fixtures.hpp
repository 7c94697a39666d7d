#ifndef ETREG_TESTS_FIXTURES_HPP
#define ETREG_TESTS_FIXTURES_HPP

#include "etreg/scenario_io.hpp"

#include <string>

namespace fixtures {

inline std::string scenario_path(const std::string& name) { return std::string(ETREG_SCENARIO_DIR) + "/" + name; }

/// Bundled benchmark with delta = 0.02 (or 0.002 when `fine` is set).
inline etreg::ScenarioConfig benchmark(bool fine = false) {
    return etreg::parse_scenario(scenario_path(fine ? "lorenz_delta0002.json" : "lorenz_delta002.json"));
}

}  // namespace fixtures

#endif
