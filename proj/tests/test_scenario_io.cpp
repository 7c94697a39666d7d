#include "etreg/scenario_io.hpp"
#include "etreg/trace_io.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace etreg;
using nlohmann::json;

namespace {

json benchmark_doc() {
    std::ifstream in(fixtures::scenario_path("lorenz_delta002.json"));
    return json::parse(in);
}

ValidationError expect_invalid(const json& doc) {
    try {
        scenario_from_json(doc);
    } catch (const ValidationError& e) {
        return e;
    }
    ADD_FAILURE() << "scenario unexpectedly valid";
    return ValidationError({});
}

}  // namespace

TEST(ParseScenario, BundledBenchmark) {
    const auto cfg = fixtures::benchmark();
    EXPECT_EQ(cfg.n_followers, 4u);
    EXPECT_EQ(cfg.agents.size(), 4u);
    EXPECT_EQ(cfg.sigma, 0.01);
    EXPECT_EQ(cfg.delta, 0.02);
    EXPECT_EQ(cfg.a, 10.0);
    EXPECT_EQ(cfg.agents[0].w(1), -0.7);
    EXPECT_EQ(cfg.agents[3].eta0(3), 1.53);
    EXPECT_EQ(cfg.agents[2].y0, -0.04);
    EXPECT_EQ(cfg.v0(0), 0.88);
    EXPECT_EQ(fixtures::benchmark(true).delta, 0.002);
}

TEST(ParseScenario, ZeroSigmaRejected) {
    auto doc = benchmark_doc();
    doc["trigger"]["sigma"] = 0;
    EXPECT_TRUE(expect_invalid(doc).has_path_prefix("trigger.sigma"));
}

TEST(ParseScenario, EdgeOutOfRange) {
    auto doc = benchmark_doc();
    doc["graph"]["edges"].push_back({5, 1});
    EXPECT_TRUE(expect_invalid(doc).has_path_prefix("graph.edges"));
}

TEST(ParseScenario, ReportsEveryIssue) {
    auto doc = benchmark_doc();
    doc["trigger"]["delta"] = -1;
    doc["sim"]["h"] = 0;
    doc["agents"][1].erase("y0");
    doc["agents"][2]["colour"] = "red";
    doc["schema_version"] = 7;
    const auto err = expect_invalid(doc);
    EXPECT_TRUE(err.has_path_prefix("trigger.delta"));
    EXPECT_TRUE(err.has_path_prefix("sim.h"));
    EXPECT_TRUE(err.has_path_prefix("agents[1].y0"));
    EXPECT_TRUE(err.has_path_prefix("agents[2].colour"));
    EXPECT_TRUE(err.has_path_prefix("schema_version"));
    EXPECT_GE(err.issues().size(), 5u);
}

TEST(ParseScenario, DimensionMismatches) {
    auto doc = benchmark_doc();
    doc["agents"][0]["eta0"] = {1, 2};
    doc["agents"][1]["z0"] = {1, 2, 3};
    doc["agents"].erase(3);
    const auto err = expect_invalid(doc);
    EXPECT_TRUE(err.has_path_prefix("agents[0].eta0"));
    EXPECT_TRUE(err.has_path_prefix("agents[1].z0"));
    EXPECT_TRUE(err.has_path_prefix("agents"));
}

TEST(ParseScenario, MalformedDocument) {
    const auto path = std::filesystem::temp_directory_path() / "etreg_malformed.json";
    std::ofstream(path) << "{ \"schema_version\": 1, ";
    try {
        parse_scenario(path.string());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    }
    EXPECT_THROW(parse_scenario("/nonexistent/scenario.json"), Error);
}

TEST(ParseScenario, InternalModelShorthands) {
    auto doc = benchmark_doc();
    doc["agents"][0]["internal_model"] = {{"polynomial", {-9, 0, -10, 0}}, {"characteristic", {4, 12, 13, 6}}};
    doc["agents"][1]["internal_model"] = {{"polynomial", {-9, 0, -10, 0}}};
    const auto cfg = scenario_from_json(doc);
    EXPECT_EQ(cfg.agents[0].M, cfg.agents[2].M);
    EXPECT_EQ(cfg.agents[0].Q, cfg.agents[2].Q);
    // default: (lambda + 1)^4 -> last row (-1, -4, -6, -4)
    EXPECT_EQ(cfg.agents[1].M.row(3), (RowVec(4) << -1, -4, -6, -4).finished());
}

TEST(ScenarioRoundTrip, CanonicalSerializationIsStable) {
    const auto cfg = fixtures::benchmark();
    const auto doc = scenario_to_json(cfg);
    const auto again = scenario_from_json(doc);
    EXPECT_EQ(scenario_to_json(again), doc);
    EXPECT_EQ(config_digest(again), config_digest(cfg));
    auto other = cfg;
    other.delta = 0.002;
    EXPECT_NE(config_digest(other), config_digest(cfg));
}

TEST(WriteTrace, EmptyTraceIsHeaderOnly) {
    std::ostringstream os;
    write_trace(SimTrace{}, os);
    EXPECT_EQ(os.str(), "t,agent,e,e_v,u,g,triggered\n");
}

TEST(WriteTrace, RowCountAndRoundTripCounts) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 1.0;
    cfg.sim.stride = 4;
    Simulator sim(cfg);
    const auto trace = sim.run();
    std::stringstream ss;
    write_trace(trace, ss);
    const std::string text = ss.str();
    const auto rows = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
    EXPECT_EQ(rows, (1000 / 4 + 1) * 4);
    std::istringstream in(text);
    const auto counts = read_trace_trigger_counts(in);
    const auto summary = summarize(trace);
    ASSERT_EQ(counts.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(counts[i], summary.agents[i].trigger_count);
}

TEST(WriteTrace, SeventeenDigits) {
    EXPECT_EQ(format_g17(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_g17(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Summary, ContainsAuditAndSynthesis) {
    auto cfg = fixtures::benchmark();
    cfg.sim.t_end = 0.5;
    Simulator sim(cfg);
    const auto trace = sim.run();
    const auto doc = summary_to_json(cfg, sim.closed_loop(), trace, summarize(trace));
    EXPECT_EQ(doc["agents"].size(), 4u);
    EXPECT_NEAR(doc["agents"][0]["psi"][1].get<double>(), 12.0, 1e-9);
    EXPECT_EQ(doc["gains"]["b_m"].get<double>(), 1.0);
    EXPECT_EQ(doc["gains"]["b_M"].get<double>(), 3.0);
    EXPECT_TRUE(doc["gains"]["sigma_at_bound"].get<bool>());
    EXPECT_TRUE(doc["audit"]["pass"].get<bool>());
    EXPECT_EQ(doc["config_digest"].get<std::string>(), config_digest(cfg));
}
