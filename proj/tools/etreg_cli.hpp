#ifndef ETREG_TOOLS_CLI_HPP
#define ETREG_TOOLS_CLI_HPP

#include "etreg/engine.hpp"
#include "etreg/scenario_io.hpp"
#include "etreg/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace etreg::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kRuntimeFailure = 2 };

namespace detail {

inline std::string fmt(double x, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << x;
    return os.str();
}

inline std::string row(const RowVec& r) {
    std::string out = "[";
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        // Clean up -0 and round-off noise around integers for display only.
        double v = r(k);
        if (std::abs(v - std::round(v)) < 1e-9) v = std::round(v) + 0.0;
        out += (k ? ", " : "") + fmt(v, 10);
    }
    return out + "]";
}

inline void print_summary_table(const TraceSummary& s, std::ostream& out) {
    out << "agent  triggers  min_inter_event  tail_sup_error\n";
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        out << std::setw(5) << i + 1 << std::setw(10) << a.trigger_count << std::setw(17)
            << (a.min_inter_event ? fmt(*a.min_inter_event) : std::string("-")) << std::setw(16)
            << fmt(a.tail_sup_error) << '\n';
    }
    out << "global min inter-event time: "
        << (s.global_min_inter_event ? fmt(*s.global_min_inter_event) : std::string("-")) << '\n';
    out << "trigger inequality audit: " << (s.audit_pass ? "pass" : "FAIL")
        << " (max g = " << fmt(s.audit_max_trigger_value) << ")\n";
}

struct RunOutput {
    ClosedLoop loop;
    SimTrace trace;
    TraceSummary summary;
};

inline RunOutput run_scenario(const ScenarioConfig& cfg) {
    Simulator sim(cfg);
    auto trace = sim.run();
    auto summary = summarize(trace, cfg.sim.audit_tolerance);
    return {sim.closed_loop(), std::move(trace), std::move(summary)};
}

inline std::vector<double> parse_delta_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !(v > 0.0)) {
            throw ValidationError(std::vector<ValidationIssue>{{"--delta", "'" + item + "' is not a positive number"}});
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(std::vector<ValidationIssue>{{"--delta", "empty list"}});
    return out;
}

inline int cmd_run(const std::string& path, const std::string& trace_path, const std::string& summary_path,
                   std::ostream& out) {
    const auto cfg = parse_scenario(path);
    const auto result = run_scenario(cfg);
    if (!trace_path.empty()) write_trace(result.trace, trace_path);
    if (!summary_path.empty()) write_json(summary_to_json(cfg, result.loop, result.trace, result.summary), summary_path);
    out << "scenario " << (cfg.name.empty() ? path : cfg.name) << ": sigma = " << fmt(cfg.sigma)
        << ", delta = " << fmt(cfg.delta) << ", t_end = " << fmt(cfg.sim.t_end) << "\n";
    print_summary_table(result.summary, out);
    return kOk;
}

inline int cmd_sweep(const std::string& path, const std::string& deltas, const std::string& out_dir,
                     std::ostream& out) {
    const auto base = parse_scenario(path);
    const auto values = parse_delta_list(deltas);
    std::filesystem::create_directories(out_dir);

    // Independent runs share nothing mutable; each writes its own files.
    std::vector<std::future<RunOutput>> jobs;
    std::vector<ScenarioConfig> configs;
    for (double d : values) {
        auto cfg = base;
        cfg.delta = d;
        configs.push_back(cfg);
    }
    for (const auto& cfg : configs) {
        jobs.push_back(std::async(std::launch::async, [&cfg] { return run_scenario(cfg); }));
    }
    out << "delta";
    for (std::size_t i = 0; i < base.n_followers; ++i) out << ",agent" << i + 1;
    out << '\n';
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const auto result = jobs[k].get();
        const auto tag = fmt(values[k], 17);
        const auto stem = (std::filesystem::path(out_dir) / ("delta_" + tag)).string();
        write_json(summary_to_json(configs[k], result.loop, result.trace, result.summary), stem + "_summary.json");
        write_trace(result.trace, stem + "_trace.csv");
        out << tag;
        for (const auto& a : result.summary.agents) out << ',' << a.trigger_count;
        out << '\n';
    }
    return kOk;
}

inline int cmd_verify(const std::string& path, std::ostream& out) {
    const auto cfg = parse_scenario(path);
    const auto loop = prepare(cfg);
    const auto& c = loop.coupling;
    out << "leader reachability: pass\n";
    out << "coupling matrix H is a nonsingular M-matrix: pass (min Re eig = "
        << fmt(linalg::min_real_part(c.H)) << ")\n";
    out << "weighting D = diag" << row(c.D.transpose()) << ", lambda_min(DH + H^T D) = "
        << fmt(weighted_symmetric_margin(c.H, c.D)) << "\n";
    out << "exosystem neutral stability: pass\n";
    out << "gain bounds: b_m = " << fmt(loop.bounds.b_m) << ", b_M = " << fmt(loop.bounds.b_M) << "\n";
    out << "lambda1 = " << fmt(c.lambdas.lambda1) << ", lambda2 = " << fmt(c.lambdas.lambda2)
        << ", lambda3 = " << fmt(c.lambdas.lambda3) << "\n";
    const auto& g = loop.gains;
    out << "sigma <= 1/a^2: " << (g.sigma_condition ? "pass" : "FAIL") << " (sigma = " << fmt(g.sigma)
        << ", 1/a^2 = " << fmt(g.sigma_bound) << (g.sigma_at_bound ? ", equality" : "") << ")\n";
    out << "a >= (lambda2 + 2 lambda3 + 1)/lambda1: " << (g.a_condition ? "pass" : "not met") << " (a = " << fmt(g.a)
        << ", threshold = " << fmt(g.a_threshold) << "; sufficient condition only)\n";
    out << "Delta condition: " << GainReport::kDeltaCondition << "\n";
    for (std::size_t i = 0; i < loop.models.size(); ++i) {
        const auto& m = loop.models[i];
        out << "agent " << i + 1 << ": Psi = " << row(m.Psi)
            << ", Sylvester residual = " << fmt(sylvester_residual(m.T, m.Phi, m.M, m.Q, m.Gamma), 3) << "\n";
    }
    return g.sigma_condition ? kOk : kValidationFailure;
}

inline int cmd_check_assumptions(const std::string& path, std::ostream& out) {
    const auto cfg = parse_scenario(path);
    bool ok = true;
    for (const auto& check : check_assumptions(cfg)) {
        out << (check.passed ? "pass  " : "FAIL  ") << check.name << ": " << check.detail << "\n";
        ok = ok && check.passed;
    }
    return ok ? kOk : kValidationFailure;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-triggered cooperative output regulation simulator"};
    app.require_subcommand(1);

    std::string scenario, trace_path, summary_path, deltas, out_dir = "sweep_out";
    auto* run = app.add_subcommand("run", "simulate a scenario");
    run->add_option("scenario", scenario, "scenario JSON")->required();
    run->add_option("--trace", trace_path, "write the sampled trace as CSV");
    run->add_option("--summary", summary_path, "write the run summary as JSON");

    auto* sweep = app.add_subcommand("sweep", "re-run a scenario for several delta values");
    sweep->add_option("scenario", scenario, "scenario JSON")->required();
    sweep->add_option("--delta", deltas, "comma-separated delta values")->required();
    sweep->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "gain conditions, graph checks and internal-model synthesis");
    verify->add_option("scenario", scenario, "scenario JSON")->required();

    auto* check = app.add_subcommand("check-assumptions", "structural assumptions of a scenario");
    check->add_option("scenario", scenario, "scenario JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationFailure;
    }

    try {
        if (*run) return detail::cmd_run(scenario, trace_path, summary_path, out);
        if (*sweep) return detail::cmd_sweep(scenario, deltas, out_dir, out);
        if (*verify) return detail::cmd_verify(scenario, out);
        if (*check) return detail::cmd_check_assumptions(scenario, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.is_runtime_failure()) return kRuntimeFailure;
        // failing to write a declared output is a runtime problem, failing to
        // read the scenario is an input problem
        if (e.kind() == ErrorKind::IoError && std::string(e.what()).find("write") != std::string::npos) {
            return kRuntimeFailure;
        }
        return kValidationFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kOk;
}

}  // namespace etreg::cli

#endif  // ETREG_TOOLS_CLI_HPP
