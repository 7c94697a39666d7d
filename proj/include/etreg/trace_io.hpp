#ifndef ETREG_TRACE_IO_HPP
#define ETREG_TRACE_IO_HPP

#include "etreg/engine.hpp"
#include "etreg/errors.hpp"
#include "etreg/scenario_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace etreg {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr const char* kTraceHeader = "t,agent,e,e_v,u,g,triggered";

/// One row per (sample, agent), time-major then agent index (1-based).
/// `triggered` counts the agent's events since the previous sample, so the
/// column sums to the trigger count.
inline void write_trace(const SimTrace& trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (std::size_t k = 0; k < trace.t.size(); ++k) {
        for (std::size_t i = 0; i < trace.agents.size(); ++i) {
            const auto& a = trace.agents[i];
            out << format_g17(trace.t[k]) << ',' << (i + 1) << ',' << format_g17(a.e[k]) << ','
                << format_g17(a.e_v[k]) << ',' << format_g17(a.u[k]) << ',' << format_g17(a.g[k]) << ','
                << a.triggered[k] << '\n';
        }
    }
}

inline void write_trace(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write trace to '" + path + "'");
    write_trace(trace, out);
    if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

/// Per-agent sums of the `triggered` column of a trace CSV.
inline std::vector<std::size_t> read_trace_trigger_counts(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw Error(ErrorKind::ParseError, "trace CSV header mismatch");
    }
    std::vector<std::size_t> counts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 7) throw Error(ErrorKind::ParseError, "trace CSV row has " + std::to_string(cols.size()) + " columns");
        const auto agent = std::stoul(cols[1]);
        if (agent == 0) throw Error(ErrorKind::ParseError, "agent indices start at 1");
        if (counts.size() < agent) counts.resize(agent, 0);
        counts[agent - 1] += std::stoul(cols[6]);
    }
    return counts;
}

inline std::vector<std::size_t> read_trace_trigger_counts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    return read_trace_trigger_counts(in);
}

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json row_to_json(const RowVec& r) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.size(); ++k) out.push_back(r(k));
    return out;
}

}  // namespace detail

inline nlohmann::json gains_to_json(const ClosedLoop& loop) {
    const auto& g = loop.gains;
    const auto& l = loop.coupling.lambdas;
    return {{"b_m", loop.bounds.b_m},
            {"b_M", loop.bounds.b_M},
            {"lambda1", l.lambda1},
            {"lambda2", l.lambda2},
            {"lambda3", l.lambda3},
            {"a", g.a},
            {"a_threshold", g.a_threshold},
            {"a_condition", g.a_condition},
            {"sigma", g.sigma},
            {"sigma_bound", g.sigma_bound},
            {"sigma_condition", g.sigma_condition},
            {"sigma_at_bound", g.sigma_at_bound},
            {"delta_condition", GainReport::kDeltaCondition}};
}

/// Run summary: per-agent event statistics and tail errors, the inequality
/// audit, gain verification, synthesized Psi and T, and the config digest.
/// Contains no timestamps, so identical runs give identical bytes.
inline nlohmann::json summary_to_json(const ScenarioConfig& cfg, const ClosedLoop& loop, const SimTrace& trace,
                                      const TraceSummary& s) {
    using nlohmann::json;
    json agents = json::array();
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        json T = json::array();
        const auto& Tm = loop.models[i].T;
        for (Eigen::Index r = 0; r < Tm.rows(); ++r) T.push_back(detail::row_to_json(Tm.row(r)));
        agents.push_back({{"agent", i + 1},
                          {"trigger_count", a.trigger_count},
                          {"min_inter_event_time", detail::optional_number(a.min_inter_event)},
                          {"mean_inter_event_time", detail::optional_number(a.mean_inter_event)},
                          {"tail_sup_error", a.tail_sup_error},
                          {"psi", detail::row_to_json(loop.models[i].Psi)},
                          {"T", T}});
    }
    json doc;
    doc["scenario"] = cfg.name;
    doc["config_digest"] = config_digest(cfg);
    doc["sigma"] = cfg.sigma;
    doc["delta"] = cfg.delta;
    doc["t_end"] = trace.t_end;
    doc["tail_window"] = {s.tail_start, trace.t_end};
    doc["agents"] = agents;
    doc["global_min_inter_event_time"] = detail::optional_number(s.global_min_inter_event);
    doc["audit"] = {{"max_trigger_value_at_samples", s.audit_max_trigger_value},
                    {"max_trigger_value_at_steps", trace.max_step_trigger_value},
                    {"tolerance", s.audit_tolerance},
                    {"pass", s.audit_pass}};
    doc["gains"] = gains_to_json(loop);
    return doc;
}

inline void write_json(const nlohmann::json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace etreg

#endif  // ETREG_TRACE_IO_HPP
