#ifndef ETREG_SCENARIO_IO_HPP
#define ETREG_SCENARIO_IO_HPP

#include "etreg/errors.hpp"
#include "etreg/internal_model.hpp"
#include "etreg/plant.hpp"
#include "etreg/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace etreg {

inline constexpr int kScenarioSchemaVersion = 1;

namespace detail {

using nlohmann::json;

// Walks a scenario document, collecting every problem instead of stopping
// at the first one.
class ScenarioReader {
public:
    std::vector<ValidationIssue> issues;

    void fail(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

    bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        std::set<std::string> known(allowed.begin(), allowed.end());
        for (const auto& [key, _] : j.items()) {
            if (!known.count(key)) fail(join(path, key), "unknown field");
        }
        return true;
    }

    const json* field(const json& j, const std::string& path, const char* key, bool required) {
        if (!j.is_object()) return nullptr;
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(join(path, key), "missing required field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
        const json* f = field(j, path, key, required);
        if (!f) return std::nullopt;
        if (!f->is_number()) {
            fail(join(path, key), "expected a number");
            return std::nullopt;
        }
        return f->get<double>();
    }

    std::optional<std::int64_t> integer(const json& j, const std::string& path, const char* key, bool required) {
        const json* f = field(j, path, key, required);
        if (!f) return std::nullopt;
        if (!f->is_number_integer()) {
            fail(join(path, key), "expected an integer");
            return std::nullopt;
        }
        return f->get<std::int64_t>();
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& path, const char* key, bool required) {
        const json* f = field(j, path, key, required);
        if (!f) return std::nullopt;
        return number_array(*f, join(path, key));
    }

    std::optional<std::vector<double>> number_array(const json& f, const std::string& path) {
        if (!f.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (!f[k].is_number()) {
                fail(path + "[" + std::to_string(k) + "]", "expected a number");
                return std::nullopt;
            }
            out.push_back(f[k].get<double>());
        }
        return out;
    }

    std::optional<Mat> matrix(const json& j, const std::string& path, const char* key, bool required) {
        const json* f = field(j, path, key, required);
        if (!f) return std::nullopt;
        const auto p = join(path, key);
        if (!f->is_array() || f->empty()) {
            fail(p, "expected a non-empty array of rows");
            return std::nullopt;
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < f->size(); ++r) {
            auto row = number_array((*f)[r], p + "[" + std::to_string(r) + "]");
            if (!row) return std::nullopt;
            rows.push_back(*row);
        }
        for (const auto& row : rows) {
            if (row.size() != rows.front().size()) {
                fail(p, "rows have different lengths");
                return std::nullopt;
            }
        }
        Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        return m;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
};

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline json vector_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

}  // namespace detail

/// Builds and validates a scenario from a JSON document. Throws
/// ValidationError listing every violation (with field paths).
inline ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
    detail::ScenarioReader rd;
    ScenarioConfig cfg;

    if (!rd.object(doc, "", {"schema_version", "name", "graph", "exosystem", "plant", "agents", "trigger", "sim"})) {
        throw ValidationError(rd.issues);
    }
    if (auto v = rd.integer(doc, "", "schema_version", true); v && *v != kScenarioSchemaVersion) {
        rd.fail("schema_version", "unsupported version " + std::to_string(*v));
    }
    if (const auto* name = rd.field(doc, "", "name", false)) {
        if (name->is_string()) cfg.name = name->get<std::string>();
        else rd.fail("name", "expected a string");
    }

    // graph
    if (const auto* g = rd.field(doc, "", "graph", true); g && rd.object(*g, "graph", {"followers", "edges"})) {
        if (auto n = rd.integer(*g, "graph", "followers", true)) {
            if (*n < 1) rd.fail("graph.followers", "must be at least 1");
            else cfg.n_followers = static_cast<std::size_t>(*n);
        }
        if (const auto* edges = rd.field(*g, "graph", "edges", true)) {
            if (!edges->is_array()) rd.fail("graph.edges", "expected an array of [from, to] pairs");
            else {
                for (std::size_t k = 0; k < edges->size(); ++k) {
                    const auto& e = (*edges)[k];
                    const auto p = "graph.edges[" + std::to_string(k) + "]";
                    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                        rd.fail(p, "expected [from, to] integers");
                        continue;
                    }
                    const auto from = e[0].get<std::int64_t>();
                    const auto to = e[1].get<std::int64_t>();
                    const auto n = static_cast<std::int64_t>(cfg.n_followers);
                    if (from < 0 || to < 0 || from > n || to > n) {
                        rd.fail(p, "node out of range 0.." + std::to_string(n));
                    } else if (from == to) {
                        rd.fail(p, "self loop");
                    } else if (to == 0) {
                        rd.fail(p, "the leader cannot receive edges");
                    } else {
                        cfg.edges.push_back({static_cast<std::size_t>(from), static_cast<std::size_t>(to)});
                    }
                }
            }
        }
    }

    // exosystem
    if (const auto* x = rd.field(doc, "", "exosystem", true); x && rd.object(*x, "exosystem", {"S", "v0"})) {
        auto S = rd.matrix(*x, "exosystem", "S", true);
        auto v0 = rd.numbers(*x, "exosystem", "v0", true);
        if (S && S->rows() != S->cols()) rd.fail("exosystem.S", "must be square");
        else if (S && v0 && static_cast<Eigen::Index>(v0->size()) != S->rows()) {
            rd.fail("exosystem.v0", "length must match S");
        } else if (S && v0) {
            cfg.S = *S;
            cfg.v0 = linalg::to_vec(*v0);
        }
    }

    // plant
    std::shared_ptr<const Plant> plant;
    if (const auto* p = rd.field(doc, "", "plant", true); p && rd.object(*p, "plant", {"kind", "uncertainty_bound"})) {
        if (const auto* kind = rd.field(*p, "plant", "kind", true)) {
            if (!kind->is_string()) rd.fail("plant.kind", "expected a string");
            else {
                cfg.plant_kind = kind->get<std::string>();
                try {
                    plant = make_plant(cfg.plant_kind);
                } catch (const std::invalid_argument& e) {
                    rd.fail("plant.kind", e.what());
                }
            }
        }
        if (auto r = rd.numbers(*p, "plant", "uncertainty_bound", true)) {
            cfg.uncertainty_bound = linalg::to_vec(*r);
            if ((cfg.uncertainty_bound.array() < 0.0).any()) rd.fail("plant.uncertainty_bound", "radii must be non-negative");
            if (plant && cfg.uncertainty_bound.size() != plant->uncertainty_dim()) {
                rd.fail("plant.uncertainty_bound", "expected " + std::to_string(plant->uncertainty_dim()) + " entries");
            }
        }
        if (plant && cfg.S.size() > 0 && cfg.S.rows() != plant->exosystem_dim()) {
            rd.fail("exosystem.S", "plant expects an exosystem of dimension " + std::to_string(plant->exosystem_dim()));
        }
    }

    // agents
    if (const auto* agents = rd.field(doc, "", "agents", true)) {
        if (!agents->is_array()) rd.fail("agents", "expected an array");
        else {
            if (cfg.n_followers != 0 && agents->size() != cfg.n_followers) {
                rd.fail("agents", "expected " + std::to_string(cfg.n_followers) + " agents, got " +
                                      std::to_string(agents->size()));
            }
            for (std::size_t i = 0; i < agents->size(); ++i) {
                const auto& a = (*agents)[i];
                const auto p = "agents[" + std::to_string(i) + "]";
                if (!rd.object(a, p, {"w", "z0", "y0", "eta0", "internal_model"})) continue;
                AgentSpec spec;
                auto w = rd.numbers(a, p, "w", true);
                auto z0 = rd.numbers(a, p, "z0", true);
                auto y0 = rd.number(a, p, "y0", true);
                auto eta0 = rd.numbers(a, p, "eta0", true);
                if (w) spec.w = linalg::to_vec(*w);
                if (z0) spec.z0 = linalg::to_vec(*z0);
                if (y0) spec.y0 = *y0;
                if (eta0) spec.eta0 = linalg::to_vec(*eta0);
                if (plant && w && spec.w.size() != plant->uncertainty_dim()) rd.fail(p + ".w", "wrong length");
                if (plant && z0 && spec.z0.size() != plant->state_dim()) rd.fail(p + ".z0", "wrong length");

                const auto ip = p + ".internal_model";
                const auto* im = rd.field(a, p, "internal_model", true);
                if (im && rd.object(*im, ip, {"polynomial", "M", "Q", "characteristic"})) {
                    auto poly = rd.numbers(*im, ip, "polynomial", true);
                    if (poly && poly->empty()) rd.fail(ip + ".polynomial", "must not be empty");
                    else if (poly) {
                        spec.polynomial.varrho = *poly;
                        const auto s = static_cast<Eigen::Index>(poly->size());
                        auto M = rd.matrix(*im, ip, "M", false);
                        auto Q = rd.numbers(*im, ip, "Q", false);
                        auto ch = rd.numbers(*im, ip, "characteristic", false);
                        if (M && ch) rd.fail(ip, "give either M or characteristic, not both");
                        if (M) {
                            if (M->rows() != s || M->cols() != s) rd.fail(ip + ".M", "must be " + std::to_string(s) + "x" + std::to_string(s));
                            spec.M = *M;
                        } else if (ch) {
                            if (static_cast<Eigen::Index>(ch->size()) != s) rd.fail(ip + ".characteristic", "wrong length");
                            else spec.M = companion_from_characteristic(*ch);
                        } else {
                            // (lambda + 1)^s
                            std::vector<double> c(static_cast<std::size_t>(s));
                            double binom = 1.0;
                            for (Eigen::Index k = 0; k < s; ++k) {
                                c[static_cast<std::size_t>(k)] = binom;
                                binom = binom * static_cast<double>(s - k) / static_cast<double>(k + 1);
                            }
                            spec.M = companion_from_characteristic(c);
                        }
                        if (Q) {
                            if (static_cast<Eigen::Index>(Q->size()) != s) rd.fail(ip + ".Q", "wrong length");
                            spec.Q = linalg::to_vec(*Q);
                        } else {
                            spec.Q = last_unit_vector(s);
                        }
                        if (eta0 && spec.eta0.size() != s) rd.fail(p + ".eta0", "length must match the polynomial order");
                    }
                }
                cfg.agents.push_back(std::move(spec));
            }
        }
    }

    // trigger
    if (const auto* t = rd.field(doc, "", "trigger", true); t && rd.object(*t, "trigger", {"sigma", "delta", "a", "omega"})) {
        if (auto v = rd.number(*t, "trigger", "sigma", true)) {
            if (!(*v > 0.0)) rd.fail("trigger.sigma", "must be > 0");
            cfg.sigma = *v;
        }
        if (auto v = rd.number(*t, "trigger", "delta", true)) {
            if (!(*v > 0.0)) rd.fail("trigger.delta", "must be > 0");
            cfg.delta = *v;
        }
        if (auto v = rd.number(*t, "trigger", "a", true)) {
            if (!(*v >= 1.0)) rd.fail("trigger.a", "must be >= 1");
            cfg.a = *v;
        }
        if (auto v = rd.numbers(*t, "trigger", "omega", true)) {
            if (v->empty() || !((*v)[0] >= 1.0)) rd.fail("trigger.omega", "constant term must be >= 1");
            for (std::size_t k = 1; k < v->size(); ++k)
                if (!((*v)[k] >= 0.0)) rd.fail("trigger.omega[" + std::to_string(k) + "]", "must be >= 0");
            cfg.omega = *v;
        }
    }

    // sim
    if (const auto* s = rd.field(doc, "", "sim", true);
        s && rd.object(*s, "sim", {"t_end", "h", "tol_event", "tol_time", "tail_window", "stride", "max_events_per_agent"})) {
        auto& sim = cfg.sim;
        auto positive = [&](const char* key, double& slot, bool required) {
            if (auto v = rd.number(*s, "sim", key, required)) {
                if (!(*v > 0.0)) rd.fail(std::string("sim.") + key, "must be > 0");
                slot = *v;
            }
        };
        positive("t_end", sim.t_end, true);
        positive("h", sim.h, true);
        positive("tol_event", sim.tol_event, false);
        positive("tol_time", sim.tol_time, false);
        if (auto v = rd.number(*s, "sim", "tail_window", false)) {
            if (!(*v >= 0.0) || *v > sim.t_end) rd.fail("sim.tail_window", "must lie in [0, t_end]");
            sim.tail_window = *v;
        }
        if (auto v = rd.integer(*s, "sim", "stride", false)) {
            if (*v < 1) rd.fail("sim.stride", "must be >= 1");
            else sim.stride = static_cast<std::size_t>(*v);
        }
        if (auto v = rd.integer(*s, "sim", "max_events_per_agent", false)) {
            if (*v < 1) rd.fail("sim.max_events_per_agent", "must be >= 1");
            else sim.max_events_per_agent = static_cast<std::size_t>(*v);
        }
    }

    if (!rd.issues.empty()) throw ValidationError(rd.issues);
    return cfg;
}

inline ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open scenario file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    return scenario_from_json(doc);
}

/// Canonical serialization (M and Q always explicit).
inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    using nlohmann::json;
    json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    if (!cfg.name.empty()) doc["name"] = cfg.name;
    json edges = json::array();
    for (const auto& e : cfg.edges) edges.push_back({e.from, e.to});
    doc["graph"] = {{"followers", cfg.n_followers}, {"edges", edges}};
    doc["exosystem"] = {{"S", detail::matrix_to_json(cfg.S)}, {"v0", detail::vector_to_json(cfg.v0)}};
    doc["plant"] = {{"kind", cfg.plant_kind}, {"uncertainty_bound", detail::vector_to_json(cfg.uncertainty_bound)}};
    json agents = json::array();
    for (const auto& a : cfg.agents) {
        agents.push_back({{"w", detail::vector_to_json(a.w)},
                          {"z0", detail::vector_to_json(a.z0)},
                          {"y0", a.y0},
                          {"eta0", detail::vector_to_json(a.eta0)},
                          {"internal_model",
                           {{"polynomial", a.polynomial.varrho},
                            {"M", detail::matrix_to_json(a.M)},
                            {"Q", detail::vector_to_json(a.Q)}}}});
    }
    doc["agents"] = agents;
    doc["trigger"] = {{"sigma", cfg.sigma}, {"delta", cfg.delta}, {"a", cfg.a}, {"omega", cfg.omega}};
    doc["sim"] = {{"t_end", cfg.sim.t_end},
                  {"h", cfg.sim.h},
                  {"tol_event", cfg.sim.tol_event},
                  {"tol_time", cfg.sim.tol_time},
                  {"tail_window", cfg.sim.tail_window},
                  {"stride", cfg.sim.stride},
                  {"max_events_per_agent", cfg.sim.max_events_per_agent}};
    return doc;
}

/// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string config_digest(const ScenarioConfig& cfg) {
    const std::string text = scenario_to_json(cfg).dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace etreg

#endif  // ETREG_SCENARIO_IO_HPP
