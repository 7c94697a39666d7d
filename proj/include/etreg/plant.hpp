#ifndef ETREG_PLANT_HPP
#define ETREG_PLANT_HPP

#include "etreg/errors.hpp"
#include "etreg/linalg.hpp"

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace etreg {

/// Symmetric uncertainty box |w_j| <= radius_j.
struct UncertaintyBox {
    Vec radius;

    bool contains(const Vec& w) const {
        return w.size() == radius.size() && (w.cwiseAbs().array() <= radius.array()).all();
    }
};

struct GainBounds {
    double b_m = 0.0;
    double b_M = 0.0;
};

/// Follower in normal form with unity relative degree:
///   dz/dt = f(z, y, v, w)
///   dy/dt = g(z, y, v, w) + b(w) u
///   e     = y - q(v, w)
class Plant {
public:
    virtual ~Plant() = default;

    virtual std::string_view kind() const = 0;
    virtual Eigen::Index state_dim() const = 0;
    virtual Eigen::Index uncertainty_dim() const = 0;
    virtual Eigen::Index exosystem_dim() const = 0;

    virtual Vec f(const Vec& z, double y, const Vec& v, const Vec& w) const = 0;
    virtual double g(const Vec& z, double y, const Vec& v, const Vec& w) const = 0;
    virtual double b(const Vec& w) const = 0;
    virtual double q(const Vec& v, const Vec& w) const = 0;

    /// Bounds of b(w) over the box. Throws NonPositiveGain if the box admits
    /// b(w) <= 0.
    virtual GainBounds gain_bounds(const UncertaintyBox& box) const = 0;

    /// Human-readable violations of the plant's structural sign conditions
    /// over the box (empty when admissible).
    virtual std::vector<std::string> admissibility_issues(const UncertaintyBox& box) const = 0;
};

/// Nominal (c1, c2, c3, b) of the Lorenz follower.
inline constexpr std::array<double, 4> kLorenzNominal = {-6.0, -8.0, 1.0, 2.0};

struct LorenzDerivatives {
    double dz1 = 0.0;
    double dz2 = 0.0;
    double dy = 0.0;
};

/// c = nominal + w;
///   dz1 = c1 z1 - c1 y
///   dz2 = c2 z2 + z1 y
///   dy  = c3 z1 - y - z1 z2 + b u
inline LorenzDerivatives lorenz_derivatives(const Vec& z, double y, const Vec& w, double u) {
    const double c1 = kLorenzNominal[0] + w(0);
    const double c2 = kLorenzNominal[1] + w(1);
    const double c3 = kLorenzNominal[2] + w(2);
    const double b = kLorenzNominal[3] + w(3);
    return {c1 * z(0) - c1 * y, c2 * z(1) + z(0) * y, c3 * z(0) - y - z(0) * z(1) + b * u};
}

class LorenzPlant final : public Plant {
public:
    std::string_view kind() const override { return "lorenz"; }
    Eigen::Index state_dim() const override { return 2; }
    Eigen::Index uncertainty_dim() const override { return 4; }
    Eigen::Index exosystem_dim() const override { return 2; }

    Vec f(const Vec& z, double y, const Vec& /*v*/, const Vec& w) const override {
        const auto d = lorenz_derivatives(z, y, w, 0.0);
        Vec out(2);
        out << d.dz1, d.dz2;
        return out;
    }

    double g(const Vec& z, double y, const Vec& /*v*/, const Vec& w) const override {
        return lorenz_derivatives(z, y, w, 0.0).dy;
    }

    double b(const Vec& w) const override { return kLorenzNominal[3] + w(3); }

    double q(const Vec& v, const Vec& /*w*/) const override { return v(0); }

    GainBounds gain_bounds(const UncertaintyBox& box) const override {
        if (box.radius.size() != 4) throw std::invalid_argument("Lorenz uncertainty box must have 4 entries");
        const double lo = kLorenzNominal[3] - box.radius(3);
        const double hi = kLorenzNominal[3] + box.radius(3);
        if (!(lo > 0.0)) {
            throw Error(ErrorKind::NonPositiveGain,
                        "input gain b = 2 + w4 reaches " + std::to_string(lo) + " on the uncertainty box");
        }
        return {lo, hi};
    }

    std::vector<std::string> admissibility_issues(const UncertaintyBox& box) const override {
        std::vector<std::string> issues;
        if (box.radius.size() != 4) {
            issues.emplace_back("Lorenz uncertainty box must have 4 entries");
            return issues;
        }
        if (!(kLorenzNominal[0] + box.radius(0) < 0.0)) issues.emplace_back("c1 = -6 + w1 can be non-negative");
        if (!(kLorenzNominal[1] + box.radius(1) < 0.0)) issues.emplace_back("c2 = -8 + w2 can be non-negative");
        if (!(kLorenzNominal[3] - box.radius(3) > 0.0)) issues.emplace_back("b = 2 + w4 can be non-positive");
        return issues;
    }
};

/// Plant factory keyed by the `plant.kind` scenario field.
inline std::shared_ptr<const Plant> make_plant(std::string_view kind) {
    if (kind == "lorenz") return std::make_shared<LorenzPlant>();
    throw std::invalid_argument("unknown plant kind '" + std::string(kind) + "'");
}

}  // namespace etreg

#endif  // ETREG_PLANT_HPP
