#ifndef ETREG_ETC_LAW_HPP
#define ETREG_ETC_LAW_HPP

#include "etreg/linalg.hpp"
#include "etreg/topology.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etreg {

/// rho(e) = a * omega(e^2) with omega(x) = sum_k omega[k] x^k.
/// omega[0] >= 1 and the remaining coefficients non-negative give
/// omega >= 1 on [0, inf), hence rho >= a.
class GainFunction {
public:
    GainFunction(double a, std::vector<double> omega) : a_(a), omega_(std::move(omega)) {
        if (!(a_ >= 1.0)) throw std::invalid_argument("gain prefactor a must be >= 1");
        if (omega_.empty() || !(omega_[0] >= 1.0)) {
            throw std::invalid_argument("omega must have a constant term >= 1");
        }
        for (std::size_t k = 1; k < omega_.size(); ++k) {
            if (!(omega_[k] >= 0.0)) throw std::invalid_argument("omega coefficients must be non-negative");
        }
    }

    double a() const noexcept { return a_; }
    const std::vector<double>& omega() const noexcept { return omega_; }

    double operator()(double e) const {
        const double x = e * e;
        double acc = 0.0;
        for (auto it = omega_.rbegin(); it != omega_.rend(); ++it) acc = acc * x + *it;
        return a_ * acc;
    }

private:
    double a_;
    std::vector<double> omega_;
};

struct TriggerParams {
    double sigma = 0.0;
    double delta = 0.0;
    GainFunction rho{1.0, {1.0}};
};

/// vartheta = -rho(e_v) e_v.
inline double vartheta(double e_v, const GainFunction& rho) { return -rho(e_v) * e_v; }

/// Values latched at the most recent event of one agent.
struct HeldSamples {
    double t_k = 0.0;
    double e_v_k = 0.0;
    Vec eta_k;
    double vartheta_k = 0.0;
    std::size_t count = 0;

    /// Latches a new sample at time t.
    void update(double t, double e_v, const Vec& eta, const GainFunction& rho) {
        if (count > 0 && t < t_k) throw std::logic_error("event times must be nondecreasing");
        t_k = t;
        e_v_k = e_v;
        eta_k = eta;
        vartheta_k = vartheta(e_v, rho);
        ++count;
    }
};

/// g = (theta_tilde + Psi eta_tilde)^2 - sigma vartheta(t)^2 - delta, with
/// tildes meaning held minus current. The agent fires when g >= 0.
inline double trigger_value(const HeldSamples& held, double e_v_now, const Vec& eta_now,
                            const RowVec& Psi, const TriggerParams& params) {
    const double theta_now = vartheta(e_v_now, params.rho);
    const double drift = (held.vartheta_k - theta_now) + Psi.dot(held.eta_k - eta_now);
    return drift * drift - params.sigma * theta_now * theta_now - params.delta;
}

/// u = vartheta(t_k) + Psi eta(t_k); constant until the next event.
inline double control_output(const HeldSamples& held, const RowVec& Psi) {
    return held.vartheta_k + Psi.dot(held.eta_k);
}

/// Outcome of the two machine-checkable gain conditions.
struct GainReport {
    double a = 0.0;
    double sigma = 0.0;
    double a_threshold = 0.0;  // (lambda2 + 2 lambda3 + 1) / lambda1
    double sigma_bound = 0.0;  // 1 / a^2
    bool a_condition = false;
    bool sigma_condition = false;
    bool sigma_at_bound = false;
    static constexpr const char* kDeltaCondition = "not machine-checkable";
};

inline GainReport verify_gains(double a, double sigma, const Lambdas& lambdas) {
    if (!(lambdas.lambda1 > 0.0 && lambdas.lambda2 > 0.0 && lambdas.lambda3 > 0.0)) {
        throw std::invalid_argument("lambdas must be positive");
    }
    GainReport r;
    r.a = a;
    r.sigma = sigma;
    r.a_threshold = (lambdas.lambda2 + 2.0 * lambdas.lambda3 + 1.0) / lambdas.lambda1;
    r.sigma_bound = 1.0 / (a * a);
    constexpr double kRel = 1e-12;
    r.a_condition = a >= r.a_threshold * (1.0 - kRel);
    r.sigma_at_bound = std::abs(sigma - r.sigma_bound) <= kRel * r.sigma_bound;
    r.sigma_condition = sigma > 0.0 && (sigma <= r.sigma_bound || r.sigma_at_bound);
    return r;
}

}  // namespace etreg

#endif  // ETREG_ETC_LAW_HPP
