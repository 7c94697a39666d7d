#ifndef ETREG_TOPOLOGY_HPP
#define ETREG_TOPOLOGY_HPP

#include "etreg/errors.hpp"
#include "etreg/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etreg {

/// Directed edge `from -> to`: node `to` receives the output of node `from`.
struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Leader-follower communication digraph on nodes {0, ..., N}, node 0 being
/// the leader. Entry (i, j) of the adjacency matrix is 1 iff node i hears
/// node j. The leader hears nobody.
class LeaderFollowerGraph {
public:
    LeaderFollowerGraph(std::size_t n_followers, std::span<const Edge> edges)
        : n_(n_followers), adj_((n_followers + 1) * (n_followers + 1), 0) {
        if (n_followers == 0) throw std::invalid_argument("graph needs at least one follower");
        for (const auto& e : edges) {
            if (e.from > n_ || e.to > n_) {
                throw std::invalid_argument("edge (" + std::to_string(e.from) + "," +
                                            std::to_string(e.to) + ") references a node outside 0.." +
                                            std::to_string(n_));
            }
            if (e.from == e.to) throw std::invalid_argument("self loop on node " + std::to_string(e.to));
            if (e.to == 0) throw std::invalid_argument("the leader (node 0) cannot receive edges");
            adj_[index(e.to, e.from)] = 1;
        }
    }

    std::size_t n_followers() const noexcept { return n_; }
    std::size_t n_nodes() const noexcept { return n_ + 1; }

    /// a_ij in {0, 1}.
    int adjacency(std::size_t i, std::size_t j) const { return adj_[index(i, j)]; }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t i = 0; i <= n_; ++i)
            for (std::size_t j = 0; j <= n_; ++j)
                if (adjacency(i, j)) out.push_back({j, i});
        return out;
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const { return i * (n_ + 1) + j; }

    std::size_t n_;
    std::vector<int> adj_;
};

/// H with h_ii = sum_j a_ij (leader included) and h_ij = -a_ij, over the
/// followers only.
inline Mat build_coupling(const LeaderFollowerGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.n_followers());
    Mat H = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto node = static_cast<std::size_t>(i + 1);
        double degree = 0.0;
        for (std::size_t j = 0; j < graph.n_nodes(); ++j) degree += graph.adjacency(node, j);
        H(i, i) = degree;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) H(i, j) = -graph.adjacency(node, static_cast<std::size_t>(j + 1));
        }
    }
    return H;
}

/// Follower nodes that cannot be reached from the leader along directed edges.
inline std::vector<std::size_t> unreachable_followers(const LeaderFollowerGraph& graph) {
    std::vector<bool> seen(graph.n_nodes(), false);
    std::deque<std::size_t> frontier{0};
    seen[0] = true;
    while (!frontier.empty()) {
        const auto j = frontier.front();
        frontier.pop_front();
        for (std::size_t i = 1; i < graph.n_nodes(); ++i) {
            if (!seen[i] && graph.adjacency(i, j)) {
                seen[i] = true;
                frontier.push_back(i);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < graph.n_nodes(); ++i)
        if (!seen[i]) out.push_back(i);
    return out;
}

inline bool check_leader_reachability(const LeaderFollowerGraph& graph) {
    return unreachable_followers(graph).empty();
}

inline constexpr double kMMatrixTolerance = 1e-10;

/// Nonsingular M-matrix test: off-diagonal entries non-positive and every
/// eigenvalue with real part above the tolerance.
inline bool is_nonsingular_m_matrix(const Mat& H, double tol = kMMatrixTolerance) {
    if (H.rows() != H.cols() || H.rows() == 0) return false;
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        for (Eigen::Index j = 0; j < H.cols(); ++j)
            if (i != j && H(i, j) > 0.0) return false;
    return linalg::min_real_part(H) > tol;
}

/// lambda_min(D H + H^T D) for D = diag(d).
inline double weighted_symmetric_margin(const Mat& H, const Vec& d) {
    const Mat DH = d.asDiagonal() * H;
    return linalg::min_symmetric_eigenvalue(DH + DH.transpose());
}

namespace detail {

// Coordinate search over a log grid in [1e-3, 1e3] for each diagonal entry,
// maximizing the symmetric margin.
inline Vec coordinate_search_weighting(const Mat& H) {
    const auto n = H.rows();
    Vec d = Vec::Ones(n);
    double best = weighted_symmetric_margin(H, d);
    constexpr int kGrid = 61;
    for (int sweep = 0; sweep < 8; ++sweep) {
        bool improved = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int g = 0; g < kGrid; ++g) {
                Vec trial = d;
                trial(i) = std::pow(10.0, -3.0 + 6.0 * g / (kGrid - 1));
                const double margin = weighted_symmetric_margin(H, trial);
                if (margin > best) {
                    best = margin;
                    d = trial;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }
    return d;
}

}  // namespace detail

/// Positive diagonal D (returned as its diagonal) with D H + H^T D positive
/// definite. Uses D = diag(u_i / z_i), z = H^{-1} 1, u = H^{-T} 1, which
/// works for every nonsingular M-matrix; falls back to a coordinate search
/// if numerical verification of that candidate fails.
inline Vec find_weighting(const Mat& H) {
    if (!is_nonsingular_m_matrix(H)) {
        throw Error(ErrorKind::NotMMatrix,
                    "coupling matrix has a positive off-diagonal entry or an eigenvalue with "
                    "non-positive real part");
    }
    const auto n = H.rows();
    const Vec ones = Vec::Ones(n);
    const auto lu = H.fullPivLu();
    const Vec z = lu.solve(ones);
    const Vec u = H.transpose().fullPivLu().solve(ones);
    if ((z.array() > 0.0).all() && (u.array() > 0.0).all()) {
        const Vec d = u.cwiseQuotient(z);
        if (weighted_symmetric_margin(H, d) > kMMatrixTolerance) return d;
    }
    const Vec d = detail::coordinate_search_weighting(H);
    if (weighted_symmetric_margin(H, d) > kMMatrixTolerance) return d;
    throw Error(ErrorKind::ConstructionFailed, "no diagonal weighting makes DH + H^T D positive definite");
}

struct Lambdas {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
};

/// lambda1 = b_m^2 lambda_min(DH + H^T D), lambda2 = b_M ||DH||,
/// lambda3 = b_M^2 ||DH||, with the spectral norm.
inline Lambdas compute_lambdas(const Mat& H, const Vec& d, double b_m, double b_M) {
    if (!(b_m > 0.0) || !(b_M >= b_m)) throw std::invalid_argument("gain bounds must satisfy 0 < b_m <= b_M");
    if (d.size() != H.rows() || (d.array() <= 0.0).any()) {
        throw std::invalid_argument("weighting must be a positive vector matching H");
    }
    const double margin = weighted_symmetric_margin(H, d);
    if (!(margin > 0.0)) {
        throw Error(ErrorKind::ConstructionFailed, "DH + H^T D is not positive definite");
    }
    const double norm_dh = linalg::spectral_norm(d.asDiagonal() * H);
    return {b_m * b_m * margin, b_M * norm_dh, b_M * b_M * norm_dh};
}

/// Everything derived from the graph and the gain bounds.
struct CouplingMatrix {
    Mat H;
    Vec D;  // diagonal of the weighting matrix
    Lambdas lambdas;
    double b_m = 0.0;
    double b_M = 0.0;
};

inline CouplingMatrix make_coupling(const LeaderFollowerGraph& graph, double b_m, double b_M) {
    CouplingMatrix c;
    c.H = build_coupling(graph);
    c.D = find_weighting(c.H);
    c.lambdas = compute_lambdas(c.H, c.D, b_m, b_M);
    c.b_m = b_m;
    c.b_M = b_M;
    return c;
}

/// e_vi = sum_j a_ij (y_i - y_j) over all nodes, `outputs[0]` being the leader.
inline Vec virtual_error(std::span<const double> outputs, const LeaderFollowerGraph& graph) {
    if (outputs.size() != graph.n_nodes()) throw std::invalid_argument("need one output per node");
    const auto n = graph.n_followers();
    Vec ev = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i <= n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            if (graph.adjacency(i, j)) acc += outputs[i] - outputs[j];
        }
        ev(static_cast<Eigen::Index>(i - 1)) = acc;
    }
    return ev;
}

}  // namespace etreg

#endif  // ETREG_TOPOLOGY_HPP
