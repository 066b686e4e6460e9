// Finite-state Markov chain algebra: validation, stationary distribution,
// n-step transition laws and the geometric convergence profile.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "idscap/errors.hpp"
#include "idscap/matrix.hpp"

namespace idscap {

// Tolerance ladder used across the library: construction checks at 1e-12,
// derived identities at 1e-10.
inline constexpr double kConstructTol = 1e-12;
inline constexpr double kDerivedTol = 1e-10;

/// Row-stochastic transition matrix over states {0, ..., s-1}.
class MarkovChain {
  public:
    explicit MarkovChain(std::vector<std::vector<double>> rows) {
        s_ = rows.size();
        if (s_ == 0) throw ValidationError("MarkovChain: empty transition matrix");
        g_ = Matrix(s_, s_);
        for (std::size_t i = 0; i < s_; ++i) {
            if (rows[i].size() != s_)
                throw ValidationError("MarkovChain: row " + std::to_string(i) + " has wrong length");
            double sum = 0.0;
            for (std::size_t j = 0; j < s_; ++j) {
                const double v = rows[i][j];
                if (v < 0.0 || v > 1.0)
                    throw ValidationError("MarkovChain: entry (" + std::to_string(i) + "," +
                                          std::to_string(j) + ") outside [0,1]");
                g_(i, j) = v;
                sum += v;
            }
            if (std::fabs(sum - 1.0) > kConstructTol)
                throw ValidationError("MarkovChain: row " + std::to_string(i) +
                                      " sums to " + std::to_string(sum) + ", not 1");
        }
    }

    std::size_t size() const { return s_; }
    double operator()(std::size_t from, std::size_t to) const { return g_(from, to); }
    const Matrix& matrix() const { return g_; }

  private:
    std::size_t s_ = 0;
    Matrix g_;
};

struct ChainClassification {
    bool irreducible = false;
    bool aperiodic = false;
    bool ergodic() const { return irreducible && aperiodic; }
};

namespace detail {

inline std::vector<std::size_t> reachable(const MarkovChain& c, std::size_t from, bool transpose) {
    const std::size_t s = c.size();
    std::vector<char> seen(s, 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < s; ++v) {
            const double p = transpose ? c(v, u) : c(u, v);
            if (p > 0.0 && !seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < s; ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

// gcd of cycle lengths inside one strongly connected component, via the
// BFS-level trick: for an edge u->v inside the component, every closed walk
// picks up (level[u] + 1 - level[v]) mod period.
inline long component_period(const MarkovChain& c, const std::vector<std::size_t>& comp) {
    const std::size_t s = c.size();
    std::vector<long> level(s, -1);
    std::vector<char> inside(s, 0);
    for (std::size_t v : comp) inside[v] = 1;
    std::vector<std::size_t> queue{comp.front()};
    level[comp.front()] = 0;
    long g = 0;
    std::size_t head = 0;
    while (head < queue.size()) {
        const std::size_t u = queue[head++];
        for (std::size_t v = 0; v < s; ++v) {
            if (c(u, v) <= 0.0 || !inside[v]) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
            }
        }
    }
    return g == 0 ? 0 : g; // 0: no cycle through this traversal (cannot happen in an SCC)
}

} // namespace detail

/// Irreducibility via strong connectivity of the positive-entry digraph,
/// aperiodicity via gcd of cycle lengths. An entry counts as an edge exactly
/// when it is > 0: transition probabilities are exact inputs, not measured.
inline ChainClassification validate_chain(const MarkovChain& chain) {
    const std::size_t s = chain.size();
    ChainClassification out;
    out.irreducible =
        detail::reachable(chain, 0, false).size() == s && detail::reachable(chain, 0, true).size() == s;

    if (out.irreducible) {
        std::vector<std::size_t> all(s);
        for (std::size_t i = 0; i < s; ++i) all[i] = i;
        out.aperiodic = detail::component_period(chain, all) == 1;
        return out;
    }

    // Reducible chain: a state set can still be aperiodic componentwise.
    // Report gcd of cycle lengths across the components that have cycles.
    std::vector<char> assigned(s, 0);
    long g = 0;
    for (std::size_t v = 0; v < s; ++v) {
        if (assigned[v]) continue;
        auto fwd = detail::reachable(chain, v, false);
        auto bwd = detail::reachable(chain, v, true);
        std::vector<std::size_t> comp;
        std::set_intersection(fwd.begin(), fwd.end(), bwd.begin(), bwd.end(), std::back_inserter(comp));
        for (std::size_t u : comp) assigned[u] = 1;
        bool has_edge = false;
        for (std::size_t a : comp)
            for (std::size_t b : comp)
                if (chain(a, b) > 0.0) has_edge = true;
        if (has_edge) g = std::gcd(g, detail::component_period(chain, comp));
    }
    out.aperiodic = (g == 1);
    return out;
}

/// Probability vector fixed under the chain: pi G = pi.
struct StationaryDistribution {
    std::vector<double> pi;
};

/// Direct linear solve of (G^T - I) pi = 0 with the normalization row
/// appended; exactness at s <= 16 matters more than scale here.
/// Requires an ergodic (irreducible + aperiodic) chain.
inline StationaryDistribution stationary_distribution(const MarkovChain& chain) {
    const auto cls = validate_chain(chain);
    if (!cls.ergodic())
        throw ValidationError("stationary_distribution: chain is not ergodic (irreducible=" +
                              std::to_string(cls.irreducible) +
                              ", aperiodic=" + std::to_string(cls.aperiodic) + ")");
    const std::size_t s = chain.size();
    Matrix a(s, s);
    std::vector<double> b(s, 0.0);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) a(i, j) = chain(j, i) - (i == j ? 1.0 : 0.0);
    // Replace the last equation with sum(pi) = 1.
    for (std::size_t j = 0; j < s; ++j) a(s - 1, j) = 1.0;
    b[s - 1] = 1.0;
    auto pi = solve_linear(a, b);

    double sum = 0.0;
    for (double& v : pi) {
        if (v < -kDerivedTol)
            throw ValidationError("stationary_distribution: negative stationary mass");
        v = std::max(v, 0.0);
        sum += v;
    }
    for (double& v : pi) v /= sum;
    for (std::size_t j = 0; j < s; ++j) {
        double pj = 0.0;
        for (std::size_t i = 0; i < s; ++i) pj += pi[i] * chain(i, j);
        if (std::fabs(pj - pi[j]) > kDerivedTol)
            throw ValidationError("stationary_distribution: pi G = pi residual too large");
    }
    return {pi};
}

/// Exact n-step transition matrix G^n by repeated squaring.
inline Matrix n_step_matrix(const MarkovChain& chain, unsigned long n) {
    if (n < 1) throw ValidationError("n_step_matrix: n must be >= 1");
    Matrix result = Matrix::identity(chain.size());
    Matrix base = chain.matrix();
    while (n > 0) {
        if (n & 1UL) result = result * base;
        base = base * base;
        n >>= 1UL;
    }
    return result;
}

/// Multiplicative deviation profile eps_n = max_{i,j} |G^n_{i,j} - pi_j| / min_j pi_j
/// together with the rate C of a least-squares fit eps_n ~ exp(-C n).
struct ConvergenceProfile {
    std::vector<double> epsilon;  // epsilon[n-1] holds eps_n, n = 1..N
    double fitted_rate = 0.0;     // NaN when fewer than two resolvable points
};

inline ConvergenceProfile convergence_profile(const MarkovChain& chain, std::size_t horizon) {
    const auto pi = stationary_distribution(chain).pi; // throws on non-ergodic chains
    const std::size_t s = chain.size();
    double min_pi = 1.0;
    for (double v : pi) min_pi = std::min(min_pi, v);

    ConvergenceProfile out;
    out.epsilon.reserve(horizon);
    Matrix gn = Matrix::identity(s);
    for (std::size_t n = 1; n <= horizon; ++n) {
        gn = gn * chain.matrix();
        double dev = 0.0;
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) dev = std::max(dev, std::fabs(gn(i, j) - pi[j]));
        out.epsilon.push_back(dev / min_pi);
    }
    if (!out.epsilon.empty() && out.epsilon.back() > out.epsilon.front() + 1e-15)
        throw ValidationError("convergence_profile: deviation grew with n (non-ergodic input?)");

    // Fit log eps_n = a - C n over the points still above floating-point noise.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t n = 1; n <= out.epsilon.size(); ++n) {
        const double e = out.epsilon[n - 1];
        if (e <= 1e-14) continue;
        const double x = static_cast<double>(n), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2 && (m * sxx - sx * sx) > 0)
        out.fitted_rate = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    else
        out.fitted_rate = std::numeric_limits<double>::quiet_NaN();
    return out;
}

} // namespace idscap
