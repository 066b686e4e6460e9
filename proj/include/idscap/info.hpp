// Information-theoretic kernel: information density, mutual information and
// its variance, channel capacity via Blahut-Arimoto, perturbed input
// distributions, and the minimum-log-probability statistic.
//
// All logarithms are base 2 and every quantity is in bits. Degenerate terms
// follow the density zero convention: the density is 0 whenever W(y|x) = 0
// or the output probability is 0, and 0*log(0) = 0 throughout. Channel
// entries are never epsilon-smoothed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "idscap/errors.hpp"
#include "idscap/markov.hpp"

namespace idscap {

/// Probability vector on a finite indexed set.
class DiscreteDistribution {
  public:
    explicit DiscreteDistribution(std::vector<double> probs) : p_(std::move(probs)) {
        double sum = 0.0;
        for (double v : p_) {
            if (v < 0.0) throw ValidationError("DiscreteDistribution: negative probability");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > kConstructTol)
            throw ValidationError("DiscreteDistribution: sums to " + std::to_string(sum) + ", not 1");
    }

    static DiscreteDistribution Uniform(std::size_t n) {
        return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }
    static DiscreteDistribution PointMass(std::size_t n, std::size_t at) {
        std::vector<double> p(n, 0.0);
        p.at(at) = 1.0;
        return DiscreteDistribution(std::move(p));
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& probs() const { return p_; }

  private:
    std::vector<double> p_;
};

/// (1 - delta) p + delta * uniform over the same index set.
inline DiscreteDistribution perturb_distribution(const DiscreteDistribution& p, double delta) {
    if (delta < 0.0 || delta > 1.0) throw ValidationError("perturb_distribution: delta outside [0,1]");
    std::vector<double> out(p.size());
    const double u = 1.0 / static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - delta) * p[i] + delta * u;
    return DiscreteDistribution(std::move(out));
}

/// Sparse row-stochastic channel: each input row holds its nonzero
/// transition probabilities over a compact output index space [0, num_outputs).
/// Optional column labels keep the canonical identity of each output.
class FiniteChannel {
  public:
    struct Entry {
        std::uint32_t col;
        double prob;
    };

    FiniteChannel(std::size_t num_outputs, std::vector<std::vector<Entry>> rows,
                  std::vector<std::uint64_t> col_labels = {})
        : num_outputs_(num_outputs), rows_(std::move(rows)), col_labels_(std::move(col_labels)) {
        if (!col_labels_.empty() && col_labels_.size() != num_outputs_)
            throw ValidationError("FiniteChannel: column label count mismatch");
        for (std::size_t x = 0; x < rows_.size(); ++x) {
            double sum = 0.0;
            std::uint32_t prev = 0;
            bool first = true;
            for (auto& e : rows_[x]) {
                if (e.col >= num_outputs_) throw ValidationError("FiniteChannel: column out of range");
                if (!first && e.col <= prev)
                    throw ValidationError("FiniteChannel: row entries must be strictly increasing");
                if (e.prob < 0.0) throw ValidationError("FiniteChannel: negative probability");
                prev = e.col;
                first = false;
                sum += e.prob;
            }
            if (std::fabs(sum - 1.0) > kDerivedTol)
                throw ValidationError("FiniteChannel: row " + std::to_string(x) + " sums to " +
                                      std::to_string(sum) + ", not 1");
        }
    }

    /// Dense constructor for small hand-written channels.
    static FiniteChannel Dense(const std::vector<std::vector<double>>& matrix) {
        std::vector<std::vector<Entry>> rows(matrix.size());
        std::size_t cols = matrix.empty() ? 0 : matrix[0].size();
        for (std::size_t x = 0; x < matrix.size(); ++x) {
            if (matrix[x].size() != cols) throw ValidationError("FiniteChannel: ragged matrix");
            for (std::size_t y = 0; y < cols; ++y)
                if (matrix[x][y] != 0.0) rows[x].push_back({static_cast<std::uint32_t>(y), matrix[x][y]});
        }
        return FiniteChannel(cols, std::move(rows));
    }

    std::size_t num_inputs() const { return rows_.size(); }
    std::size_t num_outputs() const { return num_outputs_; }
    const std::vector<Entry>& row(std::size_t x) const { return rows_.at(x); }
    const std::vector<std::uint64_t>& col_labels() const { return col_labels_; }

    double prob(std::size_t x, std::size_t y) const {
        for (const auto& e : rows_.at(x))
            if (e.col == y) return e.prob;
        return 0.0;
    }

    /// Output distribution p . W (dense over the compact column space).
    std::vector<double> output_distribution(const DiscreteDistribution& p) const {
        if (p.size() != rows_.size()) throw ValidationError("output_distribution: size mismatch");
        std::vector<double> q(num_outputs_, 0.0);
        for (std::size_t x = 0; x < rows_.size(); ++x) {
            const double px = p[x];
            if (px == 0.0) continue;
            for (const auto& e : rows_[x]) q[e.col] += px * e.prob;
        }
        return q;
    }

  private:
    std::size_t num_outputs_;
    std::vector<std::vector<Entry>> rows_;
    std::vector<std::uint64_t> col_labels_;
};

/// Mutual information density i(W, p, x, y) in bits.
inline double information_density(const FiniteChannel& w, const DiscreteDistribution& p, std::size_t x,
                                  std::size_t y) {
    const double wyx = w.prob(x, y);
    if (wyx == 0.0) return 0.0;
    double qy = 0.0;
    for (std::size_t xx = 0; xx < w.num_inputs(); ++xx) {
        if (p[xx] == 0.0) continue;
        qy += p[xx] * w.prob(xx, y);
    }
    if (qy == 0.0) return 0.0;
    return std::log2(wyx / qy);
}

/// I(W, p): expectation of the information density under p o W.
inline double mutual_information(const FiniteChannel& w, const DiscreteDistribution& p) {
    const auto q = w.output_distribution(p);
    double total = 0.0;
    for (std::size_t x = 0; x < w.num_inputs(); ++x) {
        const double px = p[x];
        if (px == 0.0) continue;
        for (const auto& e : w.row(x)) {
            if (e.prob == 0.0) continue;
            total += px * e.prob * std::log2(e.prob / q[e.col]);
        }
    }
    return total;
}

/// V(W, p): variance of the information density under p o W.
inline double mi_variance(const FiniteChannel& w, const DiscreteDistribution& p) {
    const auto q = w.output_distribution(p);
    double mean = 0.0, second = 0.0;
    for (std::size_t x = 0; x < w.num_inputs(); ++x) {
        const double px = p[x];
        if (px == 0.0) continue;
        for (const auto& e : w.row(x)) {
            if (e.prob == 0.0) continue;
            const double dens = std::log2(e.prob / q[e.col]);
            const double mass = px * e.prob;
            mean += mass * dens;
            second += mass * dens * dens;
        }
    }
    return std::max(0.0, second - mean * mean);
}

/// phi: -log2 of the smallest nonzero transition probability.
inline double min_log_prob(const FiniteChannel& w) {
    double min_pos = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < w.num_inputs(); ++x)
        for (const auto& e : w.row(x))
            if (e.prob > 0.0) min_pos = std::min(min_pos, e.prob);
    if (!std::isfinite(min_pos)) throw ValidationError("min_log_prob: channel has no positive entry");
    return -std::log2(min_pos);
}

/// Entropy in bits of the output row for input x.
inline double output_entropy(const FiniteChannel& w, std::size_t x) {
    double h = 0.0;
    for (const auto& e : w.row(x))
        if (e.prob > 0.0) h -= e.prob * std::log2(e.prob);
    return h;
}

/// Capacity solution with the Arimoto bracket retained for diagnostics.
struct BASolution {
    double capacity_bits = 0.0;           // bracket midpoint
    DiscreteDistribution input_dist{std::vector<double>{1.0}};
    double lower_gap = 0.0;               // capacity_bits - lower bracket edge
    double upper_gap = 0.0;               // upper bracket edge - capacity_bits
    long iterations = 0;

    double bracket() const { return lower_gap + upper_gap; }
    double lower_bound() const { return capacity_bits - lower_gap; }
    double upper_bound() const { return capacity_bits + upper_gap; }
};

/// Blahut-Arimoto alternating maximization from the uniform initialization.
/// Terminates when the Arimoto bracket (max row divergence vs. their
/// log-mixture) is <= tolerance and reports the bracket midpoint. The
/// returned input distribution is the final iterate, whose mutual
/// information is at least the lower bracket edge.
///
/// Input masses are tracked in log2 domain so transient decay of suboptimal
/// inputs cannot underflow them to zero; per-iteration cost is proportional
/// to the number of nonzero transition probabilities.
inline BASolution blahut_arimoto(const FiniteChannel& w, double tolerance = 1e-9,
                                 long max_iters = 100000) {
    if (tolerance <= 0.0) throw ValidationError("blahut_arimoto: tolerance must be positive");
    const std::size_t nx = w.num_inputs();
    const std::size_t ny = w.num_outputs();
    if (nx == 0) throw ValidationError("blahut_arimoto: empty channel");

    // Flatten to CSR once; cache w*log2(w) per entry so the inner loop is
    // pure multiply-add plus one log2 per active output column.
    std::vector<std::size_t> rowptr(nx + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t x = 0; x < nx; ++x) {
        for (const auto& e : w.row(x))
            if (e.prob > 0.0) ++nnz;
        rowptr[x + 1] = nnz;
    }
    std::vector<std::uint32_t> col(nnz);
    std::vector<double> prob(nnz);
    std::vector<double> rh(nx, 0.0); // sum_y w log2 w per row
    {
        std::size_t k = 0;
        for (std::size_t x = 0; x < nx; ++x) {
            for (const auto& e : w.row(x)) {
                if (e.prob <= 0.0) continue;
                col[k] = e.col;
                prob[k] = e.prob;
                rh[x] += e.prob * std::log2(e.prob);
                ++k;
            }
        }
    }

    std::vector<double> lp(nx, -std::log2(static_cast<double>(nx))); // log2 p(x)
    std::vector<double> p(nx), q(ny), lq(ny), div(nx);

    BASolution sol;
    for (long iter = 1; iter <= max_iters; ++iter) {
        for (std::size_t x = 0; x < nx; ++x) p[x] = std::exp2(lp[x]);
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            const double px = p[x];
            if (px == 0.0) continue;
            for (std::size_t k = rowptr[x]; k < rowptr[x + 1]; ++k) q[col[k]] += px * prob[k];
        }
        for (std::size_t y = 0; y < ny; ++y)
            lq[y] = q[y] > 0.0 ? std::log2(q[y]) : -std::numeric_limits<double>::infinity();

        double upper = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            double cross = 0.0;
            for (std::size_t k = rowptr[x]; k < rowptr[x + 1]; ++k) cross += prob[k] * lq[col[k]];
            div[x] = rh[x] - cross; // D( W(.|x) || q ) in bits
            upper = std::max(upper, div[x]);
        }

        // lower = log2 sum_x p(x) 2^div(x), evaluated as a log-sum-exp.
        double tmax = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < nx; ++x) tmax = std::max(tmax, lp[x] + div[x]);
        double zsum = 0.0;
        for (std::size_t x = 0; x < nx; ++x) zsum += std::exp2(lp[x] + div[x] - tmax);
        const double lower = tmax + std::log2(zsum);

        for (std::size_t x = 0; x < nx; ++x) lp[x] += div[x] - lower;

        if (upper - lower <= tolerance) {
            std::vector<double> pout(nx);
            double sum = 0.0;
            for (std::size_t x = 0; x < nx; ++x) sum += (pout[x] = std::exp2(lp[x]));
            for (double& v : pout) v /= sum;
            sol.capacity_bits = 0.5 * (lower + upper);
            sol.input_dist = DiscreteDistribution(std::move(pout));
            sol.lower_gap = sol.capacity_bits - lower;
            sol.upper_gap = upper - sol.capacity_bits;
            sol.iterations = iter;
            return sol;
        }
        if (iter == max_iters)
            throw ConvergenceError("blahut_arimoto: bracket [" + std::to_string(lower) + ", " +
                                       std::to_string(upper) + "] after " + std::to_string(iter) +
                                       " iterations exceeds tolerance " + std::to_string(tolerance),
                                   lower, upper, iter);
    }
    throw ConvergenceError("blahut_arimoto: max_iters must be positive", 0.0, 0.0, 0);
}

} // namespace idscap
