// Genie-aided capacity upper bounds for Markov deletion channels: the
// conditioned-DMC decomposition bound, the i.i.d. baseline with the same
// block-wise side information, the joint-output fallback bound, and the
// parameter sweeps behind the figures.
//
// Revealing per-block side information (boundaries, initial state, post-block
// state, output length) to both ends turns the channel into a weighted family
// of DMCs known to both parties, so the weighted average of their capacities,
// divided by the block length, upper-bounds the original capacity.
#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "idscap/channel.hpp"
#include "idscap/enumeration.hpp"
#include "idscap/errors.hpp"
#include "idscap/format.hpp"
#include "idscap/info.hpp"
#include "idscap/parallel.hpp"

namespace idscap {

/// Two-state sweep point plus solver settings.
struct BoundConfig {
    bool iid = false;              // single-state baseline channel
    double delta = 0.1;            // average deletion probability
    double ratio = 2.0;            // D/d (ignored for iid)
    double alpha = 0.25;           // 1 -> 2 switch probability
    double alpha_over_beta = 1.0;  // determines beta = alpha / alpha_over_beta
    unsigned k = 1;                // block length
    double ba_tolerance = 1e-9;    // total capacity error budget of the bound
    long ba_max_iters = 1000000;
    InitialState rho = InitialState::Stationary(); // block-initial state policy
    unsigned threads = 1;
    bool fold_complement = false;  // halve BA input space by 0/1 symmetry

    double beta() const { return alpha / alpha_over_beta; }

    MarkovIDSChannel make_channel() const {
        if (iid) return iid_deletion_channel(delta);
        return two_state_deletion_channel(resolve_two_state_params(delta, ratio, alpha, beta()), rho);
    }

    std::string cache_key() const {
        std::ostringstream os;
        os << (iid ? "iid" : "markov") << "|delta=" << fmt_g12(delta) << "|ratio=" << fmt_g12(ratio)
           << "|alpha=" << fmt_g12(alpha) << "|aob=" << fmt_g12(alpha_over_beta) << "|k=" << k
           << "|tol=" << fmt_g12(ba_tolerance) << "|fold=" << fold_complement;
        return os.str();
    }
};

struct DmcSolve {
    std::size_t sigma_init = 0;
    std::size_t sigma_final = 0;
    unsigned m = 0;
    double weight = 0.0;
    double capacity_bits = 0.0;
    double bracket = 0.0;
    long iterations = 0;
};

struct BoundReport {
    double bound_bits_per_symbol = 0.0;
    std::vector<DmcSolve> per_dmc; // sorted by (sigma_init, sigma_final, m)
    double dropped_weight_mass = 0.0;
    double ba_budget = 0.0;        // aggregate half-bracket error budget
    unsigned k = 1;
    double log2_input_alphabet = 1.0;
    double wall_time_seconds = 0.0;
};

namespace detail {

/// Folds a binary-alphabet DMC onto complement-orbit representatives. The
/// channel is invariant under complementing inputs and outputs, so a
/// symmetric optimal input exists and the folded channel has the same
/// capacity with half the rows.
inline FiniteChannel fold_complement_inputs(const FiniteChannel& w, unsigned k) {
    const std::uint64_t n = w.num_inputs();
    const std::uint64_t x_all = n - 1; // inputs are the 2^k binary blocks
    std::vector<std::vector<FiniteChannel::Entry>> rows;
    rows.reserve(n / 2);
    for (std::uint64_t x = 0; x < n; ++x) {
        if ((x ^ x_all) < x) continue;
        rows.push_back(w.row(x));
    }
    (void)k;
    return FiniteChannel(w.num_outputs(), std::move(rows));
}

inline DmcSolve solve_dmc(const ConditionedDMC& dmc, double tolerance, long max_iters,
                          bool fold_complement, unsigned input_alphabet) {
    DmcSolve out;
    out.sigma_init = dmc.sigma_init;
    out.sigma_final = dmc.sigma_final;
    out.m = dmc.m;
    out.weight = dmc.weight;
    const bool fold = fold_complement && input_alphabet == 2 && dmc.dmc.num_inputs() >= 2;
    const auto sol = fold ? blahut_arimoto(fold_complement_inputs(dmc.dmc, dmc.k), tolerance, max_iters)
                          : blahut_arimoto(dmc.dmc, tolerance, max_iters);
    out.capacity_bits = sol.capacity_bits;
    out.bracket = sol.bracket();
    out.iterations = sol.iterations;
    return out;
}

/// Counts the decomposition's surviving DMCs without building their matrices
/// (pure-deletion channels only), so the per-DMC tolerance can be fixed
/// before any solve.
inline std::size_t count_deletion_dmcs(const MarkovIDSChannel& channel, unsigned k) {
    const auto law = pattern_state_probs(channel.chain(), channel.deletion_probs(), k);
    const std::size_t s = law.s;
    std::vector<double> totals((k + 1) * s * s, 0.0);
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
        const unsigned m = static_cast<unsigned>(std::popcount(mask));
        for (std::size_t i = 0; i < s * s; ++i) totals[m * s * s + i] += law.per_pattern[mask][i];
    }
    std::size_t count = 0;
    for (unsigned m = 0; m <= k; ++m)
        for (std::size_t sg = 0; sg < s; ++sg)
            for (std::size_t tau = 0; tau < s; ++tau)
                if (channel.rho()[sg] * totals[m * s * s + sg * s + tau] >= kWeightCutoff) ++count;
    return count;
}

} // namespace detail

/// The conditioned-DMC decomposition bound: (1/k) sum of weight x capacity
/// over all (sigma_init, sigma_final, m) triples, plus the conservative
/// dropped-mass charge. Requires input-independent side information; a
/// SideInfoError from the decomposition directs callers to joint_upper_bound.
inline BoundReport genie_upper_bound(const MarkovIDSChannel& channel, const BoundConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const unsigned k = config.k;
    if (k < 1) throw ValidationError("genie_upper_bound: k must be >= 1");

    BoundReport report;
    report.k = k;
    report.log2_input_alphabet = std::log2(static_cast<double>(channel.input_alphabet()));

    std::vector<ConditionedDMC> group;
    std::vector<DmcSolve> solved;
    double per_dmc_tol = 0.0;

    auto flush_group = [&] {
        if (group.empty()) return;
        auto results = parallel_map<DmcSolve>(group.size(), config.threads, [&](std::size_t i) {
            return detail::solve_dmc(group[i], per_dmc_tol, config.ba_max_iters, config.fold_complement,
                                     channel.input_alphabet());
        });
        for (auto& r : results) solved.push_back(r);
        group.clear();
    };

    if (channel.all_pure_deletion()) {
        const std::size_t n_dmcs = detail::count_deletion_dmcs(channel, k);
        per_dmc_tol = config.ba_tolerance / (static_cast<double>(k) * static_cast<double>(n_dmcs));
        unsigned current_m = 0;
        report.dropped_weight_mass = for_each_conditioned_dmc(channel, k, [&](ConditionedDMC dmc) {
            if (dmc.m != current_m) {
                flush_group();
                current_m = dmc.m;
            }
            group.push_back(std::move(dmc));
        });
        flush_group();
    } else {
        auto dec = conditioned_dmcs(channel, k);
        per_dmc_tol =
            config.ba_tolerance / (static_cast<double>(k) * static_cast<double>(dec.dmcs.size()));
        report.dropped_weight_mass = dec.dropped_mass;
        auto results = parallel_map<DmcSolve>(dec.dmcs.size(), config.threads, [&](std::size_t i) {
            return detail::solve_dmc(dec.dmcs[i], per_dmc_tol, config.ba_max_iters,
                                     config.fold_complement, channel.input_alphabet());
        });
        solved = std::move(results);
    }

    std::sort(solved.begin(), solved.end(), [](const DmcSolve& a, const DmcSolve& b) {
        return std::tie(a.sigma_init, a.sigma_final, a.m) < std::tie(b.sigma_init, b.sigma_final, b.m);
    });

    // Fixed-order aggregation for cross-run determinism.
    double weighted = 0.0, budget = 0.0;
    for (const auto& r : solved) {
        weighted += r.weight * r.capacity_bits;
        budget += r.weight * 0.5 * r.bracket;
    }
    const double inv_k = 1.0 / static_cast<double>(k);
    report.per_dmc = std::move(solved);
    report.bound_bits_per_symbol =
        inv_k * weighted +
        inv_k * report.dropped_weight_mass * static_cast<double>(k) * report.log2_input_alphabet;
    report.ba_budget = inv_k * budget;

    if (report.bound_bits_per_symbol < -1e-9 ||
        report.bound_bits_per_symbol > report.log2_input_alphabet + 1e-9)
        throw Error("genie_upper_bound: aggregate bound " +
                    std::to_string(report.bound_bits_per_symbol) + " escaped [0, log2 |X|]");
    report.bound_bits_per_symbol =
        std::min(std::max(report.bound_bits_per_symbol, 0.0), report.log2_input_alphabet);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

inline BoundReport genie_upper_bound(const BoundConfig& config) {
    return genie_upper_bound(config.make_channel(), config);
}

/// Single-state instance of the decomposition: the binary i.i.d. deletion
/// channel with the same block-wise side information. Weights reduce to
/// binomial coefficients and the state side information is vacuous, so this
/// conditions on the output length only.
inline BoundReport iid_upper_bound(double delta, unsigned k, double ba_tolerance = 1e-9,
                                   unsigned threads = 1) {
    BoundConfig config;
    config.iid = true;
    config.delta = delta;
    config.k = k;
    config.ba_tolerance = ba_tolerance;
    config.threads = threads;
    return genie_upper_bound(config);
}

/// Fallback bound without the decomposition: one channel whose output is the
/// triple (glued output, initial state, post-block state), solved as a whole.
/// Valid even when the side information depends on the input, because extra
/// receiver-side outputs can only increase capacity.
inline BoundReport joint_upper_bound(const MarkovIDSChannel& channel, unsigned k,
                                     double ba_tolerance = 1e-9, long ba_max_iters = 1000000) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto law = block_law_general(channel, k);
    const std::size_t s = law.s;
    const auto& rho = channel.rho();

    // Column label: (sigma_init, sigma_final) page, then canonical word index.
    const std::uint64_t page = word_space_size(law.output_alphabet, channel.max_output_len() * k);
    std::vector<std::uint64_t> labels;
    for (std::size_t xi = 0; xi < law.per_input.size(); ++xi)
        for (const auto& e : law.per_input[xi])
            for (std::size_t st = 0; st < s * s; ++st)
                if (rho[st / s] * e.st[st] > 0.0) labels.push_back(st * page + e.y_index);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    std::vector<std::vector<FiniteChannel::Entry>> rows(law.per_input.size());
    for (std::size_t xi = 0; xi < law.per_input.size(); ++xi) {
        std::vector<std::pair<std::uint64_t, double>> entries;
        for (const auto& e : law.per_input[xi])
            for (std::size_t st = 0; st < s * s; ++st) {
                const double p = rho[st / s] * e.st[st];
                if (p > 0.0) entries.emplace_back(st * page + e.y_index, p);
            }
        std::sort(entries.begin(), entries.end());
        rows[xi].reserve(entries.size());
        for (const auto& [label, p] : entries) {
            const auto col = static_cast<std::uint32_t>(
                std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
            rows[xi].push_back({col, p});
        }
    }
    const std::size_t num_cols = labels.size();
    FiniteChannel joint(num_cols, std::move(rows), std::move(labels));
    const auto sol = blahut_arimoto(joint, ba_tolerance, ba_max_iters);

    BoundReport report;
    report.k = k;
    report.log2_input_alphabet = std::log2(static_cast<double>(channel.input_alphabet()));
    report.per_dmc = {{0, 0, 0, 1.0, sol.capacity_bits, sol.bracket(), sol.iterations}};
    report.bound_bits_per_symbol = sol.capacity_bits / static_cast<double>(k);
    report.ba_budget = 0.5 * sol.bracket() / static_cast<double>(k);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// =============================================================================
// Parameter sweeps
// =============================================================================

struct SweepGrid {
    std::vector<double> deltas{0.1};
    std::vector<double> ratios{2.0};
    std::vector<double> alphas{0.25};
    std::vector<double> alpha_over_betas{1.0};
    bool iid_baseline = false; // append one single-state row per delta

    /// The published experimental grid: delta in {0.01, 0.1, 0.5},
    /// D/d in {2, 4, 8}, alpha in {1/2, 1/4, 1/8, 1/16},
    /// alpha/beta in {1/2, 1, 2}, plus the i.i.d. baseline curves.
    static SweepGrid Paper() {
        SweepGrid g;
        g.deltas = {0.01, 0.1, 0.5};
        g.ratios = {2.0, 4.0, 8.0};
        g.alphas = {0.5, 0.25, 0.125, 0.0625};
        g.alpha_over_betas = {0.5, 1.0, 2.0};
        g.iid_baseline = true;
        return g;
    }
};

struct SweepRow {
    bool iid_baseline = false;
    double delta = 0.0;
    double ratio = 1.0;
    double alpha = 0.0;
    double alpha_over_beta = 0.0;
    unsigned k = 1;
    bool feasible = true;
    std::string error;
    double bound_bits = 0.0;
    double dropped_mass = 0.0;
    double ba_budget = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    unsigned k = 1;
    double ba_tolerance = 1e-9;
};

/// Evaluates the full cartesian grid. Infeasible points are recorded with
/// their reason, never silently dropped. Rows are computed in parallel but
/// emitted in grid order, so output is independent of the thread count.
inline SweepTable sweep(const SweepGrid& grid, unsigned k, double ba_tolerance = 1e-9,
                        unsigned threads = 1) {
    std::vector<BoundConfig> configs;
    for (double delta : grid.deltas)
        for (double ratio : grid.ratios)
            for (double aob : grid.alpha_over_betas)
                for (double alpha : grid.alphas) {
                    BoundConfig c;
                    c.delta = delta;
                    c.ratio = ratio;
                    c.alpha = alpha;
                    c.alpha_over_beta = aob;
                    c.k = k;
                    c.ba_tolerance = ba_tolerance;
                    configs.push_back(c);
                }
    if (grid.iid_baseline)
        for (double delta : grid.deltas) {
            BoundConfig c;
            c.iid = true;
            c.delta = delta;
            c.k = k;
            c.ba_tolerance = ba_tolerance;
            configs.push_back(c);
        }

    auto rows = parallel_map<SweepRow>(configs.size(), threads, [&](std::size_t i) {
        const BoundConfig& c = configs[i];
        SweepRow row;
        row.iid_baseline = c.iid;
        row.delta = c.delta;
        row.ratio = c.iid ? 1.0 : c.ratio;
        row.alpha = c.iid ? 0.0 : c.alpha;
        row.alpha_over_beta = c.iid ? 0.0 : c.alpha_over_beta;
        row.k = k;
        try {
            const auto report = genie_upper_bound(c);
            row.bound_bits = report.bound_bits_per_symbol;
            row.dropped_mass = report.dropped_weight_mass;
            row.ba_budget = report.ba_budget;
        } catch (const InfeasibleError& e) {
            row.feasible = false;
            row.error = e.what();
            row.bound_bits = row.dropped_mass = row.ba_budget =
                std::numeric_limits<double>::quiet_NaN();
        }
        return row;
    });

    SweepTable table;
    table.rows = std::move(rows);
    table.k = k;
    table.ba_tolerance = ba_tolerance;
    return table;
}

/// CSV rendering, gnuplot-compatible: '#' metadata lines, then the exact
/// column header, one row per grid point with 12-significant-digit values.
inline std::string sweep_csv(const SweepTable& table) {
    std::ostringstream key;
    key << "sweep|k=" << table.k << "|tol=" << fmt_g12(table.ba_tolerance);
    for (const auto& r : table.rows)
        key << "|" << r.iid_baseline << "," << fmt_g12(r.delta) << "," << fmt_g12(r.ratio) << ","
            << fmt_g12(r.alpha) << "," << fmt_g12(r.alpha_over_beta);

    std::ostringstream os;
    os << "# " << kVersion << " sweep\n";
    os << "# config " << fnv1a64_hex(key.str()) << "\n";
    os << "# k=" << table.k << " ba_tolerance=" << fmt_g12(table.ba_tolerance) << "\n";
    os << "# iid baseline rows carry ratio=1 and alpha=alpha_over_beta=inv_alpha=0\n";
    os << "delta,ratio,alpha,alpha_over_beta,inv_alpha,k,bound_bits,dropped_mass,ba_budget\n";
    for (const auto& r : table.rows) {
        if (!r.feasible) os << "# infeasible: " << r.error << "\n";
        const double inv_alpha = r.alpha > 0.0 ? 1.0 / r.alpha : 0.0;
        os << fmt_g12(r.delta) << ',' << fmt_g12(r.ratio) << ',' << fmt_g12(r.alpha) << ','
           << fmt_g12(r.alpha_over_beta) << ',' << fmt_g12(inv_alpha) << ',' << r.k << ','
           << fmt_g12(r.bound_bits) << ',' << fmt_g12(r.dropped_mass) << ',' << fmt_g12(r.ba_budget)
           << "\n";
    }
    return os.str();
}

/// Per-DMC summary CSV for a single bound report.
inline std::string bound_report_csv(const BoundReport& report) {
    std::ostringstream os;
    os << "# " << kVersion << " bound report\n";
    os << "# k=" << report.k << " bound_bits=" << fmt_g12(report.bound_bits_per_symbol)
       << " dropped_mass=" << fmt_g12(report.dropped_weight_mass)
       << " ba_budget=" << fmt_g12(report.ba_budget) << "\n";
    os << "sigma,tau,m,weight,capacity_bits,bracket,iterations\n";
    for (const auto& r : report.per_dmc)
        os << r.sigma_init << ',' << r.sigma_final << ',' << r.m << ',' << fmt_g12(r.weight) << ','
           << fmt_g12(r.capacity_bits) << ',' << fmt_g12(r.bracket) << ',' << r.iterations << "\n";
    return os.str();
}

} // namespace idscap
