// Exact enumeration of k-symbol block transition laws for Markov-IDS
// channels: keep/delete pattern probabilities, the general block law with
// tracked final state, the conditioned DMC decomposition with occurrence
// weights, and the exact glued channel law.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "idscap/channel.hpp"
#include "idscap/errors.hpp"
#include "idscap/info.hpp"
#include "idscap/words.hpp"

namespace idscap {

// Occurrence weights below this cutoff are dropped from a decomposition and
// reported as dropped mass; the bound assembly charges them the maximum
// conditional capacity so the upper bound stays valid.
inline constexpr double kWeightCutoff = 1e-15;

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t base, unsigned exp, std::uint64_t cap) {
    std::uint64_t v = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (v > cap / std::max<std::uint64_t>(base, 1)) return cap;
        v *= base;
    }
    return v;
}

/// Upper bound on the number of (input, output) pairs of the k-block law.
inline std::uint64_t block_pair_estimate(const MarkovIDSChannel& channel, unsigned k) {
    constexpr std::uint64_t kCap = ~0ULL >> 1;
    std::uint64_t max_atoms = 1;
    for (std::size_t s = 0; s < channel.num_states(); ++s)
        for (unsigned x = 0; x < channel.input_alphabet(); ++x)
            max_atoms = std::max<std::uint64_t>(max_atoms, channel.state(s).atoms(x).size());
    const std::uint64_t inputs = checked_pow(channel.input_alphabet(), k, kCap);
    const std::uint64_t by_paths = checked_pow(max_atoms, k, kCap);
    std::uint64_t by_words = 0, pw = 1;
    const unsigned max_len = channel.max_output_len() * k;
    for (unsigned l = 0; l <= max_len; ++l) {
        by_words += pw;
        if (by_words >= kCap || pw > kCap / std::max(1u, channel.output_alphabet())) {
            by_words = kCap;
            break;
        }
        pw *= channel.output_alphabet();
    }
    const std::uint64_t per_input = std::min(by_paths, by_words);
    if (inputs > kCap / std::max<std::uint64_t>(per_input, 1)) return kCap;
    return inputs * per_input;
}

/// Length-major, then lexicographic: the canonical output order.
struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

} // namespace detail

// =============================================================================
// Keep/delete pattern factorization (pure-deletion fast path)
// =============================================================================

/// Joint law of the k-bit keep/delete pattern and the post-block state.
/// Pattern bit for symbol i (0-based) is (mask >> (k-1-i)) & 1, 1 = kept, so
/// the mask integer reads the pattern left to right. The state transition
/// fires after every symbol, including the last, so tau is the state in
/// which symbol k+1 would be transmitted.
struct PatternLaw {
    unsigned k = 0;
    std::size_t s = 0;
    // per_pattern[mask][sigma * s + tau] = Pr[pattern = mask, tau | sigma_init = sigma]
    std::vector<std::vector<double>> per_pattern;

    double prob(std::uint64_t mask, std::size_t sigma, std::size_t tau) const {
        return per_pattern[mask][sigma * s + tau];
    }
};

/// Forward DP over states shared across pattern prefixes; deletion events are
/// input-independent, so one pass serves all q^k inputs.
inline PatternLaw pattern_state_probs(const MarkovChain& chain, const std::vector<double>& deletion_probs,
                                      unsigned k) {
    const std::size_t s = chain.size();
    if (deletion_probs.size() != s)
        throw ValidationError("pattern_state_probs: need one deletion probability per state");
    for (double d : deletion_probs)
        if (d < 0.0 || d > 1.0) throw ValidationError("pattern_state_probs: deletion prob outside [0,1]");
    if (k == 0 || k > 20) throw GuardError("pattern_state_probs: k must be in 1..20");

    PatternLaw law;
    law.k = k;
    law.s = s;
    law.per_pattern.assign(1ULL << k, {});

    // matrices[sigma*s + cur] accumulates Pr[prefix pattern, state cur | sigma].
    std::vector<double> root(s * s, 0.0);
    for (std::size_t i = 0; i < s; ++i) root[i * s + i] = 1.0;

    // Iterative deepening over symbols; prefix order yields masks 0..2^k-1.
    struct Frame {
        std::uint64_t mask;
        std::vector<double> m;
    };
    std::vector<Frame> level{{0, std::move(root)}};
    for (unsigned i = 0; i < k; ++i) {
        std::vector<Frame> next;
        next.reserve(level.size() * 2);
        for (auto& fr : level) {
            for (unsigned bit = 0; bit <= 1; ++bit) {
                std::vector<double> out(s * s, 0.0);
                for (std::size_t sg = 0; sg < s; ++sg) {
                    for (std::size_t cur = 0; cur < s; ++cur) {
                        const double base = fr.m[sg * s + cur];
                        if (base == 0.0) continue;
                        const double q = bit ? 1.0 - deletion_probs[cur] : deletion_probs[cur];
                        if (q == 0.0) continue;
                        for (std::size_t nxt = 0; nxt < s; ++nxt) {
                            const double g = chain(cur, nxt);
                            if (g != 0.0) out[sg * s + nxt] += base * q * g;
                        }
                    }
                }
                next.push_back({fr.mask | (static_cast<std::uint64_t>(bit) << (k - 1 - i)), std::move(out)});
            }
        }
        level = std::move(next);
    }
    for (auto& fr : level) law.per_pattern[fr.mask] = std::move(fr.m);
    return law;
}

// =============================================================================
// General block law (output-map DP over states)
// =============================================================================

/// Exact W_k[sigma -> tau](y | x) for every input block x, stored sparsely.
/// Outputs are canonical word indices in length-major lexicographic order.
struct BlockLaw {
    unsigned k = 0;
    unsigned input_alphabet = 2;
    unsigned output_alphabet = 2;
    std::size_t s = 0;

    struct YEntry {
        std::uint64_t y_index;       // canonical word index
        std::vector<double> st;      // st[sigma * s + tau]
    };
    std::vector<std::vector<YEntry>> per_input; // indexed by block_index(x)

    double prob(std::uint64_t x, std::uint64_t y, std::size_t sigma, std::size_t tau) const {
        for (const auto& e : per_input[x])
            if (e.y_index == y) return e.st[sigma * s + tau];
        return 0.0;
    }
};

/// Forward DP over (symbol index, accumulated output word, current state).
/// Tracks the full matrix Pr[output, state-after-transition | initial state],
/// one transition per symbol including the last.
inline BlockLaw block_law_general(const MarkovIDSChannel& channel, unsigned k) {
    if (k == 0) throw ValidationError("block_law_general: k must be >= 1");
    const std::uint64_t estimate = detail::block_pair_estimate(channel, k);
    constexpr std::uint64_t kGuard = 1ULL << 28;
    if (estimate > kGuard)
        throw GuardError("block_law_general: estimated " + std::to_string(estimate) +
                         " (input,output) pairs exceeds guard " + std::to_string(kGuard));

    const std::size_t s = channel.num_states();
    const unsigned q = channel.input_alphabet();
    BlockLaw law;
    law.k = k;
    law.input_alphabet = q;
    law.output_alphabet = channel.output_alphabet();
    law.s = s;

    const std::uint64_t num_inputs = detail::checked_pow(q, k, ~0ULL >> 1);
    law.per_input.resize(num_inputs);
    using DpMap = std::map<Word, std::vector<double>, detail::WordLess>;

    for (std::uint64_t xi = 0; xi < num_inputs; ++xi) {
        const Word x = index_block(xi, q, k);
        DpMap dp;
        {
            std::vector<double> eye(s * s, 0.0);
            for (std::size_t i = 0; i < s; ++i) eye[i * s + i] = 1.0;
            dp.emplace(Word{}, std::move(eye));
        }
        for (unsigned i = 0; i < k; ++i) {
            DpMap next;
            for (const auto& [word, mat] : dp) {
                for (std::size_t cur = 0; cur < s; ++cur) {
                    bool used = false;
                    for (std::size_t sg = 0; sg < s; ++sg)
                        if (mat[sg * s + cur] != 0.0) used = true;
                    if (!used) continue;
                    for (const auto& atom : channel.state(cur).atoms(x[i])) {
                        if (atom.prob == 0.0) continue;
                        Word grown = word;
                        grown.insert(grown.end(), atom.word.begin(), atom.word.end());
                        auto [it, inserted] = next.emplace(std::move(grown), std::vector<double>());
                        if (inserted) it->second.assign(s * s, 0.0);
                        auto& acc = it->second;
                        for (std::size_t nxt = 0; nxt < s; ++nxt) {
                            const double g = channel.chain()(cur, nxt);
                            if (g == 0.0) continue;
                            const double step = atom.prob * g;
                            for (std::size_t sg = 0; sg < s; ++sg) {
                                const double base = mat[sg * s + cur];
                                if (base != 0.0) acc[sg * s + nxt] += base * step;
                            }
                        }
                    }
                }
            }
            dp = std::move(next);
        }
        auto& out = law.per_input[xi];
        out.reserve(dp.size());
        for (auto& [word, mat] : dp)
            out.push_back({word_index(word, law.output_alphabet), std::move(mat)});
    }
    return law;
}

/// W_k[sigma](y | x) for every initial state, computed with the final-state
/// bookkeeping merged away (k-1 transitions, then one absorbing sum). Used
/// by the glued channel law and as an independent route for checking
/// block_law_general's tau-marginal.
struct MarginalBlockLaw {
    unsigned k = 0;
    unsigned input_alphabet = 2;
    unsigned output_alphabet = 2;
    std::size_t s = 0;
    struct YEntry {
        std::uint64_t y_index;
        std::vector<double> by_sigma; // Pr[y | x, sigma_init]
    };
    std::vector<std::vector<YEntry>> per_input;
};

inline MarginalBlockLaw block_law_marginal(const MarkovIDSChannel& channel, unsigned k,
                                           std::uint64_t pair_guard = 1ULL << 28) {
    if (k == 0) throw ValidationError("block_law_marginal: k must be >= 1");
    const std::uint64_t estimate = detail::block_pair_estimate(channel, k);
    if (estimate > pair_guard)
        throw GuardError("block_law_marginal: estimated " + std::to_string(estimate) +
                         " (input,output) pairs exceeds guard " + std::to_string(pair_guard));

    const std::size_t s = channel.num_states();
    const unsigned q = channel.input_alphabet();
    MarginalBlockLaw law;
    law.k = k;
    law.input_alphabet = q;
    law.output_alphabet = channel.output_alphabet();
    law.s = s;

    const std::uint64_t num_inputs = detail::checked_pow(q, k, ~0ULL >> 1);
    law.per_input.resize(num_inputs);
    using DpMap = std::map<Word, std::vector<double>, detail::WordLess>;

    for (std::uint64_t xi = 0; xi < num_inputs; ++xi) {
        const Word x = index_block(xi, q, k);
        DpMap dp;
        {
            std::vector<double> eye(s * s, 0.0);
            for (std::size_t i = 0; i < s; ++i) eye[i * s + i] = 1.0;
            dp.emplace(Word{}, std::move(eye));
        }
        for (unsigned i = 0; i < k; ++i) {
            const bool last = (i + 1 == k);
            DpMap next;
            for (const auto& [word, mat] : dp) {
                for (std::size_t cur = 0; cur < s; ++cur) {
                    bool used = false;
                    for (std::size_t sg = 0; sg < s; ++sg)
                        if (mat[sg * s + cur] != 0.0) used = true;
                    if (!used) continue;
                    for (const auto& atom : channel.state(cur).atoms(x[i])) {
                        if (atom.prob == 0.0) continue;
                        Word grown = word;
                        grown.insert(grown.end(), atom.word.begin(), atom.word.end());
                        auto [it, inserted] = next.emplace(std::move(grown), std::vector<double>());
                        if (inserted) it->second.assign(s * s, 0.0);
                        auto& acc = it->second;
                        if (last) {
                            // Absorb: no transition after the final symbol.
                            for (std::size_t sg = 0; sg < s; ++sg) {
                                const double base = mat[sg * s + cur];
                                if (base != 0.0) acc[sg * s] += base * atom.prob;
                            }
                        } else {
                            for (std::size_t nxt = 0; nxt < s; ++nxt) {
                                const double g = channel.chain()(cur, nxt);
                                if (g == 0.0) continue;
                                const double step = atom.prob * g;
                                for (std::size_t sg = 0; sg < s; ++sg) {
                                    const double base = mat[sg * s + cur];
                                    if (base != 0.0) acc[sg * s + nxt] += base * step;
                                }
                            }
                        }
                    }
                }
            }
            dp = std::move(next);
        }
        auto& out = law.per_input[xi];
        out.reserve(dp.size());
        for (auto& [word, mat] : dp) {
            std::vector<double> by_sigma(s, 0.0);
            for (std::size_t sg = 0; sg < s; ++sg)
                for (std::size_t t = 0; t < s; ++t) by_sigma[sg] += mat[sg * s + t];
            out.push_back({word_index(word, law.output_alphabet), std::move(by_sigma)});
        }
    }
    return law;
}

// =============================================================================
// Exact glued channel law
// =============================================================================

/// Exact V_n[rho](y | x) as a FiniteChannel over compacted canonical output
/// columns (col_labels give the canonical word index of each column).
inline FiniteChannel exact_channel_law(const MarkovIDSChannel& channel, unsigned n,
                                       const std::vector<double>& rho) {
    if (rho.size() != channel.num_states())
        throw ValidationError("exact_channel_law: initial distribution has wrong length");
    const auto law = block_law_marginal(channel, n, 1ULL << 24);

    std::vector<std::uint64_t> labels;
    for (const auto& row : law.per_input)
        for (const auto& e : row) labels.push_back(e.y_index);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    std::vector<std::vector<FiniteChannel::Entry>> rows(law.per_input.size());
    for (std::size_t xi = 0; xi < law.per_input.size(); ++xi) {
        rows[xi].reserve(law.per_input[xi].size());
        for (const auto& e : law.per_input[xi]) {
            double p = 0.0;
            for (std::size_t sg = 0; sg < law.s; ++sg) p += rho[sg] * e.by_sigma[sg];
            const auto col = static_cast<std::uint32_t>(
                std::lower_bound(labels.begin(), labels.end(), e.y_index) - labels.begin());
            if (p != 0.0) rows[xi].push_back({col, p});
        }
    }
    const std::size_t num_cols = labels.size();
    return FiniteChannel(num_cols, std::move(rows), std::move(labels));
}

inline FiniteChannel exact_channel_law(const MarkovIDSChannel& channel, unsigned n) {
    return exact_channel_law(channel, n, channel.rho());
}

// =============================================================================
// Conditioned DMC decomposition
// =============================================================================

/// The k-symbol block channel given (initial state, post-block state, output
/// length m), with its occurrence weight. Columns of the DMC are the
/// q_out^m words of length m in lexicographic order.
struct ConditionedDMC {
    unsigned k = 0;
    std::size_t sigma_init = 0;
    std::size_t sigma_final = 0;
    unsigned m = 0;
    double weight = 0.0;
    FiniteChannel dmc{0, {}};
};

struct ConditionedDecomposition {
    std::vector<ConditionedDMC> dmcs; // ordered by (sigma_init, sigma_final, m)
    double dropped_mass = 0.0;        // summed weights below kWeightCutoff
};

namespace detail {

/// Builds the conditioned DMCs of one output length m on the pure-deletion
/// fast path and hands each to the visitor. Pattern probabilities are input
/// independent, so they are computed once and reused for all q^k inputs.
template <typename Visitor>
void emit_deletion_dmcs_for_m(const MarkovIDSChannel& channel, const PatternLaw& law, unsigned m,
                              const std::vector<std::uint64_t>& masks, double& dropped_mass,
                              Visitor&& visit) {
    const std::size_t s = law.s;
    const unsigned k = law.k;
    const unsigned q = channel.input_alphabet();
    const auto& rho = channel.rho();

    // Pr[tau, m | sigma] summed over the weight-m masks.
    std::vector<double> total(s * s, 0.0);
    for (std::uint64_t mask : masks)
        for (std::size_t i = 0; i < s * s; ++i) total[i] += law.per_pattern[mask][i];

    std::vector<char> keep(s * s, 0);
    bool any = false;
    for (std::size_t sg = 0; sg < s; ++sg) {
        for (std::size_t tau = 0; tau < s; ++tau) {
            const double w = rho[sg] * total[sg * s + tau];
            if (w == 0.0) continue;
            if (w < kWeightCutoff) {
                dropped_mass += w;
                continue;
            }
            keep[sg * s + tau] = 1;
            any = true;
        }
    }
    if (!any) return;

    const std::uint64_t num_inputs = checked_pow(q, k, ~0ULL >> 1);
    const std::uint64_t num_cols = checked_pow(q, m, ~0ULL >> 1);

    // One row pass builds all surviving (sigma, tau) DMCs of this m.
    std::vector<std::vector<std::vector<FiniteChannel::Entry>>> rows(
        s * s, std::vector<std::vector<FiniteChannel::Entry>>(num_inputs));
    std::vector<double> acc(num_cols * s * s, 0.0);
    std::vector<std::uint64_t> touched;
    touched.reserve(masks.size());

    Word x(k);
    for (std::uint64_t xi = 0; xi < num_inputs; ++xi) {
        {
            std::uint64_t v = xi;
            for (unsigned i = k; i-- > 0;) {
                x[i] = static_cast<Symbol>(v % q);
                v /= q;
            }
        }
        touched.clear();
        for (std::uint64_t mask : masks) {
            std::uint64_t y = 0;
            for (unsigned i = 0; i < k; ++i)
                if (mask >> (k - 1 - i) & 1ULL) y = y * q + x[i];
            touched.push_back(y);
            double* cell = &acc[y * s * s];
            const auto& pat = law.per_pattern[mask];
            for (std::size_t i = 0; i < s * s; ++i) cell[i] += pat[i];
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (std::size_t st = 0; st < s * s; ++st) {
            if (!keep[st]) continue;
            auto& row = rows[st][xi];
            row.reserve(touched.size());
            for (std::uint64_t y : touched) {
                const double v = acc[y * s * s + st];
                if (v != 0.0) row.push_back({static_cast<std::uint32_t>(y), v / total[st]});
            }
        }
        for (std::uint64_t y : touched) {
            double* cell = &acc[y * s * s];
            for (std::size_t i = 0; i < s * s; ++i) cell[i] = 0.0;
        }
    }

    for (std::size_t sg = 0; sg < s; ++sg) {
        for (std::size_t tau = 0; tau < s; ++tau) {
            const std::size_t st = sg * s + tau;
            if (!keep[st]) continue;
            ConditionedDMC dmc;
            dmc.k = k;
            dmc.sigma_init = sg;
            dmc.sigma_final = tau;
            dmc.m = m;
            dmc.weight = rho[sg] * total[st];
            dmc.dmc = FiniteChannel(num_cols, std::move(rows[st]));
            visit(std::move(dmc));
        }
    }
}

template <typename Visitor>
double for_each_deletion_dmc(const MarkovIDSChannel& channel, unsigned k, Visitor&& visit) {
    const auto law = pattern_state_probs(channel.chain(), channel.deletion_probs(), k);
    std::vector<std::vector<std::uint64_t>> masks_by_weight(k + 1);
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask)
        masks_by_weight[static_cast<unsigned>(std::popcount(mask))].push_back(mask);
    double dropped = 0.0;
    for (unsigned m = 0; m <= k; ++m)
        emit_deletion_dmcs_for_m(channel, law, m, masks_by_weight[m], dropped, visit);
    return dropped;
}

template <typename Visitor>
double for_each_general_dmc(const MarkovIDSChannel& channel, unsigned k, Visitor&& visit) {
    const auto law = block_law_general(channel, k);
    const std::size_t s = law.s;
    const unsigned q_out = law.output_alphabet;
    const unsigned max_m = channel.max_output_len() * k;
    const auto& rho = channel.rho();

    // Pr[tau, m | sigma, x]; the decomposition requires it not to depend on x.
    auto side_info = [&](std::uint64_t xi) {
        std::vector<double> t((max_m + 1) * s * s, 0.0);
        for (const auto& e : law.per_input[xi]) {
            const unsigned m = index_word(e.y_index, q_out).size();
            for (std::size_t i = 0; i < s * s; ++i) t[m * s * s + i] += e.st[i];
        }
        return t;
    };
    const auto t0 = side_info(0);
    for (std::uint64_t xi = 1; xi < law.per_input.size(); ++xi) {
        const auto ti = side_info(xi);
        for (std::size_t i = 0; i < t0.size(); ++i)
            if (std::fabs(t0[i] - ti[i]) > kConstructTol)
                throw SideInfoError(
                    "conditioned_dmcs: side information depends on the input (x=" + std::to_string(xi) +
                    " differs by " + std::to_string(t0[i] - ti[i]) + "); use joint_upper_bound");
    }

    double dropped = 0.0;
    for (unsigned m = 0; m <= max_m; ++m) {
        const std::uint64_t num_cols = checked_pow(q_out, m, ~0ULL >> 1);
        const std::uint64_t col_offset = word_space_size(q_out, m) - num_cols;
        for (std::size_t sg = 0; sg < s; ++sg) {
            for (std::size_t tau = 0; tau < s; ++tau) {
                const double total = t0[m * s * s + sg * s + tau];
                const double w = rho[sg] * total;
                if (w == 0.0) continue;
                if (w < kWeightCutoff) {
                    dropped += w;
                    continue;
                }
                std::vector<std::vector<FiniteChannel::Entry>> rows(law.per_input.size());
                for (std::uint64_t xi = 0; xi < law.per_input.size(); ++xi) {
                    for (const auto& e : law.per_input[xi]) {
                        if (e.y_index < col_offset || e.y_index >= col_offset + num_cols) continue;
                        const double v = e.st[sg * s + tau];
                        if (v != 0.0)
                            rows[xi].push_back(
                                {static_cast<std::uint32_t>(e.y_index - col_offset), v / total});
                    }
                }
                ConditionedDMC dmc;
                dmc.k = k;
                dmc.sigma_init = sg;
                dmc.sigma_final = tau;
                dmc.m = m;
                dmc.weight = w;
                dmc.dmc = FiniteChannel(num_cols, std::move(rows));
                visit(std::move(dmc));
            }
        }
    }
    return dropped;
}

} // namespace detail

/// Streams every conditioned DMC with positive weight through the visitor,
/// grouped by output length so peak memory stays one length-group wide.
/// Returns the dropped weight mass. Visits follow (m, sigma, tau) order on
/// the fast path; callers that need (sigma, tau, m) order must sort.
template <typename Visitor>
double for_each_conditioned_dmc(const MarkovIDSChannel& channel, unsigned k, Visitor&& visit) {
    if (channel.all_pure_deletion())
        return detail::for_each_deletion_dmc(channel, k, std::forward<Visitor>(visit));
    return detail::for_each_general_dmc(channel, k, std::forward<Visitor>(visit));
}

/// Materializes the whole decomposition, ordered by (sigma, tau, m).
inline ConditionedDecomposition conditioned_dmcs(const MarkovIDSChannel& channel, unsigned k) {
    const std::uint64_t estimate = detail::block_pair_estimate(channel, k);
    constexpr std::uint64_t kGuard = 1ULL << 25;
    if (estimate > kGuard)
        throw GuardError("conditioned_dmcs: estimated " + std::to_string(estimate) +
                         " law entries exceeds guard " + std::to_string(kGuard) +
                         "; use for_each_conditioned_dmc");
    ConditionedDecomposition out;
    out.dropped_mass =
        for_each_conditioned_dmc(channel, k, [&](ConditionedDMC dmc) { out.dmcs.push_back(std::move(dmc)); });
    std::sort(out.dmcs.begin(), out.dmcs.end(), [](const ConditionedDMC& a, const ConditionedDMC& b) {
        return std::tie(a.sigma_init, a.sigma_final, a.m) < std::tie(b.sigma_init, b.sigma_final, b.m);
    });
    return out;
}

} // namespace idscap
