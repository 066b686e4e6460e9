// State-channel definitions for insertion/deletion/substitution noise, the
// two-state bursty-deletion parameterization, and a sampling simulator for
// the glued Markov-IDS channel.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "idscap/errors.hpp"
#include "idscap/markov.hpp"
#include "idscap/rng.hpp"
#include "idscap/words.hpp"

namespace idscap {

/// One possible output string of a state channel together with its probability.
struct OutputAtom {
    Word word;
    double prob;
};

/// Per-state single-symbol IDS law: each input symbol maps to a finite
/// distribution over output strings of length at most max_output_len.
class StateChannel {
  public:
    StateChannel(unsigned input_alphabet, unsigned output_alphabet, unsigned max_output_len,
                 std::vector<std::vector<OutputAtom>> law)
        : input_alphabet_(input_alphabet),
          output_alphabet_(output_alphabet),
          max_output_len_(max_output_len),
          law_(std::move(law)) {
        if (input_alphabet_ < 1) throw ValidationError("StateChannel: empty input alphabet");
        if (law_.size() != input_alphabet_)
            throw ValidationError("StateChannel: law must cover every input symbol");
        for (unsigned x = 0; x < input_alphabet_; ++x) {
            double sum = 0.0;
            for (const auto& atom : law_[x]) {
                if (atom.prob < 0.0 || atom.prob > 1.0)
                    throw ValidationError("StateChannel: probability outside [0,1] for input " +
                                          std::to_string(x));
                if (atom.word.size() > max_output_len_)
                    throw ValidationError("StateChannel: output longer than max_output_len for input " +
                                          std::to_string(x));
                for (Symbol s : atom.word)
                    if (s >= output_alphabet_)
                        throw ValidationError("StateChannel: output symbol outside alphabet");
                sum += atom.prob;
            }
            if (std::fabs(sum - 1.0) > kConstructTol)
                throw ValidationError("StateChannel: law for input " + std::to_string(x) +
                                      " sums to " + std::to_string(sum) + ", not 1");
        }
    }

    unsigned input_alphabet() const { return input_alphabet_; }
    unsigned output_alphabet() const { return output_alphabet_; }
    unsigned max_output_len() const { return max_output_len_; }
    const std::vector<OutputAtom>& atoms(unsigned x) const { return law_.at(x); }

    double expected_output_length(unsigned x) const {
        double e = 0.0;
        for (const auto& atom : law_.at(x)) e += atom.prob * static_cast<double>(atom.word.size());
        return e;
    }

    /// True when the state acts as a pure deletion channel: every input is
    /// either erased or passed through unchanged, with one erasure
    /// probability shared across inputs.
    bool is_pure_deletion() const {
        double d = -1.0;
        for (unsigned x = 0; x < input_alphabet_; ++x) {
            double erase = 0.0, copy = 0.0;
            for (const auto& atom : law_[x]) {
                if (atom.word.empty())
                    erase += atom.prob;
                else if (atom.word.size() == 1 && atom.word[0] == x)
                    copy += atom.prob;
                else if (atom.prob > 0.0)
                    return false;
            }
            if (std::fabs(erase + copy - 1.0) > kConstructTol) return false;
            if (d < 0.0)
                d = erase;
            else if (std::fabs(erase - d) > kConstructTol)
                return false;
        }
        return true;
    }

    /// Erasure probability of a pure-deletion state.
    double deletion_prob() const {
        if (!is_pure_deletion()) throw ValidationError("deletion_prob: state is not pure deletion");
        double erase = 0.0;
        for (const auto& atom : law_[0])
            if (atom.word.empty()) erase += atom.prob;
        return erase;
    }

  private:
    unsigned input_alphabet_;
    unsigned output_alphabet_;
    unsigned max_output_len_;
    std::vector<std::vector<OutputAtom>> law_;
};

/// Binary-input deletion state: the symbol is erased with probability d and
/// passed through otherwise.
inline StateChannel make_deletion_state(double d, unsigned alphabet = 2) {
    if (d < 0.0 || d > 1.0)
        throw ValidationError("make_deletion_state: d = " + std::to_string(d) + " outside [0,1]");
    std::vector<std::vector<OutputAtom>> law(alphabet);
    for (unsigned x = 0; x < alphabet; ++x)
        law[x] = {{Word{}, d}, {Word{static_cast<Symbol>(x)}, 1.0 - d}};
    return StateChannel(alphabet, alphabet, 1, std::move(law));
}

/// Identity state: the symbol always passes through unchanged.
inline StateChannel make_identity_state(unsigned alphabet = 2) { return make_deletion_state(0.0, alphabet); }

/// Two-state bursty deletion model: deletion probability d in the quiet
/// state, D in the bursty state, with switch probabilities alpha (1 -> 2)
/// and beta (2 -> 1). The average deletion probability under the stationary
/// state distribution is delta = (alpha*D + beta*d) / (alpha + beta).
struct TwoStateDeletionParams {
    double alpha;
    double beta;
    double d;
    double D;
    double delta;

    TwoStateDeletionParams(double alpha, double beta, double d, double D)
        : alpha(alpha), beta(beta), d(d), D(D) {
        for (double v : {alpha, beta, d, D})
            if (v < 0.0 || v > 1.0) throw ValidationError("TwoStateDeletionParams: value outside [0,1]");
        delta = (alpha * D + beta * d) / (alpha + beta);
    }
};

/// Recovers (d, D) from the average deletion probability, the ratio D/d and
/// the switch probabilities. Throws InfeasibleError naming the offending
/// value when the implied per-state probability leaves [0,1].
inline TwoStateDeletionParams resolve_two_state_params(double delta, double ratio, double alpha,
                                                       double beta) {
    if (delta < 0.0 || delta > 1.0)
        throw ValidationError("resolve_two_state_params: delta outside [0,1]");
    if (ratio < 1.0) throw ValidationError("resolve_two_state_params: ratio must be >= 1");
    if (alpha <= 0.0 || alpha > 1.0 || beta <= 0.0 || beta > 1.0)
        throw ValidationError("resolve_two_state_params: alpha, beta must lie in (0,1]");
    const double d = delta * (alpha + beta) / (alpha * ratio + beta);
    const double big = ratio * d;
    if (big > 1.0 + 1e-15)
        throw InfeasibleError("resolve_two_state_params: D=" + std::to_string(big) +
                              " infeasible (greater than 1)");
    return TwoStateDeletionParams(alpha, beta, d, std::min(big, 1.0));
}

/// Initial-state policy for channels and bounds.
struct InitialState {
    bool stationary = true;
    std::vector<double> rho; // used when stationary == false

    static InitialState Stationary() { return {}; }
    static InitialState Explicit(std::vector<double> v) { return {false, std::move(v)}; }
};

/// A finite Markov chain with one IDS state channel per chain state and an
/// initial state distribution. Immutable after construction.
class MarkovIDSChannel {
  public:
    MarkovIDSChannel(MarkovChain chain, std::vector<StateChannel> states, InitialState initial)
        : chain_(std::move(chain)), states_(std::move(states)) {
        if (states_.size() != chain_.size())
            throw ValidationError("MarkovIDSChannel: need one state channel per Markov state");
        for (const auto& st : states_) {
            if (st.input_alphabet() != states_[0].input_alphabet())
                throw ValidationError("MarkovIDSChannel: state channels must share the input alphabet");
            if (st.output_alphabet() != states_[0].output_alphabet())
                throw ValidationError("MarkovIDSChannel: state channels must share the output alphabet");
        }
        if (initial.stationary) {
            rho_ = stationary_distribution(chain_).pi;
        } else {
            rho_ = std::move(initial.rho);
            if (rho_.size() != chain_.size())
                throw ValidationError("MarkovIDSChannel: initial distribution has wrong length");
            double sum = 0.0;
            for (double v : rho_) {
                if (v < 0.0) throw ValidationError("MarkovIDSChannel: negative initial mass");
                sum += v;
            }
            if (std::fabs(sum - 1.0) > kConstructTol)
                throw ValidationError("MarkovIDSChannel: initial distribution sums to " +
                                      std::to_string(sum));
        }
    }

    const MarkovChain& chain() const { return chain_; }
    const StateChannel& state(std::size_t sigma) const { return states_.at(sigma); }
    std::size_t num_states() const { return states_.size(); }
    const std::vector<double>& rho() const { return rho_; }
    unsigned input_alphabet() const { return states_[0].input_alphabet(); }
    unsigned output_alphabet() const { return states_[0].output_alphabet(); }
    unsigned max_output_len() const {
        unsigned a = 0;
        for (const auto& st : states_) a = std::max(a, st.max_output_len());
        return a;
    }

    bool all_pure_deletion() const {
        return std::all_of(states_.begin(), states_.end(),
                           [](const StateChannel& s) { return s.is_pure_deletion(); });
    }

    std::vector<double> deletion_probs() const {
        std::vector<double> d(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) d[i] = states_[i].deletion_prob();
        return d;
    }

  private:
    MarkovChain chain_;
    std::vector<StateChannel> states_;
    std::vector<double> rho_;
};

inline MarkovIDSChannel two_state_deletion_channel(const TwoStateDeletionParams& p,
                                                   InitialState initial = InitialState::Stationary()) {
    MarkovChain chain({{1.0 - p.alpha, p.alpha}, {p.beta, 1.0 - p.beta}});
    return MarkovIDSChannel(std::move(chain), {make_deletion_state(p.d), make_deletion_state(p.D)},
                            std::move(initial));
}

inline MarkovIDSChannel iid_deletion_channel(double delta) {
    MarkovChain single(std::vector<std::vector<double>>{{1.0}});
    return MarkovIDSChannel(std::move(single), {make_deletion_state(delta)},
                            InitialState::Stationary());
}

/// One sampled transmission through the channel.
struct TransmissionTrace {
    Word glued_output;
    std::vector<Word> per_symbol_outputs;
    std::vector<std::size_t> state_path; // state in which each symbol was sent
};

/// Samples the channel protocol: draw the state (initial distribution for
/// the first symbol, transition row afterwards), then draw that symbol's
/// output; finally glue the outputs. Deterministic given the generator state.
inline TransmissionTrace sample_transmission(const MarkovIDSChannel& channel, const Word& input,
                                             Xoshiro256StarStar& rng) {
    TransmissionTrace trace;
    trace.per_symbol_outputs.reserve(input.size());
    trace.state_path.reserve(input.size());
    std::size_t sigma = 0;
    std::vector<double> atom_weights;
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (input[i] >= channel.input_alphabet())
            throw ValidationError("sample_transmission: input symbol outside alphabet at position " +
                                  std::to_string(i));
        if (i == 0) {
            sigma = rng.next_index(channel.rho());
        } else {
            std::vector<double> row(channel.num_states());
            for (std::size_t t = 0; t < row.size(); ++t) row[t] = channel.chain()(sigma, t);
            sigma = rng.next_index(row);
        }
        trace.state_path.push_back(sigma);
        const auto& atoms = channel.state(sigma).atoms(input[i]);
        atom_weights.resize(atoms.size());
        for (std::size_t a = 0; a < atoms.size(); ++a) atom_weights[a] = atoms[a].prob;
        const auto& word = atoms[rng.next_index(atom_weights)].word;
        trace.per_symbol_outputs.push_back(word);
        trace.glued_output.insert(trace.glued_output.end(), word.begin(), word.end());
    }
    return trace;
}

inline TransmissionTrace sample_transmission(const MarkovIDSChannel& channel, const Word& input,
                                             std::uint64_t seed) {
    Xoshiro256StarStar rng(seed);
    return sample_transmission(channel, input, rng);
}

/// Exact expectation of the glued output length for a length-n input:
/// sum over positions of the state marginal times the per-state expected
/// output length. Requires an ergodic chain only for the stationary policy.
inline double expected_output_length(const MarkovIDSChannel& channel, std::size_t n) {
    const std::size_t s = channel.num_states();
    std::vector<double> per_state(s);
    for (std::size_t sigma = 0; sigma < s; ++sigma) {
        double e = 0.0;
        for (unsigned x = 0; x < channel.input_alphabet(); ++x)
            e += channel.state(sigma).expected_output_length(x);
        per_state[sigma] = e / channel.input_alphabet();
    }
    // For inputs whose per-state expected length depends on the symbol this
    // averages over a uniform input; for deletion states it is exact for
    // every input.
    std::vector<double> marginal = channel.rho();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t sigma = 0; sigma < s; ++sigma) total += marginal[sigma] * per_state[sigma];
        std::vector<double> next(s, 0.0);
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t b = 0; b < s; ++b) next[b] += marginal[a] * channel.chain()(a, b);
        marginal = std::move(next);
    }
    return total;
}

} // namespace idscap
