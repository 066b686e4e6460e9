// Information-theoretic kernel tests.
#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "idscap/info.hpp"
#include "idscap/words.hpp"

using namespace idscap;

namespace {

double h2(double p) {
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

FiniteChannel bsc(double eps) {
    return FiniteChannel::Dense({{1.0 - eps, eps}, {eps, 1.0 - eps}});
}

FiniteChannel identity_channel(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return FiniteChannel::Dense(m);
}

// Test-only oracle: exact glued law of the i.i.d. binary deletion channel,
// built by brute-force enumeration of all 2^n keep/delete masks. Columns are
// canonically indexed words of length <= n.
FiniteChannel brute_force_deletion_law(double d, unsigned n) {
    const std::size_t inputs = 1ULL << n;
    const std::size_t cols = word_space_size(2, n);
    std::vector<std::vector<double>> dense(inputs, std::vector<double>(cols, 0.0));
    for (std::size_t xi = 0; xi < inputs; ++xi) {
        const Word x = index_block(xi, 2, n);
        for (std::size_t mask = 0; mask < inputs; ++mask) {
            Word y;
            for (unsigned i = 0; i < n; ++i)
                if (mask >> (n - 1 - i) & 1ULL) y.push_back(x[i]);
            const int kept = std::popcount(mask);
            dense[xi][word_index(y, 2)] +=
                std::pow(d, static_cast<double>(n - kept)) * std::pow(1.0 - d, static_cast<double>(kept));
        }
    }
    return FiniteChannel::Dense(dense);
}

std::vector<std::vector<double>> random_stochastic(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    std::vector<std::vector<double>> m(nx, std::vector<double>(ny));
    for (auto& row : m) {
        double sum = 0.0;
        for (double& v : row) sum += (v = unif(rng));
        for (double& v : row) v /= sum;
    }
    return m;
}

DiscreteDistribution random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) sum += (v = unif(rng));
    for (double& v : p) v /= sum;
    return DiscreteDistribution(std::move(p));
}

} // namespace

// =============================================================================
// Information density
// =============================================================================

TEST(Density, IdentityBinaryUniform) {
    auto w = identity_channel(2);
    auto p = DiscreteDistribution::Uniform(2);
    EXPECT_DOUBLE_EQ(information_density(w, p, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(information_density(w, p, 0, 1), 0.0); // zero convention
}

TEST(Density, OutputIndependentChannelIsZero) {
    auto w = FiniteChannel::Dense({{0.25, 0.75}, {0.25, 0.75}});
    auto p = DiscreteDistribution::Uniform(2);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) EXPECT_DOUBLE_EQ(information_density(w, p, x, y), 0.0);
}

TEST(Density, BscQuarterByArithmetic) {
    auto w = bsc(0.25);
    auto p = DiscreteDistribution::Uniform(2);
    EXPECT_NEAR(information_density(w, p, 0, 0), std::log2(0.75 / 0.5), 1e-15);
    EXPECT_NEAR(information_density(w, p, 0, 0), 0.584962500721156, 1e-12);
    EXPECT_NEAR(information_density(w, p, 0, 1), -1.0, 1e-15);
}

// =============================================================================
// Mutual information
// =============================================================================

TEST(MutualInformation, IdentityBinaryUniform) {
    EXPECT_NEAR(mutual_information(identity_channel(2), DiscreteDistribution::Uniform(2)), 1.0, 1e-15);
}

TEST(MutualInformation, BscClosedForm) {
    EXPECT_NEAR(mutual_information(bsc(0.11), DiscreteDistribution::Uniform(2)), 1.0 - h2(0.11), 1e-13);
    EXPECT_NEAR(mutual_information(bsc(0.11), DiscreteDistribution::Uniform(2)), 0.500084, 1e-6);
}

TEST(MutualInformation, PointMassInputGivesZero) {
    auto w = bsc(0.3);
    EXPECT_DOUBLE_EQ(mutual_information(w, DiscreteDistribution::PointMass(2, 0)), 0.0);
}

TEST(MutualInformation, MatchesDensityExpectation) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t nx = 2 + trial % 4, ny = 2 + (trial / 2) % 5;
        auto w = FiniteChannel::Dense(random_stochastic(rng, nx, ny));
        auto p = random_distribution(rng, nx);
        double expect = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                expect += p[x] * w.prob(x, y) * information_density(w, p, x, y);
        EXPECT_NEAR(mutual_information(w, p), expect, 1e-12);
    }
}

// =============================================================================
// Variance of the information density
// =============================================================================

TEST(MiVariance, ConstantDensityChannels) {
    EXPECT_DOUBLE_EQ(mi_variance(identity_channel(2), DiscreteDistribution::Uniform(2)), 0.0);
    auto noise = FiniteChannel::Dense({{0.6, 0.4}, {0.6, 0.4}});
    EXPECT_DOUBLE_EQ(mi_variance(noise, DiscreteDistribution::Uniform(2)), 0.0);
}

TEST(MiVariance, BscQuarterBruteForce) {
    // Brute force over the four (x, y) outcomes of BSC(0.25) under uniform p.
    const double i_same = std::log2(0.75 / 0.5);
    const double i_diff = std::log2(0.25 / 0.5);
    const double mean = 0.75 * i_same + 0.25 * i_diff;
    const double second = 0.75 * i_same * i_same + 0.25 * i_diff * i_diff;
    EXPECT_NEAR(mi_variance(bsc(0.25), DiscreteDistribution::Uniform(2)), second - mean * mean, 1e-13);
}

TEST(MiVariance, NeverNegative) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        auto w = FiniteChannel::Dense(random_stochastic(rng, 3, 4));
        auto p = random_distribution(rng, 3);
        EXPECT_GE(mi_variance(w, p), 0.0);
    }
}

// =============================================================================
// Blahut-Arimoto
// =============================================================================

TEST(BlahutArimoto, IdentityChannelsHitLogQ) {
    for (std::size_t q : {2, 3, 4, 8}) {
        auto sol = blahut_arimoto(identity_channel(q), 1e-10);
        EXPECT_NEAR(sol.capacity_bits, std::log2(static_cast<double>(q)), 1e-10);
        EXPECT_LE(sol.bracket(), 1e-10);
    }
}

TEST(BlahutArimoto, BscMatchesClosedForm) {
    auto sol = blahut_arimoto(bsc(0.11), 1e-9);
    EXPECT_NEAR(sol.capacity_bits, 1.0 - h2(0.11), 1e-6);
    EXPECT_NEAR(sol.input_dist[0], 0.5, 1e-6);
}

TEST(BlahutArimoto, ZChannelClosedForm) {
    // Z channel with 1 -> 0 flip probability one half: C = log2(5/4).
    auto w = FiniteChannel::Dense({{1.0, 0.0}, {0.5, 0.5}});
    auto sol = blahut_arimoto(w, 1e-9);
    EXPECT_NEAR(sol.capacity_bits, std::log2(1.25), 1e-6);
}

TEST(BlahutArimoto, BracketIsConsistent) {
    auto sol = blahut_arimoto(bsc(0.2), 1e-9);
    EXPECT_GE(sol.lower_gap, 0.0);
    EXPECT_GE(sol.upper_gap, 0.0);
    EXPECT_LE(sol.bracket(), 1e-9);
    EXPECT_GE(sol.capacity_bits, 0.0);
    EXPECT_LE(sol.capacity_bits, 1.0 + 1e-9);
}

TEST(BlahutArimoto, MaxItersCarriesBracket) {
    // Asymmetric channel: the bracket cannot close in two iterations.
    auto zchan = FiniteChannel::Dense({{1.0, 0.0}, {0.5, 0.5}});
    try {
        blahut_arimoto(zchan, 1e-12, 2);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.iterations, 2);
        EXPECT_GE(e.upper_bits, e.lower_bits);
        EXPECT_GT(e.upper_bits - e.lower_bits, 1e-12);
    }
}

TEST(BlahutArimoto, DominatesRandomInputDistributions) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nx = 2 + trial % 5, ny = 2 + (trial / 3) % 5;
        auto w = FiniteChannel::Dense(random_stochastic(rng, nx, ny));
        auto sol = blahut_arimoto(w, 1e-9);
        for (int j = 0; j < 100; ++j) {
            auto p = random_distribution(rng, nx);
            EXPECT_GE(sol.capacity_bits + 1e-9, mutual_information(w, p));
        }
    }
}

TEST(BlahutArimoto, MatchesSimplexGridSearch) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t ny = 2 + trial % 5;
        auto w = FiniteChannel::Dense(random_stochastic(rng, 2, ny));
        double best = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double t = static_cast<double>(i) / 10000.0;
            best = std::max(best, mutual_information(w, DiscreteDistribution({t, 1.0 - t})));
        }
        auto sol = blahut_arimoto(w, 1e-9);
        EXPECT_NEAR(sol.capacity_bits, best, 1e-3);
    }
}

// =============================================================================
// Perturbation and the phi statistic
// =============================================================================

TEST(Perturb, Endpoints) {
    DiscreteDistribution p({1.0, 0.0});
    auto same = perturb_distribution(p, 0.0);
    EXPECT_DOUBLE_EQ(same[0], 1.0);
    auto uniform = perturb_distribution(p, 1.0);
    EXPECT_DOUBLE_EQ(uniform[0], 0.5);
    auto half = perturb_distribution(p, 0.5);
    EXPECT_DOUBLE_EQ(half[0], 0.75);
    EXPECT_DOUBLE_EQ(half[1], 0.25);
}

TEST(MinLogProb, Examples) {
    EXPECT_DOUBLE_EQ(min_log_prob(identity_channel(3)), 0.0);
    EXPECT_DOUBLE_EQ(min_log_prob(bsc(0.25)), 2.0);
    auto deletion1 = FiniteChannel::Dense({{0.1, 0.9, 0.0}, {0.1, 0.0, 0.9}});
    EXPECT_NEAR(min_log_prob(deletion1), -std::log2(0.1), 1e-14);
}

TEST(OutputEntropy, Examples) {
    EXPECT_DOUBLE_EQ(output_entropy(identity_channel(2), 0), 0.0);
    auto quarter = FiniteChannel::Dense({{0.25, 0.25, 0.25, 0.25}});
    EXPECT_DOUBLE_EQ(output_entropy(quarter, 0), 2.0);
    auto deletion_half = FiniteChannel::Dense({{0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}});
    EXPECT_DOUBLE_EQ(output_entropy(deletion_half, 0), 1.0);
}

// =============================================================================
// Appendix-style inequalities on random and deletion channels
// =============================================================================

TEST(PerturbationGap, HoldsOnRandomChannels) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t nx = 2 + trial % 5, ny = 2 + (trial / 2) % 5;
        auto w = FiniteChannel::Dense(random_stochastic(rng, nx, ny));
        auto sol = blahut_arimoto(w, 1e-10);
        const double phi = min_log_prob(w);
        for (double delta : {0.0, 0.05, 0.3, 1.0}) {
            auto phat = perturb_distribution(sol.input_dist, delta);
            const double gap = sol.capacity_bits - mutual_information(w, phat);
            EXPECT_LE(gap, delta * (sol.capacity_bits + phi) + 1e-9 + sol.bracket());
        }
    }
}

TEST(VarianceOrder, HoldsOnExactDeletionLaws) {
    for (unsigned n : {1u, 2u, 3u}) {
        for (double d : {0.1, 0.5}) {
            auto w = brute_force_deletion_law(d, n);
            auto sol = blahut_arimoto(w, 1e-10);
            const double phi = min_log_prob(w);
            for (double delta : {0.2, 0.7, 1.0}) {
                auto phat = perturb_distribution(sol.input_dist, delta);
                const double lhs = mi_variance(w, phat);
                const double t = std::log2(delta) - static_cast<double>(n) - phi;
                EXPECT_LE(lhs, phi * phi + t * t + 1e-9);
            }
        }
    }
}
