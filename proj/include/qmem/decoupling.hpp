#pragma once

#include "qmem/channels.hpp"
#include "qmem/entropy.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace qmem {

// shift * I + F diag(weights) F^dag on a space of dimension dim.
struct LowRankHermitian {
    Index dim = 0;
    double shift = 0;
    MatrixXc factor;
    VectorXd weights;

    static LowRankHermitian scalar(Index dim, double shift);
    static LowRankHermitian from_dense(const MatrixXc& m);
    static LowRankHermitian pure(const MatrixXc& w); // W W^dag

    VectorXd eigenvalues() const; // descending, all dim of them
};

// ||A - B||_1 without forming either operator.
double trace_norm_difference(const LowRankHermitian& a, const LowRankHermitian& b);

// T(pi_A) in low-rank form (a scalar for the identity channel).
LowRankHermitian average_output(const Channel& ch);

struct DistanceSamples {
    double mean = 0;
    double std = 0; // sample standard deviation
    std::vector<double> samples;
};

// Haar average of ||T(phi) - omega||_1; sample i uses stream (seed, i).
DistanceSamples avg_output_distance(const Channel& ch, std::size_t n_samples, std::uint64_t seed);
DistanceSamples avg_output_distance(const Channel& ch, const LowRankHermitian& omega, std::size_t n_samples,
                                    std::uint64_t seed);

struct DecouplingBound {
    double h_min_cond = 0;  // H_min(A'|B) of the Choi state, eps = 0
    double bound = 0;       // 2^{-h_min_cond / 2}
    double chain_entropy = 0; // H_min(A'B) - log d_B, a weaker lower bound on h_min_cond
    double chain_bound = 0;   // 2^{-chain_entropy / 2}
    double gap = 0;           // SDP duality gap (0 for the product shortcut)
    bool product_shortcut = false;
};

// Product Choi states tau_A' (x) tau_B use H_min(A'|B) = H_min(A') and skip the
// SDP; everything else must fit in the solver envelope.
DecouplingBound decoupling_bound(const Channel& ch, const SdpOptions& options = {});

struct ConcentrationResult {
    double delta = 0;
    double tail_fraction = 0; // fraction of samples above bound + delta
    double tail_bound = 0;    // 2 exp(-d_A delta^2 / 16)
    bool asserted = false;    // only when tail_bound < 1
    bool pass = true;
};

ConcentrationResult concentration_check(const std::vector<double>& samples, double bound, double delta, Index d_a);

struct ConverseTerms {
    double h_max_ab = 0;      // H_max^eps(A'B) of the Choi state (upper bound)
    double fidelity_term = 0; // log 1/(1 - (sqrt(2 delta) + 4 eps)^2)
    double epsilon_term = 0;  // log 2/eps^2
    double lhs = 0;
    double h_min_b = 0;       // H_min^eps(B) of T(pi_A) (lower bound)
    bool holds = false;
};

ConverseTerms converse_terms(const Channel& ch, double epsilon, double delta);

struct ConverseResult {
    ConverseTerms terms;
    std::vector<double> trial_averages; // T(pi_A), pi_B, then T(phi_i)
    double min_trial_average = 0;
    bool empirical_consistent = true;   // min_trial_average > delta / 2 whenever the condition holds
};

// Evaluates the converse condition and, when it holds, checks that no trial
// omega_B reaches Haar-average distance delta / 2.
ConverseResult converse_check(const Channel& ch, double epsilon, double delta, std::size_t n_samples = 50,
                              std::size_t n_trial_inputs = 10, std::uint64_t seed = 1);

struct DecouplingOptions {
    std::size_t n_samples = 200;
    std::uint64_t seed = 1;
    std::vector<double> deltas = {0.5};
    double noise = 0.0; // per-sample additive noise, uniform in [0, noise]
    double epsilon = 0.05;
    double converse_delta = 0.01;
};

struct DecouplingReport {
    std::size_t n_samples = 0;
    double empirical_mean = 0;
    double empirical_std = 0;
    DecouplingBound bound;
    std::map<double, ConcentrationResult> tail;
    bool converse_holds = false;
    std::uint64_t seed = 0;
};

DecouplingReport decoupling_report(const Channel& ch, const DecouplingOptions& options);

} // namespace qmem
