#include "qmem/decoupling.hpp"
#include "qmem/parallel.hpp"
#include "qmem/random.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmem {

LowRankHermitian LowRankHermitian::scalar(Index dim, double shift) {
    LowRankHermitian out;
    out.dim = dim;
    out.shift = shift;
    out.factor = MatrixXc(dim, 0);
    out.weights = VectorXd(0);
    return out;
}

LowRankHermitian LowRankHermitian::from_dense(const MatrixXc& m) {
    const auto es = hermitian_eig(m);
    LowRankHermitian out;
    out.dim = m.rows();
    out.factor = es.vectors;
    out.weights = es.values;
    return out;
}

LowRankHermitian LowRankHermitian::pure(const MatrixXc& w) {
    LowRankHermitian out;
    out.dim = w.rows();
    out.factor = w;
    out.weights = VectorXd::Ones(w.cols());
    return out;
}

namespace {

// With F = QR, the nonzero spectrum of F diag(w) F^dag is that of R diag(w) R^dag.
// Also returns the dimension of the complement of the span.
std::pair<VectorXd, Index> span_spectrum(const MatrixXc& f, const VectorXd& w) {
    const Index d = f.rows();
    const Index k = f.cols();
    if (k == 0) return {VectorXd(0), d};
    Eigen::HouseholderQR<MatrixXc> qr(f);
    const Index m = std::min(d, k);
    MatrixXc r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    const MatrixXc core = r * w.cast<std::complex<double>>().asDiagonal() * r.adjoint();
    return {hermitian_eigenvalues(MatrixXc((core + core.adjoint()) / 2.0)), d - m};
}

} // namespace

VectorXd LowRankHermitian::eigenvalues() const {
    const auto [mu, rest] = span_spectrum(factor, weights);
    VectorXd out(dim);
    out.head(mu.size()) = mu.array() + shift;
    out.tail(rest).setConstant(shift);
    std::sort(out.data(), out.data() + out.size(), std::greater<>());
    return out;
}

double trace_norm_difference(const LowRankHermitian& a, const LowRankHermitian& b) {
    if (a.dim != b.dim) throw std::invalid_argument("trace_norm_difference: dimension mismatch");
    MatrixXc f(a.dim, a.factor.cols() + b.factor.cols());
    f << a.factor, b.factor;
    VectorXd w(a.weights.size() + b.weights.size());
    w << a.weights, -b.weights;
    const double shift = a.shift - b.shift;
    const auto [mu, rest] = span_spectrum(f, w);
    return (mu.array() + shift).abs().sum() + static_cast<double>(rest) * std::abs(shift);
}

LowRankHermitian average_output(const Channel& ch) {
    if (ch.is_identity()) return LowRankHermitian::scalar(ch.output_dim(), 1.0 / static_cast<double>(ch.output_dim()));
    return LowRankHermitian::from_dense(ch.apply(maximally_mixed_matrix<double>(ch.input_dim())));
}

namespace {

DistanceSamples summarize(std::vector<double> samples) {
    DistanceSamples out;
    const double n = static_cast<double>(samples.size());
    double sum = 0;
    for (double x : samples) sum += x;
    out.mean = sum / n;
    double sq = 0;
    for (double x : samples) sq += (x - out.mean) * (x - out.mean);
    out.std = samples.size() > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
    out.samples = std::move(samples);
    return out;
}

} // namespace

DistanceSamples avg_output_distance(const Channel& ch, const LowRankHermitian& omega, std::size_t n_samples,
                                    std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("avg_output_distance: need at least one sample");
    if (omega.dim != ch.output_dim()) throw std::invalid_argument("avg_output_distance: omega has the wrong dimension");
    ch.kraus(); // populate the cache before the workers share it
    std::vector<double> samples(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const PureState phi = haar_state(ch.input_dim(), rng);
        samples[i] = trace_norm_difference(LowRankHermitian::pure(ch.apply_pure_factor(phi.amplitudes())), omega);
    });
    return summarize(std::move(samples));
}

DistanceSamples avg_output_distance(const Channel& ch, std::size_t n_samples, std::uint64_t seed) {
    return avg_output_distance(ch, average_output(ch), n_samples, seed);
}

DecouplingBound decoupling_bound(const Channel& ch, const SdpOptions& options) {
    const Index d_a = ch.input_dim();
    const Index d_b = ch.output_dim();
    const Index d = d_a * d_b;
    DecouplingBound out;
    const VectorXd spectrum = choi_spectrum(ch);
    out.chain_entropy = -std::log2(spectrum(0)) - std::log2(static_cast<double>(d_b));
    out.chain_bound = std::exp2(-out.chain_entropy / 2);

    constexpr Index dense_limit = 1024;
    if (d > options.max_dim && d > dense_limit) {
        throw std::invalid_argument("decoupling_bound: Choi state exceeds the solver envelope");
    }
    const ChoiState tau = choi(ch);
    const MatrixXc tau_b = partial_trace(tau.state.matrix(), {d_a, d_b}, {1});
    const MatrixXc product = kron(maximally_mixed_matrix<double>(d_a), tau_b);
    if ((tau.state.matrix() - product).cwiseAbs().maxCoeff() <= 1e-12) {
        out.product_shortcut = true;
        out.h_min_cond = std::log2(static_cast<double>(d_a));
    } else {
        if (d > options.max_dim) throw std::invalid_argument("decoupling_bound: Choi state exceeds the solver envelope");
        const auto res = h_min_cond_detail(tau.state, {"B"}, options);
        out.h_min_cond = res.value;
        out.gap = res.gap;
    }
    out.bound = std::exp2(-out.h_min_cond / 2);
    return out;
}

ConcentrationResult concentration_check(const std::vector<double>& samples, double bound, double delta, Index d_a) {
    if (samples.empty()) throw std::invalid_argument("concentration_check: no samples");
    ConcentrationResult out;
    out.delta = delta;
    std::size_t above = 0;
    for (double x : samples)
        if (x > bound + delta) ++above;
    out.tail_fraction = static_cast<double>(above) / static_cast<double>(samples.size());
    out.tail_bound = 2.0 * std::exp(-static_cast<double>(d_a) * delta * delta / 16.0);
    out.asserted = out.tail_bound < 1.0;
    out.pass = !out.asserted || out.tail_fraction <= out.tail_bound;
    return out;
}

ConverseTerms converse_terms(const Channel& ch, double epsilon, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("converse: delta must be positive");
    if (!(epsilon >= 0) || !(epsilon < 1)) throw std::invalid_argument("converse: epsilon must lie in [0, 1)");
    const double x = std::sqrt(2 * delta) + 4 * epsilon;
    if (!(x < 1)) throw std::invalid_argument("converse: sqrt(2 delta) + 4 eps must be below 1");
    ConverseTerms t;
    const VectorXd choi_ev = choi_spectrum(ch);
    t.h_max_ab = spectral::h_max_smooth(std::span<const double>(choi_ev.data(), static_cast<std::size_t>(choi_ev.size())),
                                        ch.input_dim() * ch.output_dim(), epsilon)
                     .entropy;
    t.fidelity_term = std::log2(1.0 / (1.0 - x * x));
    t.epsilon_term = epsilon > 0 ? std::log2(2.0 / (epsilon * epsilon)) : std::numeric_limits<double>::infinity();
    t.lhs = t.h_max_ab + t.fidelity_term + t.epsilon_term;
    const VectorXd out_ev = average_output(ch).eigenvalues().cwiseMax(0.0);
    t.h_min_b = spectral::h_min_smooth(std::span<const double>(out_ev.data(), static_cast<std::size_t>(out_ev.size())),
                                       ch.output_dim(), epsilon)
                    .entropy;
    t.holds = t.lhs < t.h_min_b;
    return t;
}

ConverseResult converse_check(const Channel& ch, double epsilon, double delta, std::size_t n_samples,
                              std::size_t n_trial_inputs, std::uint64_t seed) {
    ConverseResult out;
    out.terms = converse_terms(ch, epsilon, delta);
    if (!out.terms.holds) return out;
    std::vector<LowRankHermitian> trials;
    trials.push_back(average_output(ch));
    trials.push_back(LowRankHermitian::scalar(ch.output_dim(), 1.0 / static_cast<double>(ch.output_dim())));
    for (std::size_t i = 0; i < n_trial_inputs; ++i) {
        Rng rng = make_rng(stream_seed(seed, 0x7472), i);
        trials.push_back(LowRankHermitian::pure(ch.apply_pure_factor(haar_state(ch.input_dim(), rng).amplitudes())));
    }
    out.min_trial_average = std::numeric_limits<double>::infinity();
    for (const auto& omega : trials) {
        const double avg = avg_output_distance(ch, omega, n_samples, seed).mean;
        out.trial_averages.push_back(avg);
        out.min_trial_average = std::min(out.min_trial_average, avg);
    }
    out.empirical_consistent = out.min_trial_average > delta / 2;
    return out;
}

DecouplingReport decoupling_report(const Channel& ch, const DecouplingOptions& options) {
    DecouplingReport r;
    r.n_samples = options.n_samples;
    r.seed = options.seed;
    auto dist = avg_output_distance(ch, options.n_samples, options.seed);
    if (options.noise > 0) {
        std::uniform_real_distribution<double> unit(0.0, options.noise);
        for (std::size_t i = 0; i < dist.samples.size(); ++i) {
            Rng rng = make_rng(stream_seed(options.seed, 0x6e6f), i);
            dist.samples[i] += unit(rng);
        }
        dist = summarize(std::move(dist.samples));
    }
    r.empirical_mean = dist.mean;
    r.empirical_std = dist.std;
    r.bound = decoupling_bound(ch);
    for (double delta : options.deltas) {
        r.tail[delta] = concentration_check(dist.samples, r.bound.bound, delta, ch.input_dim());
    }
    const double x = std::sqrt(2 * options.converse_delta) + 4 * options.epsilon;
    r.converse_holds = x < 1 && converse_terms(ch, options.epsilon, options.converse_delta).holds;
    return r;
}

} // namespace qmem
