#include "qmem/decoupling.hpp"
#include "qmem/parallel.hpp"
#include "qmem/random.hpp"

#include <Eigen/SVD>
#include <doctest.h>

using namespace qmem;

namespace {

MatrixXc dense(const LowRankHermitian& h) {
    MatrixXc m = MatrixXc::Identity(h.dim, h.dim) * h.shift;
    if (h.factor.cols() > 0) m += h.factor * h.weights.cast<std::complex<double>>().asDiagonal() * h.factor.adjoint();
    return m;
}

// trace norm through singular values, independent of the library's eigensolver
double svd_trace_norm(const MatrixXc& m) { return Eigen::JacobiSVD<MatrixXc>(m).singularValues().sum(); }

// Singlet fraction F = 1 - p makes the depolarizing Choi state isotropic, for
// which 2^{-H_min(A'|B)} = d F whenever F >= 1/d^2.
double isotropic_h_min(double p) { return -std::log2(2 * (1 - p)); }

std::vector<Channel> soundness_grid() {
    std::vector<Channel> out{Channel::identity(2)};
    for (int i = 0; i <= 7; ++i) out.push_back(depolarizing(0.1 * i));
    out.push_back(depolarizing(0.75));
    Rng rng = make_rng(61);
    for (Index da : {2, 4})
        for (Index de : {2, 4}) out.push_back(random_stinespring(da, de, rng));
    return out;
}

} // namespace

TEST_CASE("low-rank operators agree with their dense form") {
    Rng rng = make_rng(60);
    for (int k = 0; k < 10; ++k) {
        const MatrixXc w = haar_unitary(6, rng).leftCols(2) * 0.5;
        const LowRankHermitian a = LowRankHermitian::pure(w);
        const LowRankHermitian b = LowRankHermitian::from_dense(random_density(SubsystemLayout::single("B", 6), rng).matrix());
        const LowRankHermitian c = LowRankHermitian::scalar(6, 1.0 / 6);
        CHECK((dense(a) - w * w.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        const VectorXd ev = a.eigenvalues();
        CHECK(ev.size() == 6);
        for (Index i = 1; i < 6; ++i) CHECK(ev(i - 1) >= ev(i));
        CHECK(trace_norm_difference(a, b) == doctest::Approx(svd_trace_norm(dense(a) - dense(b))).epsilon(1e-9));
        CHECK(trace_norm_difference(a, c) == doctest::Approx(svd_trace_norm(dense(a) - dense(c))).epsilon(1e-9));
        CHECK(trace_norm_difference(b, c) == doctest::Approx(svd_trace_norm(dense(b) - dense(c))).epsilon(1e-9));
    }
}

TEST_CASE("average output of simple channels") {
    CHECK((dense(average_output(Channel::identity(4))) - MatrixXc::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-14);
    Rng rng = make_rng(62);
    const Channel ch = random_stinespring(3, 2, rng);
    CHECK((dense(average_output(ch)) - ch.apply(MatrixXc::Identity(3, 3) / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("depolarizing output distance contracts the Bloch vector") {
    for (double p : {0.0, 0.1, 0.3, 0.5, 0.75}) {
        const DistanceSamples s = avg_output_distance(depolarizing(p), 50, 7);
        CHECK(s.samples.size() == 50);
        for (double x : s.samples) CHECK(x == doctest::Approx(1 - 4 * p / 3).epsilon(1e-9));
    }
    CHECK(std::abs(avg_output_distance(depolarizing(0.3), 200, 1).mean - 0.6) <= 0.01);
    CHECK(avg_output_distance(depolarizing(0.75), 20, 1).mean < 1e-12);
    CHECK(avg_output_distance(Channel::identity(2), 20, 1).mean == doctest::Approx(1.0));
}

TEST_CASE("decoupling bound of reference channels") {
    const DecouplingBound full = decoupling_bound(depolarizing(0.75));
    CHECK(full.product_shortcut);
    CHECK(full.h_min_cond == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(full.bound == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));

    const DecouplingBound id = decoupling_bound(Channel::identity(2));
    CHECK(id.h_min_cond == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(id.bound == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(id.gap <= 1e-7);

    for (double p : {0.05, 0.3, 0.6}) {
        const DecouplingBound b = decoupling_bound(depolarizing(p));
        CHECK(b.h_min_cond == doctest::Approx(isotropic_h_min(p)).epsilon(1e-6));
    }
    CHECK(decoupling_bound(depolarizing(0.3)).bound >= 0.6);
}

TEST_CASE("empirical mean respects the decoupling bound") {
    for (const Channel& ch : soundness_grid()) {
        const DecouplingReport r = decoupling_report(ch, DecouplingOptions{});
        CHECK(r.empirical_mean >= 0);
        CHECK(r.empirical_mean <= r.bound.bound + 3 * r.empirical_std / std::sqrt(double(r.n_samples)));
        CHECK(r.bound.chain_entropy <= r.bound.h_min_cond + 1e-7);
        CHECK(r.bound.chain_bound >= r.bound.bound - 1e-7);
        for (const auto& [delta, tail] : r.tail) {
            CHECK(tail.tail_fraction >= 0);
            CHECK(tail.tail_fraction <= 1);
        }
    }
}

TEST_CASE("concentration tail bound") {
    const std::vector<double> zeros(100, 0.0);
    const ConcentrationResult big = concentration_check(zeros, 0.0, 0.5, 256);
    CHECK(big.tail_bound == doctest::Approx(2 * std::exp(-4.0)));
    CHECK(big.asserted);
    CHECK(big.pass);
    CHECK(big.tail_fraction == 0);

    const ConcentrationResult small = concentration_check(zeros, 0.0, 0.5, 16);
    CHECK(small.tail_bound == doctest::Approx(2 * std::exp(-0.25)));
    CHECK_FALSE(small.asserted);
    CHECK(small.pass);

    std::vector<double> half(100, 0.0);
    for (std::size_t i = 0; i < 50; ++i) half[i] = 2.0;
    const ConcentrationResult bad = concentration_check(half, 0.0, 0.5, 256);
    CHECK(bad.tail_fraction == doctest::Approx(0.5));
    CHECK_FALSE(bad.pass);
    CHECK_THROWS_AS(concentration_check({}, 0.0, 0.5, 2), std::invalid_argument);
}

TEST_CASE("constant channel never leaves its output") {
    DecouplingOptions o;
    o.n_samples = 50;
    o.deltas = {0.1, 0.5};
    const DecouplingReport r = decoupling_report(Channel::constant(4, MatrixXc::Identity(2, 2) / 2.0), o);
    CHECK(r.empirical_mean < 1e-12);
    for (const auto& [delta, tail] : r.tail) CHECK(tail.tail_fraction == 0);
}

TEST_CASE("injected noise stays within its range") {
    const Channel ch = depolarizing(0.3);
    DecouplingOptions o;
    o.n_samples = 100;
    o.noise = 0.1;
    const DecouplingReport r = decoupling_report(ch, o);
    CHECK(r.empirical_mean >= 0.6 - 1e-12);
    CHECK(r.empirical_mean <= 0.7 + 1e-12);
    CHECK(r.empirical_std > 0);
}

TEST_CASE("converse terms of the identity channel") {
    const double eps = 0.01, delta = 0.01;
    const ConverseTerms t = converse_terms(Channel::identity(16), eps, delta);
    const double x = std::sqrt(2 * delta) + 4 * eps;
    // pure Choi state, maximally mixed output; subnormalized smoothing shifts both by log(1 - eps^2)
    CHECK(t.h_max_ab == doctest::Approx(std::log2(1 - eps * eps)).epsilon(1e-9));
    CHECK(t.fidelity_term == doctest::Approx(std::log2(1 / (1 - x * x))));
    CHECK(t.epsilon_term == doctest::Approx(std::log2(2 / (eps * eps))));
    CHECK(t.h_min_b == doctest::Approx(4 - std::log2(1 - eps * eps)).epsilon(1e-9));
    CHECK(t.lhs == doctest::Approx(t.h_max_ab + t.fidelity_term + t.epsilon_term));
    CHECK_FALSE(t.holds);
    CHECK_THROWS_AS(converse_terms(Channel::identity(2), 0.3, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(converse_terms(Channel::identity(2), 0.01, 0.0), std::invalid_argument);
}

TEST_CASE("converse never fires for the fully depolarizing channel") {
    const Channel full = depolarizing(0.75);
    for (double eps : {0.01, 0.05, 0.1, 0.2})
        for (double delta : {1e-4, 1e-3, 0.01, 0.05}) {
            if (std::sqrt(2 * delta) + 4 * eps >= 1) continue;
            const ConverseResult r = converse_check(full, eps, delta, 10, 2, 1);
            CHECK_FALSE(r.terms.holds);
            CHECK(r.trial_averages.empty());
        }
}

TEST_CASE("converse fires for a large identity channel and no trial output is close") {
    const ConverseResult r = converse_check(Channel::identity(2048), 0.05, 0.001, 50, 10, 1);
    CHECK(r.terms.holds);
    CHECK(r.trial_averages.size() == 12);
    CHECK(r.empirical_consistent);
    CHECK(r.min_trial_average > 0.0005);
}

TEST_CASE("average output is closer than the Haar average") {
    Rng rng = make_rng(63);
    for (int k = 0; k < 10; ++k) {
        const Channel ch = random_stinespring(2 + k % 3, 2, rng);
        const LowRankHermitian omega =
            LowRankHermitian::from_dense(random_density(SubsystemLayout::single("B", ch.output_dim()), rng).matrix());
        const DistanceSamples s = avg_output_distance(ch, omega, 400, 5 + k);
        const double lhs = trace_norm_difference(average_output(ch), omega);
        CHECK(lhs <= s.mean + 3 * s.std / std::sqrt(400.0));
    }
}

TEST_CASE("samples do not depend on the thread count") {
    Rng rng = make_rng(64);
    const Channel ch = random_stinespring(4, 2, rng);
    const unsigned before = thread_count();
    set_thread_count(1);
    const DistanceSamples one = avg_output_distance(ch, 64, 9);
    set_thread_count(4);
    const DistanceSamples four = avg_output_distance(ch, 64, 9);
    set_thread_count(before);
    CHECK(one.samples == four.samples);
    CHECK(one.mean == four.mean);
    const DistanceSamples other = avg_output_distance(ch, 64, 10);
    CHECK(other.samples != one.samples);
}
