#include "qmem/qmat.hpp"
#include "qmem/random.hpp"

#include <doctest.h>

using namespace qmem;

namespace {

SubsystemLayout ab(Index da, Index db) { return {{"A", da}, {"B", db}}; }

} // namespace

TEST_CASE("layout lookups and restriction") {
    const SubsystemLayout l{{"S", 2}, {"E", 3}, {"R", 4}};
    CHECK(l.dim() == 24);
    CHECK(l.index_of("E") == 1);
    CHECK(l.restrict_to({"R", "S"}).names() == std::vector<std::string>{"S", "R"});
    CHECK(l.complement({"E"}) == std::vector<std::string>{"S", "R"});
    CHECK_THROWS_AS(l.index_of("X"), std::invalid_argument);
    CHECK_THROWS_AS((SubsystemLayout{{"A", 2}, {"A", 2}}), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
    MatrixXc m = MatrixXc::Identity(2, 2) * 0.5;
    CHECK_NOTHROW(DensityMatrix(m, SubsystemLayout::single("A", 2)));
    CHECK_THROWS_AS(DensityMatrix(m * 3.0, SubsystemLayout::single("A", 2)), std::invalid_argument);
    m(0, 1) = 0.3;
    CHECK_THROWS_AS(DensityMatrix(m, SubsystemLayout::single("A", 2)), std::invalid_argument);
    CHECK_THROWS_AS(DensityMatrix(MatrixXc::Identity(3, 3) / 3.0, SubsystemLayout::single("A", 2)), std::invalid_argument);
    MatrixXc neg(2, 2);
    neg << 1.2, 0, 0, -0.2;
    CHECK_THROWS_AS(DensityMatrix(neg, SubsystemLayout::single("A", 2)).spectrum(), std::invalid_argument);
}

TEST_CASE("partial trace preserves the trace") {
    Rng rng = make_rng(11);
    for (int k = 0; k < 20; ++k) {
        const DensityMatrix rho = random_density(ab(2, 2), rng);
        const MatrixXc a = partial_trace(rho.matrix(), {2, 2}, {0});
        // full-matrix sum oracle
        std::complex<double> total = 0;
        for (Index i = 0; i < 4; ++i) total += rho.matrix()(i, i);
        CHECK(std::abs(a.trace() - total) < 1e-12);
    }
}

TEST_CASE("partial trace of a product returns the factor") {
    Rng rng = make_rng(12);
    const DensityMatrix a = random_density(SubsystemLayout::single("A", 3), rng);
    const DensityMatrix b = random_density(SubsystemLayout::single("B", 2), rng);
    const DensityMatrix c = random_density(SubsystemLayout::single("C", 2), rng);
    const DensityMatrix abc = kron(kron(a, b), c);
    CHECK((partial_trace(abc, {"B"}).matrix() - b.matrix()).norm() < 1e-12);
    CHECK((partial_trace(abc, {"C", "A"}).matrix() - kron(a.matrix(), c.matrix())).norm() < 1e-12);
}

TEST_CASE("maximally entangled marginal is maximally mixed") {
    for (Index d : {2, 3, 5}) {
        const DensityMatrix psi(max_entangled(d));
        const DensityMatrix m = partial_trace(psi, {"A"});
        CHECK((m.matrix() - maximally_mixed_matrix<double>(d)).norm() < 1e-12);
    }
}

TEST_CASE("maximally entangled state in d = 4 is two copies of d = 2") {
    const PureState four = max_entangled(4);
    const PureState two = max_entangled(2);
    // |Psi_2>_{A1 B1} |Psi_2>_{A2 B2} reordered to (A1 A2)(B1 B2)
    const VectorXc pair = kron(two.amplitudes(), two.amplitudes());
    const MatrixXc reordered = permute_factors(MatrixXc(pair * pair.adjoint()), {2, 2, 2, 2}, {0, 2, 1, 3});
    const std::complex<double> overlap = four.amplitudes().adjoint() * reordered * four.amplitudes();
    CHECK(std::abs(overlap.real() - 1.0) < 1e-12);
}

TEST_CASE("permute_factors swaps a product") {
    Rng rng = make_rng(13);
    const MatrixXc a = random_density(SubsystemLayout::single("A", 2), rng).matrix();
    const MatrixXc b = random_density(SubsystemLayout::single("B", 3), rng).matrix();
    CHECK((permute_factors(kron(a, b), {2, 3}, {1, 0}) - kron(b, a)).norm() < 1e-12);
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
    Rng rng = make_rng(14);
    const MatrixXc h = random_hermitian(8, rng);
    const auto es = hermitian_eig(h);
    const MatrixXc back = es.vectors * es.values.cast<std::complex<double>>().asDiagonal() * es.vectors.adjoint();
    CHECK((back - h).cwiseAbs().maxCoeff() < 1e-9);
    for (Index i = 1; i < 8; ++i) CHECK(es.values(i - 1) >= es.values(i));
    CHECK((hermitian_eigenvalues(h) - es.values).norm() < 1e-10);
}

TEST_CASE("evolution is unitary and obeys the group law") {
    Rng rng = make_rng(15);
    for (int k = 0; k < 10; ++k) {
        const MatrixXc h = random_hermitian(6, rng);
        std::uniform_real_distribution<double> ut(-5, 5);
        const double t1 = ut(rng), t2 = ut(rng);
        const MatrixXc u1 = evolve(h, t1);
        const MatrixXc u2 = evolve(h, t2);
        CHECK(is_isometry(u1, 1e-10));
        CHECK((u1 * u2 - evolve(h, t1 + t2)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("propagator evolves vectors and matrices consistently") {
    Rng rng = make_rng(16);
    const MatrixXc h = random_hermitian(5, rng);
    const Propagator p(h);
    const VectorXc psi = haar_state(5, rng).amplitudes();
    const VectorXc v = p.evolve_vector(psi, 0.7);
    const MatrixXc rho = p.evolve(MatrixXc(psi * psi.adjoint()), 0.7);
    CHECK((rho - v * v.adjoint()).norm() < 1e-12);
}

TEST_CASE("haar states have uniform first moment") {
    Rng rng = make_rng(17);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += std::norm(haar_state(2, rng).amplitudes()(0));
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("haar unitaries are unitary") {
    Rng rng = make_rng(18);
    CHECK(is_isometry(haar_unitary(7, rng), 1e-12));
}

TEST_CASE("random states are valid") {
    Rng rng = make_rng(19);
    for (int k = 0; k < 50; ++k) {
        const DensityMatrix rho = random_density(ab(2, 3), rng, k % 6 + 1);
        CHECK(std::abs(rho.trace() - 1) < 1e-12);
        CHECK(hermiticity_error(rho.matrix()) < 1e-14);
        CHECK(rho.spectrum().minCoeff() >= 0);
    }
}

TEST_CASE("embedding preserves purity") {
    Rng rng = make_rng(20);
    const DensityMatrix rho = random_density(SubsystemLayout::single("W", 3), rng);
    const MatrixXc v = haar_unitary(6, rng).leftCols(3);
    const DensityMatrix big = embed_subspace(rho, v, SubsystemLayout::single("S", 6));
    CHECK(std::abs((big.matrix() * big.matrix()).trace() - (rho.matrix() * rho.matrix()).trace()) < 1e-12);
    CHECK_THROWS_AS(embed_subspace(rho, MatrixXc(v * 2.0), SubsystemLayout::single("S", 6)), std::invalid_argument);
}

TEST_CASE("purified distance of a scaled state") {
    Rng rng = make_rng(21);
    const DensityMatrix rho = random_density(SubsystemLayout::single("A", 3), rng);
    for (double eps : {0.0, 0.05, 0.3, 0.7}) {
        CHECK(std::abs(purified_distance(rho.matrix(), MatrixXc(rho.matrix() * (1 - eps * eps))) - eps) < 1e-7);
    }
}

TEST_CASE("orthogonal pure states are at trace distance 2") {
    MatrixXc a = MatrixXc::Zero(2, 2), b = MatrixXc::Zero(2, 2);
    a(0, 0) = 1;
    b(1, 1) = 1;
    CHECK(trace_distance(a, b) == doctest::Approx(2.0));
    CHECK(fidelity(a, b) == doctest::Approx(0.0));
    CHECK(purified_distance(a, b) == doctest::Approx(1.0));
}

TEST_CASE("distances satisfy the triangle inequality") {
    Rng rng = make_rng(22);
    for (int k = 0; k < 1000; ++k) {
        const Index d = 2 + k % 3;
        const auto l = SubsystemLayout::single("A", d);
        const MatrixXc r = random_density(l, rng).matrix();
        const MatrixXc s = random_density(l, rng).matrix();
        const MatrixXc t = random_density(l, rng, 1).matrix();
        CHECK(trace_distance(r, t) <= trace_distance(r, s) + trace_distance(s, t) + 1e-9);
        CHECK(purified_distance(r, t) <= purified_distance(r, s) + purified_distance(s, t) + 1e-9);
    }
}

TEST_CASE("Fuchs-van de Graaf with the unnormalized trace norm") {
    Rng rng = make_rng(23);
    for (int k = 0; k < 500; ++k) {
        const auto l = SubsystemLayout::single("A", 2 + k % 3);
        const MatrixXc r = random_density(l, rng, 1 + k % 2).matrix();
        const MatrixXc s = random_density(l, rng).matrix();
        const double f = fidelity(r, s);
        const double t = trace_distance(r, s);
        CHECK(2 * (1 - f) <= t + 1e-9);
        CHECK(t <= 2 * std::sqrt(std::max(0.0, 1 - f * f)) + 1e-9);
    }
}

TEST_CASE("fidelity is symmetric and one on equal states") {
    Rng rng = make_rng(24);
    const auto l = SubsystemLayout::single("A", 3);
    const MatrixXc r = random_density(l, rng).matrix();
    const MatrixXc s = random_density(l, rng).matrix();
    CHECK(fidelity(r, s) == doctest::Approx(fidelity(s, r)).epsilon(1e-10));
    CHECK(fidelity(r, r) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("random streams are reproducible and distinct") {
    Rng a = make_rng(5, 3), b = make_rng(5, 3), c = make_rng(5, 4);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
}
