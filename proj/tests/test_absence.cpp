#include "oracles.hpp"

#include "qmem/absence.hpp"
#include "qmem/random.hpp"

#include <doctest.h>

using namespace qmem;

namespace {

CoupledProduct random_coupled(Index ds, Index de, double g, Rng& rng) {
    CoupledProduct cp;
    cp.h_s = random_hermitian(ds, rng);
    cp.h_e = random_hermitian(de, rng);
    cp.h_int = random_hermitian(ds * de, rng);
    cp.g = g;
    return cp;
}

HamiltonianSpec spec_of(const CoupledProduct& cp) {
    HamiltonianSpec s;
    s.kind = cp;
    return normalized(s);
}

MatrixXd overlaps_of(const CoupledProduct& cp, Index phi_index) {
    const HamiltonianSpec spec = spec_of(cp);
    const ProductBasis pb = product_basis(spec);
    const MatrixXc ref = kron(pb.system, pb.environment);
    const auto es = aligned_eigenbasis(hamiltonian_matrix(spec), ref);
    return overlap_matrix(es.vectors, pb.environment, pb.system.col(phi_index));
}

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return t;
}

} // namespace

TEST_CASE("bottleneck assignment on a hand-built block") {
    MatrixXd w(2, 2);
    w << 0.9, 0.2, 0.3, 0.8;
    const AssignmentResult r = delta_phi(w);
    CHECK(r.delta_phi == doctest::Approx(0.8));
    CHECK(r.assignment.size() == 2);
    for (const auto& [k, j] : r.assignment) CHECK(k == j);
    CHECK(delta_unconstrained(w) == doctest::Approx(0.8));

    MatrixXd clash(2, 2);
    clash << 0.9, 0.85, 0.1, 0.2;
    CHECK(delta_phi(clash).delta_phi == doctest::Approx(0.2));
    CHECK(delta_unconstrained(clash) == doctest::Approx(0.85));
}

TEST_CASE("bottleneck assignment matches exhaustive search") {
    Rng rng = make_rng(71);
    std::uniform_int_distribution<int> rows(1, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const int r = rows(rng);
        const int c = std::uniform_int_distribution<int>(1, r)(rng);
        MatrixXd w(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) w(i, j) = unit(rng);
        if (k % 4 == 0) w = (w * 4).array().round() / 4; // ties
        const AssignmentResult a = delta_phi(w);
        CHECK(a.delta_phi == oracle::bottleneck(w));
        CHECK(a.assignment.size() == static_cast<std::size_t>(c));
        std::vector<bool> used(static_cast<std::size_t>(r), false);
        for (const auto& [row, col] : a.assignment) {
            CHECK(!used[static_cast<std::size_t>(row)]);
            used[static_cast<std::size_t>(row)] = true;
            CHECK(w(row, col) >= a.delta_phi);
        }
        CHECK(delta_unconstrained(w) >= a.delta_phi);
    }
}

TEST_CASE("raising an overlap never lowers the bottleneck") {
    Rng rng = make_rng(72);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        MatrixXd w = MatrixXd::NullaryExpr(6, 3, [&]() { return unit(rng); });
        const double before = delta_phi(w).delta_phi;
        const Index i = k % 6, j = k % 3;
        w(i, j) = std::min(1.0, w(i, j) + unit(rng));
        CHECK(delta_phi(w).delta_phi >= before);
    }
}

TEST_CASE("memory bound") {
    CHECK(memory_bound(1.0).bound == doctest::Approx(0.0));
    CHECK(memory_bound(1.0).valid);
    CHECK(memory_bound(1 / std::sqrt(2.0)).bound == doctest::Approx(2.0));
    CHECK_FALSE(memory_bound(1 / std::sqrt(2.0)).valid);
    CHECK(std::abs(memory_bound(0.95).bound - 1.1865496196) < 1e-9);
    CHECK(memory_bound(0.95).valid);
    CHECK_FALSE(memory_bound(0.5).valid);
}

TEST_CASE("uncoupled products have unit overlaps") {
    Rng rng = make_rng(73);
    const CoupledProduct cp = random_coupled(2, 4, 0.0, rng);
    const MatrixXd w = overlaps_of(cp, 0);
    CHECK(w.rows() == 8);
    CHECK(w.cols() == 4);
    for (Index j = 0; j < w.cols(); ++j) {
        CHECK(w.col(j).maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(w.col(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(delta_phi(w).delta_phi == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("degenerate system Hamiltonian is aligned to the product basis") {
    Rng rng = make_rng(74);
    CoupledProduct cp = random_coupled(2, 3, 0.0, rng);
    cp.h_s = MatrixXc::Zero(2, 2);
    CHECK(delta_phi(overlaps_of(cp, 1)).delta_phi == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("overlap deficit is quadratic in a small coupling") {
    Rng rng = make_rng(75);
    for (int k = 0; k < 5; ++k) {
        CoupledProduct cp = random_coupled(2, 3, 0.0, rng);
        auto deficit = [&](double g) {
            cp.g = g;
            const MatrixXd w = overlaps_of(cp, 0);
            double worst = 1;
            for (Index j = 0; j < w.cols(); ++j) worst = std::min(worst, w.col(j).maxCoeff());
            return 1 - worst;
        };
        const double g = 1e-3;
        const double ratio = deficit(g) / deficit(g / 2);
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("tuned coupling keeps the system near its initial state") {
    Rng rng = make_rng(76);
    const CoupledProduct base = random_coupled(2, 16, 0.0, rng);
    const CouplingSearch tuned = tune_coupling(base, 0, 0.95);
    CHECK(tuned.g > 0);
    CHECK(tuned.delta_phi >= 0.95);
    CHECK(tuned.delta_phi < 0.95 + 1e-6);
    CoupledProduct cp = base;
    cp.g = tuned.g;
    AbsenceOptions o;
    o.times = grid(0, 100, 100);
    o.n_env_samples = 20;
    const AbsenceReport r = verify_absence(spec_of(cp), 0, o);
    CHECK(r.delta_phi == doctest::Approx(tuned.delta_phi));
    CHECK(r.bound.valid);
    CHECK(r.deterministic_max_distance <= memory_bound(r.delta_phi).bound + 1e-8);
    CHECK(r.deterministic_max_distance <= 1.1866 + 1e-8);
    CHECK(r.min_fidelity_margin >= -1e-8);
    CHECK(r.deterministic_ok);
    CHECK_FALSE(r.mc_asserted);
    CHECK(r.mc_bound > 0.05);
    CHECK_THROWS(tune_coupling(base, 0, 1.5));
}

TEST_CASE("without coupling the system never moves") {
    Rng rng = make_rng(77);
    const CoupledProduct cp = random_coupled(2, 8, 0.0, rng);
    AbsenceOptions o;
    o.times = grid(0, 100, 100);
    o.n_env_samples = 5;
    const AbsenceReport r = verify_absence(spec_of(cp), 1, o);
    CHECK(r.delta_phi == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.deterministic_max_distance <= 1e-10);
}

TEST_CASE("the bound holds whenever it applies") {
    Rng rng = make_rng(78);
    int applied = 0;
    for (int k = 0; k < 12; ++k) {
        const CoupledProduct cp = random_coupled(2 + k % 2, 4, 0.02 * (k + 1), rng);
        AbsenceOptions o;
        o.times = grid(0, 50, 100);
        o.n_env_samples = 2;
        const AbsenceReport r = verify_absence(spec_of(cp), 0, o);
        CHECK(r.delta_unconstrained >= r.delta_phi);
        if (!r.bound.valid) continue;
        ++applied;
        CHECK(r.deterministic_max_distance <= r.bound.bound + 1e-8);
        CHECK(r.min_fidelity_margin >= -1e-8);
    }
    CHECK(applied >= 3);
}
