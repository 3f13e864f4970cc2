#include "qmem/random.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 over the pair
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t master, std::uint64_t index) { return Rng(stream_seed(master, index)); }

VectorXc gaussian_vector(Index d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXc v(d);
    for (Index i = 0; i < d; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = {re, im};
    }
    return v;
}

MatrixXc ginibre(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXc m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = {re, im};
        }
    return m;
}

PureState haar_state(Index d, Rng& rng, std::string name) {
    if (d < 1) throw std::invalid_argument("haar_state: dimension must be positive");
    VectorXc v = gaussian_vector(d, rng);
    double n = v.norm();
    while (n == 0.0) {
        v = gaussian_vector(d, rng);
        n = v.norm();
    }
    v /= n;
    for (Index i = 0; i < d; ++i) {
        if (std::abs(v(i)) > 0) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            break;
        }
    }
    v.normalize();
    return PureState(std::move(v), SubsystemLayout::single(std::move(name), d));
}

PureState haar_state(Index d, std::uint64_t seed, std::string name) {
    Rng rng = make_rng(seed);
    return haar_state(d, rng, std::move(name));
}

MatrixXc haar_unitary(Index d, Rng& rng) {
    const MatrixXc z = ginibre(d, d, rng);
    Eigen::HouseholderQR<MatrixXc> qr(z);
    MatrixXc q = qr.householderQ() * MatrixXc::Identity(d, d);
    const MatrixXc r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j) {
        const auto diag = r(j, j);
        const double a = std::abs(diag);
        if (a > 0) q.col(j) *= diag / a;
    }
    return q;
}

DensityMatrix random_density(SubsystemLayout layout, Rng& rng, Index rank) {
    const Index d = layout.dim();
    if (rank <= 0) rank = d;
    const MatrixXc g = ginibre(d, rank, rng);
    MatrixXc rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho), std::move(layout));
}

MatrixXc random_hermitian(Index d, Rng& rng, double scale) {
    const MatrixXc g = ginibre(d, d, rng);
    return (g + g.adjoint()) * (scale / 2.0);
}

} // namespace qmem
