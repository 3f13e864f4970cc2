#pragma once

#include "qmem/qmat.hpp"

#include <cstdint>
#include <random>

namespace qmem {

using Rng = std::mt19937_64;

// Seed of the independent stream for sample `index` under `master`.
// Results of any sampling loop depend only on (master, index).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);
Rng make_rng(std::uint64_t master, std::uint64_t index = 0);

VectorXc gaussian_vector(Index d, Rng& rng);
MatrixXc ginibre(Index rows, Index cols, Rng& rng);

// Haar-random pure state (normalized complex Gaussian, global phase fixed so
// the first nonzero amplitude is real and positive).
PureState haar_state(Index d, Rng& rng, std::string name = "A");
PureState haar_state(Index d, std::uint64_t seed, std::string name = "A");

// Haar-random unitary: QR of a Ginibre matrix with the phases of R's diagonal
// absorbed into Q.
MatrixXc haar_unitary(Index d, Rng& rng);

// Hilbert-Schmidt random state of the given rank (rank = d by default).
DensityMatrix random_density(SubsystemLayout layout, Rng& rng, Index rank = 0);

// GUE draw normalized so that the off-diagonal entries have variance scale^2.
MatrixXc random_hermitian(Index d, Rng& rng, double scale = 1.0);

} // namespace qmem
