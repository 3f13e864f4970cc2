#pragma once

#include "qmem/dynamics.hpp"
#include "qmem/qmat.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qmem {

// Bases {|i>_S} and {|j>_E} whose products are compared with the energy eigenbasis.
struct ProductBasis {
    MatrixXc system;      // columns |i>_S
    MatrixXc environment; // columns |j>_E
};

// Eigenbases of H_S and H_E for coupled products, computational bases otherwise.
ProductBasis product_basis(const HamiltonianSpec& spec);

// Eigendecomposition of h in which every degenerate eigenspace is rotated
// towards the reference basis: greedily take the reference vector with the
// largest projection onto what is left of the eigenspace (ties to the lower
// index) and orthonormalize.
EigenSystem<double> aligned_eigenbasis(const MatrixXc& h, const MatrixXc& reference, double degeneracy_tolerance = 1e-9);

// (k, j) -> |<E_k| (|phi>_S (x) |j>_E)|, eigenvectors as the columns of eigenvectors.
MatrixXd overlap_matrix(const MatrixXc& eigenvectors, const MatrixXc& env_basis, const VectorXc& phi);

struct AssignmentResult {
    double delta_phi = 0;
    std::vector<std::pair<Index, Index>> assignment; // (eigenstate k, environment label j), one per j
    MatrixXd overlaps;
};

// Bottleneck assignment: the largest theta such that every column j can be
// matched to a distinct row k with overlaps(k, j) >= theta. The eigenstates
// left unmatched can be mapped bijectively onto the product labels outside the
// phi block in any order; the objective does not see them.
AssignmentResult delta_phi(const MatrixXd& overlaps);

// min_j max_k overlaps(k, j): drops the injectivity constraint. Diagnostic only.
double delta_unconstrained(const MatrixXd& overlaps);

struct MemoryBound {
    double bound = 0; // 4 delta sqrt(1 - delta^2)
    bool valid = false; // delta > 1/sqrt(2)
};

MemoryBound memory_bound(double delta);

struct CouplingSearch {
    double g = 0;
    double delta_phi = 1;
};

// Largest-found g with delta_phi(g) >= target, by bisection on g.
CouplingSearch tune_coupling(CoupledProduct base, Index phi_index, double target, int iterations = 60);

struct AbsenceOptions {
    std::vector<double> times;
    std::size_t n_env_samples = 100;
    std::uint64_t seed = 1;
    double tolerance = 1e-8;
};

struct AbsenceReport {
    double delta_phi = 0;
    double delta_unconstrained = 0;
    MemoryBound bound;
    double deterministic_max_distance = 0; // max_t ||tilde tau_S(t) - phi||_1
    double min_fidelity_margin = 0;        // min_t F(tilde tau_S(t), phi) - (2 delta^2 - 1)
    bool deterministic_ok = true;          // checked only when bound.valid
    double mc_radius = 0;                  // bound + d_S / sqrt(d_E) + d_E^{-1/3}
    double mc_exceed_fraction = 0;         // worst fraction over sampled times
    double mc_bound = 0;                   // exp(-d_E^{1/3} / 16)
    bool mc_asserted = false;
    bool mc_ok = true;
    std::vector<double> times;
    std::uint64_t seed = 0;
};

// phi is column phi_index of the system product basis; Omega_E is all of E.
AbsenceReport verify_absence(const HamiltonianSpec& spec, Index phi_index, const AbsenceOptions& options);

} // namespace qmem
