#pragma once

// Entropies in bits. Smoothed entropies optimize over normalized states within
// purified distance epsilon of the input. Those are members of the usual
// subnormalized smoothing ball, so the smoothed min-entropy returned here is a
// lower bound on the subnormalized supremum and the smoothed max-entropy is an
// upper bound on the subnormalized infimum. Consumers may rely on exactly
// these directions.

#include "qmem/qmat.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qmem {

// --- spectrum-level functions (eigenvalues need not be sorted) -------------
namespace spectral {

double h_min(std::span<const double> eigenvalues);
double h_max(std::span<const double> eigenvalues);
double von_neumann(std::span<const double> eigenvalues);

struct SmoothedSpectrum {
    VectorXd spectrum;        // optimal subnormalized spectrum, aligned with the sorted input
    double entropy = 0;       // bits
    double purified_distance = 0;
};

// dim >= eigenvalues.size(); missing entries are zero eigenvalues.
SmoothedSpectrum h_min_smooth(std::span<const double> eigenvalues, Index dim, double epsilon,
                              double bisection_tolerance = 1e-12);
SmoothedSpectrum h_max_smooth(std::span<const double> eigenvalues, Index dim, double epsilon);

// Purified distance between two commuting states given by aligned spectra.
double purified_distance(std::span<const double> p, std::span<const double> q);

} // namespace spectral

double shannon(std::span<const double> probabilities);

double h_min(const DensityMatrix& rho);
double h_max(const DensityMatrix& rho);
double von_neumann(const DensityMatrix& rho);

struct SmoothingParams {
    double epsilon = 0.0;
    double bisection_tolerance = 1e-12;
};

double h_min_smooth(const DensityMatrix& rho, double epsilon);
double h_max_smooth(const DensityMatrix& rho, double epsilon);
double h_min_smooth(const DensityMatrix& rho, const SmoothingParams& params);

// The subnormalized state attaining h_min_smooth, diagonal in the eigenbasis of rho.
DensityMatrix h_min_smoothing_state(const DensityMatrix& rho, double epsilon);

struct EntropyReport {
    double h_min = 0;
    double h_max = 0;
    double von_neumann = 0;
    double h_min_smooth = 0; // lower bound on the smoothed min-entropy
    double h_max_smooth = 0; // upper bound on the smoothed max-entropy
    double epsilon = 0;
    std::vector<std::string> subject;
};

EntropyReport entropy_report(const DensityMatrix& rho, double epsilon);
// Report on the marginal of rho on the named factors.
EntropyReport entropy_report(const DensityMatrix& rho, const std::vector<std::string>& subject, double epsilon);

// H(A|B) = H(AB) - H(B) with B the named factors.
double conditional_von_neumann(const DensityMatrix& rho_ab, const std::vector<std::string>& conditioning);

// --- conditional min-entropy -----------------------------------------------

struct SdpOptions {
    double gap_tolerance = 1e-7;
    Index max_dim = 256;
    int max_newton_steps = 2000;
};

struct CondMinEntropyResult {
    double value = 0;        // -log2(primal), a certified lower bound on H_min(A|B)
    double primal = 0;       // tr sigma_B for a feasible sigma_B
    double dual = 0;         // tr(rho Z) for a feasible dual Z
    double gap = 0;          // primal - dual
    int newton_steps = 0;
    MatrixXc sigma;          // optimal sigma_B
};

// 2^{-H_min(A|B)} = min tr sigma_B  s.t.  I_A (x) sigma_B >= rho_AB,
// solved with a log-barrier Newton method started from a multiple of I_B.
// rho is laid out as [A, B].
CondMinEntropyResult solve_cond_min_entropy(const MatrixXc& rho_ab, Index d_a, Index d_b,
                                            const SdpOptions& options = {});

// H_min^eps(A|B) where B are the named conditioning factors and A the rest.
// For eps > 0 the value is the best of a restricted family of smoothed
// candidates and is a lower bound only.
double h_min_cond(const DensityMatrix& rho, const std::vector<std::string>& conditioning, double epsilon = 0.0,
                  const SdpOptions& options = {});
CondMinEntropyResult h_min_cond_detail(const DensityMatrix& rho, const std::vector<std::string>& conditioning,
                                       const SdpOptions& options = {});

// Classical-quantum states sum_i w_i rho_i (x) |i><i|_R.
struct CqBlock {
    double weight = 0;
    MatrixXc state; // normalized state on A
};

// eps = 0: -log2 sum_i w_i lambda_max(rho_i).
// eps > 0: smoothing candidate sigma_i = (1 - eps^2) rho_i, which for pure
// blocks is the optimal choice mu_i = (1 - eps^2) w_i and yields log2 1/(1-eps^2).
double h_min_cond_cq(const std::vector<CqBlock>& blocks, double epsilon);

// Numerical search over sigma_i = mu_i |psi_i><psi_i| for pure blocks:
// maximize -log2 sum mu_i subject to purified distance <= eps. Projected
// gradient on sqrt(mu); independent of the closed form used above.
struct AnsatzResult {
    double entropy = 0;
    std::vector<double> mu;
    int iterations = 0;
};
AnsatzResult cq_ansatz_search(std::span<const double> weights, double epsilon, int max_iterations = 100000);

struct ChainBounds {
    double bound1 = 0; // H_min^eps(AB) - log d_B
    double bound2 = 0; // H_min^{eps/4}(AB) - H_max^{eps/4}(B) - correction(eps)
};

// Default correction 2 log2(2/eps); +infinity at eps = 0.
double default_chain_correction(double epsilon);

ChainBounds chain_bounds(const DensityMatrix& rho_ab, const std::vector<std::string>& conditioning, double epsilon,
                         const std::function<double(double)>& correction = default_chain_correction);

} // namespace qmem
