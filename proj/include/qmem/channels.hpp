#pragma once

#include "qmem/qmat.hpp"
#include "qmem/random.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qmem {

// Joint unitary acting on [input, env] with the environment prepared in a pure
// state; the output is what remains after tracing one of the two factors.
struct Stinespring {
    enum class Traced { environment, input };

    PureState env_state;
    MatrixXc joint_unitary;
    Traced traced = Traced::environment;
};

// Completely positive trace-preserving map. Immutable; the Kraus form of a
// Stinespring channel is computed on first use and shared between copies.
class Channel {
public:
    static Channel from_kraus(std::vector<MatrixXc> kraus);
    static Channel from_stinespring(Index input_dim, Stinespring dilation);
    static Channel identity(Index d);
    static Channel unitary(const MatrixXc& u);
    // Maps every input to the fixed state omega.
    static Channel constant(Index input_dim, const MatrixXc& omega);

    Index input_dim() const { return input_dim_; }
    Index output_dim() const { return output_dim_; }
    bool is_identity() const { return kind_ == Kind::identity; }
    bool has_stinespring() const { return dilation_ != nullptr; }
    const Stinespring& stinespring() const;

    const std::vector<MatrixXc>& kraus() const;

    MatrixXc apply(const MatrixXc& rho) const;
    DensityMatrix apply(const DensityMatrix& rho, const std::string& output_name = "B") const;
    MatrixXc apply_kraus(const MatrixXc& rho) const;
    MatrixXc apply_stinespring(const MatrixXc& rho) const;

    // W with T(|phi><phi|) = W W^dag; one column per Kraus operator
    // (a single column for unitary channels).
    MatrixXc apply_pure_factor(const VectorXc& phi) const;

    // Environment output tr_B[V rho V^dag] for the Kraus isometry V.
    MatrixXc complementary(const MatrixXc& rho) const;

private:
    enum class Kind { kraus, stinespring, identity, unitary };
    struct Cache;

    Channel() = default;

    Kind kind_ = Kind::kraus;
    Index input_dim_ = 0;
    Index output_dim_ = 0;
    std::shared_ptr<const Stinespring> dilation_;
    std::shared_ptr<Cache> cache_;
};

struct ChoiState {
    DensityMatrix state; // layout [A', B]
    std::string source;
};

// (I (x) T)(|Psi><Psi|) with |Psi> maximally entangled on A'A.
ChoiState choi(const Channel& ch, std::string source = {});

// Nonzero spectrum of the Choi state (descending) from the Kraus Gram matrix,
// without building the d_A d_B square matrix.
VectorXd choi_spectrum(const Channel& ch);

// Joint output U (rho (x) psi_E) U^dag of a dilation on [S, E]. Channels built
// from Kraus operators use the canonical dilation with E the Kraus index.
DensityMatrix dilation_output(const Channel& ch, const MatrixXc& rho);

Channel depolarizing(double p);
Channel random_stinespring(Index d_a, Index d_e, Rng& rng);

struct ThresholdResult {
    double p_c = 0;
    int iterations = 0;
};

// H(S) - H(E) of tau_SE = U (pi_S (x) psi_E) U^dag for the dilation of family(p).
double entropy_balance(const Channel& ch);

// Bisection root of entropy_balance(family(p)) on [lo, hi].
ThresholdResult iid_threshold(const std::function<Channel(double)>& family, double lo = 0.0, double hi = 1.0,
                              double tolerance = 1e-9);

} // namespace qmem
