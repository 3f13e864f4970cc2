#pragma once

// Dense complex linear algebra for finite-dimensional quantum states.
//
// Conventions used throughout the library:
//   * Tensor products are Kronecker products with the first factor most
//     significant, so a layout [A, B] indexes rows as a * d_B + b.
//   * The trace norm is unnormalized, ||X||_1 = tr sqrt(X^dag X). Orthogonal
//     pure states are therefore at distance 2, not 1.
//   * Fidelity is F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1 (not squared).
//   * States may be subnormalized (0 < tr rho <= 1).

#include "qmem/layout.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmem {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using MatrixXc = CMatrix<double>;
using VectorXc = CVector<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double psd = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double spectral = 1e-9;
inline constexpr double norm = 1e-12;
} // namespace tol

template <typename Derived>
typename Derived::RealScalar hermiticity_error(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_isometry(const Eigen::MatrixBase<Derived>& v, double tolerance = tol::spectral) {
    if (v.cols() > v.rows()) return false;
    const auto gram = (v.adjoint() * v).eval();
    using M = std::decay_t<decltype(gram)>;
    return (gram - M::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

template <typename A, typename B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    using Scalar = typename A::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = Eigen::kroneckerProduct(a.derived(), b.derived());
    return out;
}

template <typename Real>
CMatrix<Real> maximally_mixed_matrix(Index d) {
    return CMatrix<Real>::Identity(d, d) / static_cast<Real>(d);
}

// ---------------------------------------------------------------------------
// Spectral decomposition

template <typename Real>
struct EigenSystem {
    RVector<Real> values;  // descending
    CMatrix<Real> vectors; // columns are eigenvectors
};

template <typename Derived>
EigenSystem<typename Derived::RealScalar> hermitian_eig(const Eigen::MatrixBase<Derived>& h) {
    using Real = typename Derived::RealScalar;
    using Matrix = CMatrix<Real>;
    if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eig: matrix is not square");
    const Matrix m = h.template cast<std::complex<Real>>();
    const Real scale = std::max<Real>(1, m.size() ? m.cwiseAbs().maxCoeff() : Real(0));
    if (hermiticity_error(m) > tol::hermitian * scale) {
        throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix((m + m.adjoint()) / Real(2)));
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigensolver failed");
    return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

// Eigenvalues only, descending. Diagonal inputs skip the eigensolver.
template <typename Derived>
RVector<typename Derived::RealScalar> hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& h) {
    using Real = typename Derived::RealScalar;
    using Matrix = CMatrix<Real>;
    if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eigenvalues: matrix is not square");
    const Matrix m = h.template cast<std::complex<Real>>();
    const Real scale = std::max<Real>(1, m.size() ? m.cwiseAbs().maxCoeff() : Real(0));
    if (hermiticity_error(m) > tol::hermitian * scale) {
        throw std::invalid_argument("hermitian_eigenvalues: matrix is not Hermitian");
    }
    const Index n = m.rows();
    RVector<Real> values(n);
    const bool diagonal = (m - Matrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == Real(0);
    if (n == 0) return values;
    if (diagonal) {
        values = m.diagonal().real();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix((m + m.adjoint()) / Real(2)), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: eigensolver failed");
        values = es.eigenvalues();
    }
    std::sort(values.data(), values.data() + n, std::greater<Real>());
    return values;
}

// exp(-i H t) from a cached eigendecomposition of H.
template <typename Real>
class BasicPropagator {
public:
    using Matrix = CMatrix<Real>;
    using Vector = CVector<Real>;

    explicit BasicPropagator(const Matrix& hamiltonian) : eig_(hermitian_eig(hamiltonian)) {}
    explicit BasicPropagator(EigenSystem<Real> eig) : eig_(std::move(eig)) {}

    const EigenSystem<Real>& eigensystem() const { return eig_; }
    Index dim() const { return eig_.values.size(); }

    Vector phases(Real t) const {
        Vector p(dim());
        for (Index k = 0; k < dim(); ++k) p(k) = std::polar(Real(1), -eig_.values(k) * t);
        return p;
    }

    Matrix unitary(Real t) const { return eig_.vectors * phases(t).asDiagonal() * eig_.vectors.adjoint(); }

    Matrix to_eigenbasis(const Matrix& rho) const { return eig_.vectors.adjoint() * rho * eig_.vectors; }

    // rho_eig must already be expressed in the eigenbasis (see to_eigenbasis).
    Matrix evolve_eigenbasis(const Matrix& rho_eig, Real t) const {
        const Vector p = phases(t);
        Matrix rotated = p.asDiagonal() * rho_eig * p.adjoint().asDiagonal();
        return eig_.vectors * rotated * eig_.vectors.adjoint();
    }

    Matrix evolve(const Matrix& rho, Real t) const { return evolve_eigenbasis(to_eigenbasis(rho), t); }

    Vector evolve_vector(const Vector& psi, Real t) const {
        Vector c = eig_.vectors.adjoint() * psi;
        return eig_.vectors * (phases(t).array() * c.array()).matrix();
    }

private:
    EigenSystem<Real> eig_;
};

using Propagator = BasicPropagator<double>;

template <typename Derived>
CMatrix<typename Derived::RealScalar> evolve(const Eigen::MatrixBase<Derived>& h, typename Derived::RealScalar t) {
    return BasicPropagator<typename Derived::RealScalar>(h.template cast<std::complex<typename Derived::RealScalar>>())
        .unitary(t);
}

// ---------------------------------------------------------------------------
// Index bookkeeping for tensor factors

namespace detail {

inline std::vector<Index> strides_of(const std::vector<Index>& dims) {
    std::vector<Index> s(dims.size(), 1);
    for (std::size_t f = dims.size(); f-- > 1;) s[f - 1] = s[f] * dims[f];
    return s;
}

inline Index product(const std::vector<Index>& dims) {
    Index d = 1;
    for (Index x : dims) d *= x;
    return d;
}

} // namespace detail

// Partial trace over every factor not listed in keep (factor indices, any order;
// the output keeps the original factor order).
template <typename Derived>
CMatrix<typename Derived::RealScalar> partial_trace(const Eigen::MatrixBase<Derived>& rho,
                                                    const std::vector<Index>& dims,
                                                    std::vector<std::size_t> keep) {
    using Real = typename Derived::RealScalar;
    const Index total = detail::product(dims);
    if (rho.rows() != total || rho.cols() != total) {
        throw std::invalid_argument("partial_trace: matrix dimension does not match factor dimensions");
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    std::vector<bool> kept(dims.size(), false);
    for (auto k : keep) {
        if (k >= dims.size()) throw std::invalid_argument("partial_trace: factor index out of range");
        kept[k] = true;
    }
    Index d_keep = 1;
    for (std::size_t f = 0; f < dims.size(); ++f)
        if (kept[f]) d_keep *= dims[f];
    const Index d_trace = total / d_keep;

    // groups[r * d_keep + a] = full index with kept digits a and traced digits r
    std::vector<Index> groups(static_cast<std::size_t>(total));
    const auto strides = detail::strides_of(dims);
    for (Index full = 0; full < total; ++full) {
        Index a = 0, r = 0;
        for (std::size_t f = 0; f < dims.size(); ++f) {
            const Index digit = (full / strides[f]) % dims[f];
            if (kept[f]) a = a * dims[f] + digit;
            else r = r * dims[f] + digit;
        }
        groups[static_cast<std::size_t>(r * d_keep + a)] = full;
    }

    CMatrix<Real> out = CMatrix<Real>::Zero(d_keep, d_keep);
    for (Index r = 0; r < d_trace; ++r) {
        const Index* g = groups.data() + r * d_keep;
        for (Index b = 0; b < d_keep; ++b)
            for (Index a = 0; a < d_keep; ++a) out(a, b) += std::complex<Real>(rho(g[a], g[b]));
    }
    return out;
}

// Reorders tensor factors: output factor i is input factor order[i].
template <typename Derived>
CMatrix<typename Derived::RealScalar> permute_factors(const Eigen::MatrixBase<Derived>& rho,
                                                      const std::vector<Index>& dims,
                                                      const std::vector<std::size_t>& order) {
    using Real = typename Derived::RealScalar;
    const Index total = detail::product(dims);
    if (order.size() != dims.size()) throw std::invalid_argument("permute_factors: order has wrong length");
    std::vector<Index> new_dims;
    for (auto o : order) new_dims.push_back(dims.at(o));
    const auto old_strides = detail::strides_of(dims);
    const auto new_strides = detail::strides_of(new_dims);
    std::vector<Index> map(static_cast<std::size_t>(total));
    for (Index full = 0; full < total; ++full) {
        Index idx = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Index digit = (full / old_strides[order[i]]) % dims[order[i]];
            idx += digit * new_strides[i];
        }
        map[static_cast<std::size_t>(full)] = idx;
    }
    CMatrix<Real> out(total, total);
    for (Index j = 0; j < total; ++j)
        for (Index i = 0; i < total; ++i) out(map[i], map[j]) = rho(i, j);
    return out;
}

// ---------------------------------------------------------------------------
// State types

template <typename Real>
class BasicPureState {
public:
    using Vector = CVector<Real>;

    BasicPureState(Vector amplitudes, SubsystemLayout layout)
        : amplitudes_(std::move(amplitudes)), layout_(std::move(layout)) {
        if (amplitudes_.size() != layout_.dim()) {
            throw std::invalid_argument("PureState: amplitude count does not match layout dimension");
        }
        if (std::abs(amplitudes_.norm() - Real(1)) > Real(tol::norm)) {
            throw std::invalid_argument("PureState: amplitudes are not normalized");
        }
    }

    static BasicPureState basis(SubsystemLayout layout, Index k) {
        Vector v = Vector::Zero(layout.dim());
        v(k) = 1;
        return BasicPureState(std::move(v), std::move(layout));
    }

    const Vector& amplitudes() const { return amplitudes_; }
    const SubsystemLayout& layout() const { return layout_; }
    Index dim() const { return amplitudes_.size(); }
    CMatrix<Real> projector() const { return amplitudes_ * amplitudes_.adjoint(); }

private:
    Vector amplitudes_;
    SubsystemLayout layout_;
};

template <typename Real>
class BasicDensityMatrix {
public:
    using Matrix = CMatrix<Real>;

    BasicDensityMatrix(Matrix data, SubsystemLayout layout) : data_(std::move(data)), layout_(std::move(layout)) {
        if (data_.rows() != data_.cols()) throw std::invalid_argument("DensityMatrix: matrix is not square");
        if (data_.rows() != layout_.dim()) {
            throw std::invalid_argument("DensityMatrix: matrix dimension does not match layout");
        }
        if (hermiticity_error(data_) > Real(tol::hermitian)) {
            throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
        }
        data_ = (data_ + data_.adjoint()).eval() / Real(2);
        const Real tr = data_.trace().real();
        if (!(tr > 0) || tr > Real(1 + tol::trace)) {
            throw std::invalid_argument("DensityMatrix: trace must lie in (0, 1]");
        }
    }

    explicit BasicDensityMatrix(const BasicPureState<Real>& psi)
        : BasicDensityMatrix(psi.projector(), psi.layout()) {}

    static BasicDensityMatrix maximally_mixed(SubsystemLayout layout) {
        const Index d = layout.dim();
        return BasicDensityMatrix(maximally_mixed_matrix<Real>(d), std::move(layout));
    }

    const Matrix& matrix() const { return data_; }
    const SubsystemLayout& layout() const { return layout_; }
    Index dim() const { return data_.rows(); }
    Real trace() const { return data_.trace().real(); }

    // Descending eigenvalues. Values in [-tol::psd, 0) are clamped to zero;
    // anything more negative is rejected as non-PSD.
    RVector<Real> spectrum() const {
        RVector<Real> v = hermitian_eigenvalues(data_);
        for (Index i = 0; i < v.size(); ++i) {
            if (v(i) < -Real(tol::psd)) throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
            if (v(i) < 0) v(i) = 0;
        }
        return v;
    }

    BasicDensityMatrix scaled(Real c) const { return BasicDensityMatrix(data_ * c, layout_); }

    BasicDensityMatrix with_layout(SubsystemLayout layout) const { return BasicDensityMatrix(data_, std::move(layout)); }

private:
    Matrix data_;
    SubsystemLayout layout_;
};

using PureState = BasicPureState<double>;
using DensityMatrix = BasicDensityMatrix<double>;

template <typename Real>
BasicDensityMatrix<Real> kron(const BasicDensityMatrix<Real>& a, const BasicDensityMatrix<Real>& b) {
    return BasicDensityMatrix<Real>(kron(a.matrix(), b.matrix()), a.layout().concat(b.layout()));
}

template <typename Real>
BasicPureState<Real> kron(const BasicPureState<Real>& a, const BasicPureState<Real>& b) {
    return BasicPureState<Real>(kron(a.amplitudes(), b.amplitudes()), a.layout().concat(b.layout()));
}

template <typename Real>
BasicDensityMatrix<Real> partial_trace(const BasicDensityMatrix<Real>& rho, const std::vector<std::string>& keep) {
    std::vector<std::size_t> idx;
    for (const auto& name : keep) idx.push_back(rho.layout().index_of(name));
    return BasicDensityMatrix<Real>(partial_trace(rho.matrix(), rho.layout().dims(), idx),
                                    rho.layout().restrict_to(keep));
}

template <typename Real>
BasicDensityMatrix<Real> permute_factors(const BasicDensityMatrix<Real>& rho, const std::vector<std::string>& order) {
    if (order.size() != rho.layout().size()) throw std::invalid_argument("permute_factors: order must name every factor");
    std::vector<std::size_t> idx;
    std::vector<Factor> factors;
    for (const auto& name : order) {
        idx.push_back(rho.layout().index_of(name));
        factors.push_back(rho.layout()[idx.back()]);
    }
    return BasicDensityMatrix<Real>(permute_factors(rho.matrix(), rho.layout().dims(), idx),
                                    SubsystemLayout(std::move(factors)));
}

// ---------------------------------------------------------------------------
// Distances

// Unnormalized trace norm of the Hermitian difference.
template <typename A, typename B>
typename A::RealScalar trace_distance(const Eigen::MatrixBase<A>& rho, const Eigen::MatrixBase<B>& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    using Real = typename A::RealScalar;
    const CMatrix<Real> diff = (rho - sigma).template cast<std::complex<Real>>();
    return hermitian_eigenvalues(diff).cwiseAbs().sum();
}

template <typename Real>
Real trace_distance(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
    return trace_distance(rho.matrix(), sigma.matrix());
}

namespace detail {

template <typename Real>
CMatrix<Real> psd_sqrt(const CMatrix<Real>& m) {
    auto es = hermitian_eig(m);
    for (Index i = 0; i < es.values.size(); ++i) {
        if (es.values(i) < -Real(tol::psd)) throw std::invalid_argument("fidelity: input is not positive semidefinite");
        es.values(i) = std::sqrt(std::max<Real>(es.values(i), 0));
    }
    return es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
}

} // namespace detail

// F = ||sqrt(rho) sqrt(sigma)||_1 = tr sqrt(sqrt(rho) sigma sqrt(rho)).
template <typename A, typename B>
typename A::RealScalar fidelity(const Eigen::MatrixBase<A>& rho, const Eigen::MatrixBase<B>& sigma) {
    using Real = typename A::RealScalar;
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    const CMatrix<Real> r = rho.template cast<std::complex<Real>>();
    const CMatrix<Real> s = sigma.template cast<std::complex<Real>>();
    const CMatrix<Real> sr = detail::psd_sqrt(r);
    // sigma must be PSD as well; psd_sqrt validates it.
    (void)detail::psd_sqrt(s);
    const RVector<Real> ev = hermitian_eigenvalues(CMatrix<Real>(sr * s * sr));
    Real f = 0;
    for (Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max<Real>(ev(i), 0));
    return f;
}

template <typename Real>
Real fidelity(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
    return fidelity(rho.matrix(), sigma.matrix());
}

// Purified distance with the generalized fidelity for subnormalized inputs.
template <typename A, typename B>
typename A::RealScalar purified_distance(const Eigen::MatrixBase<A>& rho, const Eigen::MatrixBase<B>& sigma) {
    using Real = typename A::RealScalar;
    const Real tr_r = std::real(rho.trace());
    const Real tr_s = std::real(sigma.trace());
    if (tr_r > Real(1 + tol::trace) || tr_s > Real(1 + tol::trace)) {
        throw std::invalid_argument("purified_distance: trace exceeds one");
    }
    const Real generalized =
        fidelity(rho, sigma) + std::sqrt(std::max<Real>(0, 1 - tr_r) * std::max<Real>(0, 1 - tr_s));
    const Real g = std::min<Real>(generalized, 1);
    return std::sqrt(std::max<Real>(0, 1 - g * g));
}

template <typename Real>
Real purified_distance(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
    return purified_distance(rho.matrix(), sigma.matrix());
}

// ---------------------------------------------------------------------------
// Standard states

// (1/sqrt(d)) sum_i |i>|i> on the layout [first, second].
template <typename Real = double>
BasicPureState<Real> max_entangled(Index d, std::string first = "A'", std::string second = "A") {
    if (d < 1) throw std::invalid_argument("max_entangled: dimension must be positive");
    CVector<Real> v = CVector<Real>::Zero(d * d);
    const Real amp = Real(1) / std::sqrt(static_cast<Real>(d));
    for (Index i = 0; i < d; ++i) v(i * d + i) = amp;
    return BasicPureState<Real>(std::move(v),
                                SubsystemLayout{Factor{std::move(first), d}, Factor{std::move(second), d}});
}

// V rho V^dag for an isometry V whose columns span the target subspace.
template <typename Real>
BasicDensityMatrix<Real> embed_subspace(const BasicDensityMatrix<Real>& rho_sub, const CMatrix<Real>& isometry,
                                        SubsystemLayout target) {
    if (isometry.cols() != rho_sub.dim()) throw std::invalid_argument("embed_subspace: isometry column count mismatch");
    if (isometry.rows() != target.dim()) throw std::invalid_argument("embed_subspace: isometry row count mismatch");
    if (!is_isometry(isometry)) throw std::invalid_argument("embed_subspace: embedding is not an isometry");
    return BasicDensityMatrix<Real>(isometry * rho_sub.matrix() * isometry.adjoint(), std::move(target));
}

} // namespace qmem
