#include "qmem/entropy.hpp"
#include "qmem/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qmem {

namespace {

using cd = std::complex<double>;

MatrixXc lift(const MatrixXc& sigma, Index d_a) {
    return kron(MatrixXc::Identity(d_a, d_a), sigma);
}

MatrixXc trace_a(const MatrixXc& m, Index d_a, Index d_b) {
    MatrixXc out = MatrixXc::Zero(d_b, d_b);
    for (Index a = 0; a < d_a; ++a) out += m.block(a * d_b, a * d_b, d_b, d_b);
    return out;
}

struct Barrier {
    bool ok = false;
    double value = 0;   // t tr sigma - log det M
    MatrixXc inverse;   // M^{-1}
};

Barrier evaluate(const MatrixXc& rho, const MatrixXc& sigma, Index d_a, double t, bool want_inverse) {
    const MatrixXc m = lift(sigma, d_a) - rho;
    Eigen::LLT<MatrixXc> llt(m);
    Barrier b;
    if (llt.info() != Eigen::Success) return b;
    const auto diag = llt.matrixLLT().diagonal();
    double logdet = 0;
    for (Index i = 0; i < diag.size(); ++i) {
        const double l = diag(i).real();
        if (!(l > 0)) return b;
        logdet += 2.0 * std::log(l);
    }
    b.ok = true;
    b.value = t * sigma.trace().real() - logdet;
    if (want_inverse) b.inverse = llt.solve(MatrixXc::Identity(m.rows(), m.cols()));
    return b;
}

// Hessian of -log det(I (x) sigma - rho) in sigma, acting on row-major vec(Delta):
// L[(b,b'),(p,q)] = sum_{a,a'} N[(a,b),(a',p)] N[(a',q),(a,b')].
MatrixXc hessian(const MatrixXc& n, Index d_a, Index d_b) {
    const Index k = d_b * d_b;
    MatrixXc l = MatrixXc::Zero(k, k);
    for (Index a = 0; a < d_a; ++a) {
        for (Index a2 = 0; a2 < d_a; ++a2) {
            const MatrixXc x = n.block(a * d_b, a2 * d_b, d_b, d_b);
            const MatrixXc y = n.block(a2 * d_b, a * d_b, d_b, d_b).transpose();
            for (Index b = 0; b < d_b; ++b)
                for (Index p = 0; p < d_b; ++p) {
                    const cd xbp = x(b, p);
                    if (xbp == cd(0)) continue;
                    l.block(b * d_b, p * d_b, d_b, d_b).noalias() += xbp * y;
                }
        }
    }
    return l;
}

VectorXc vec(const MatrixXc& m) {
    VectorXc v(m.size());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
    return v;
}

MatrixXc unvec(const VectorXc& v, Index d) {
    MatrixXc m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = v(i * d + j);
    return m;
}

MatrixXc inverse_sqrt(const MatrixXc& c) {
    auto es = hermitian_eig(c);
    for (Index i = 0; i < es.values.size(); ++i) {
        if (!(es.values(i) > 0)) throw NumericalError("conditional min-entropy: singular dual marginal");
        es.values(i) = 1.0 / std::sqrt(es.values(i));
    }
    return es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
}

} // namespace

CondMinEntropyResult solve_cond_min_entropy(const MatrixXc& rho, Index d_a, Index d_b, const SdpOptions& options) {
    const Index d = d_a * d_b;
    if (d_a < 1 || d_b < 1) throw std::invalid_argument("conditional min-entropy: dimensions must be positive");
    if (rho.rows() != d || rho.cols() != d) {
        throw std::invalid_argument("conditional min-entropy: matrix does not match d_A * d_B");
    }
    if (d > options.max_dim) {
        std::ostringstream msg;
        msg << "conditional min-entropy: dimension " << d << " exceeds solver envelope " << options.max_dim;
        throw std::invalid_argument(msg.str());
    }
    const double lambda_max = hermitian_eigenvalues(rho)(0);
    if (!(lambda_max > 0)) throw std::invalid_argument("conditional min-entropy: zero matrix");

    MatrixXc sigma = 1.5 * lambda_max * MatrixXc::Identity(d_b, d_b);
    double t = static_cast<double>(d) / sigma.trace().real();
    const double t_final = 2.0 * static_cast<double>(d) / options.gap_tolerance;
    CondMinEntropyResult out;

    for (;;) {
        // Newton centering for fixed t.
        for (int inner = 0; inner < 100; ++inner) {
            if (out.newton_steps >= options.max_newton_steps) {
                throw NumericalError("conditional min-entropy: Newton iteration limit reached");
            }
            const Barrier here = evaluate(rho, sigma, d_a, t, true);
            if (!here.ok) throw NumericalError("conditional min-entropy: iterate left the feasible region");
            MatrixXc grad = t * MatrixXc::Identity(d_b, d_b) - trace_a(here.inverse, d_a, d_b);
            grad = (grad + grad.adjoint()).eval() / 2.0;
            const MatrixXc h = hessian(here.inverse, d_a, d_b);
            const VectorXc g = vec(grad);
            VectorXc step;
            Eigen::LLT<MatrixXc> llt(h);
            if (llt.info() == Eigen::Success) step = llt.solve(-g);
            else step = h.partialPivLu().solve(-g);
            ++out.newton_steps;
            MatrixXc delta = unvec(step, d_b);
            delta = (delta + delta.adjoint()).eval() / 2.0;
            const double slope = (g.adjoint() * vec(delta))(0).real();
            const double decrement = -slope;
            if (!(decrement >= 0)) throw NumericalError("conditional min-entropy: Hessian is not positive definite");
            if (decrement / 2.0 < 1e-9) break;
            double s = 1.0;
            bool moved = false;
            for (int k = 0; k < 80; ++k, s *= 0.5) {
                const MatrixXc trial = sigma + s * delta;
                const Barrier there = evaluate(rho, trial, d_a, t, false);
                if (there.ok && there.value <= here.value + 0.25 * s * slope) {
                    sigma = trial;
                    moved = true;
                    break;
                }
            }
            if (!moved) break; // no further progress possible in double precision
        }
        if (t >= t_final) break;
        t = std::min(8.0 * t, t_final);
    }

    const Barrier fin = evaluate(rho, sigma, d_a, t, true);
    if (!fin.ok) throw NumericalError("conditional min-entropy: final iterate infeasible");
    const MatrixXc z = fin.inverse / t;
    const MatrixXc c_inv_sqrt = inverse_sqrt(trace_a(z, d_a, d_b));
    const MatrixXc lifted = lift(c_inv_sqrt, d_a);
    const MatrixXc z_feasible = lifted * z * lifted;

    out.primal = sigma.trace().real();
    out.dual = (rho * z_feasible).trace().real();
    out.gap = out.primal - out.dual;
    out.sigma = sigma;
    out.value = -std::log2(out.primal);
    if (!(out.gap <= options.gap_tolerance)) {
        std::ostringstream msg;
        msg << "conditional min-entropy: duality gap " << out.gap << " above tolerance " << options.gap_tolerance;
        throw NumericalError(msg.str());
    }
    return out;
}

namespace {

// rho reordered as [A, B] with B the conditioning factors.
struct Split {
    MatrixXc matrix;
    Index d_a = 1;
    Index d_b = 1;
};

Split split(const DensityMatrix& rho, const std::vector<std::string>& conditioning) {
    if (std::abs(rho.trace() - 1.0) > 1e-8) throw std::invalid_argument("conditional min-entropy: state must be normalized");
    auto order = rho.layout().complement(conditioning);
    Split s;
    for (const auto& name : order) s.d_a *= rho.layout().dim_of(name);
    const auto b_layout = rho.layout().restrict_to(conditioning);
    s.d_b = b_layout.dim();
    for (const auto& f : b_layout) order.push_back(f.name);
    s.matrix = permute_factors(rho, order).matrix();
    return s;
}

} // namespace

CondMinEntropyResult h_min_cond_detail(const DensityMatrix& rho, const std::vector<std::string>& conditioning,
                                       const SdpOptions& options) {
    const Split s = split(rho, conditioning);
    return solve_cond_min_entropy(s.matrix, s.d_a, s.d_b, options);
}

double h_min_cond(const DensityMatrix& rho, const std::vector<std::string>& conditioning, double epsilon,
                  const SdpOptions& options) {
    if (!(epsilon >= 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("smoothing parameter must lie in [0, 1)");
    const double exact = h_min_cond_detail(rho, conditioning, options).value;
    if (epsilon == 0.0) return exact;
    // (1 - eps^2) rho lies at purified distance eps.
    const double scaled = exact - std::log2(1.0 - epsilon * epsilon);
    const DensityMatrix smoothed = h_min_smoothing_state(rho, epsilon);
    const double spectral = h_min_cond_detail(smoothed, conditioning, options).value;
    return std::max(scaled, spectral);
}

} // namespace qmem
