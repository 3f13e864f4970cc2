#include "qmem/absence.hpp"
#include "qmem/errors.hpp"
#include "qmem/parallel.hpp"
#include "qmem/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmem {

ProductBasis product_basis(const HamiltonianSpec& spec) {
    const HamiltonianSpec s = normalized(spec);
    if (const auto* cp = std::get_if<CoupledProduct>(&s.kind)) {
        return {hermitian_eig(cp->h_s).vectors, hermitian_eig(cp->h_e).vectors};
    }
    const Index d_s = s.layout[0].dim;
    const Index d_e = s.layout[1].dim;
    return {MatrixXc::Identity(d_s, d_s), MatrixXc::Identity(d_e, d_e)};
}

namespace {

// Orthonormal basis of the part of span(b) orthogonal to the unit vector b y.
MatrixXc deflate(const MatrixXc& b, const VectorXc& y) {
    const Index m = b.cols();
    Eigen::HouseholderQR<MatrixXc> qr(y);
    const MatrixXc q = qr.householderQ() * MatrixXc::Identity(m, m);
    return b * q.rightCols(m - 1);
}

} // namespace

EigenSystem<double> aligned_eigenbasis(const MatrixXc& h, const MatrixXc& reference, double degeneracy_tolerance) {
    auto es = hermitian_eig(h);
    const Index n = es.values.size();
    if (reference.rows() != n) throw std::invalid_argument("aligned_eigenbasis: reference basis has the wrong dimension");
    Index start = 0;
    while (start < n) {
        Index end = start + 1;
        const double scale = std::max(1.0, std::abs(es.values(start)));
        while (end < n && std::abs(es.values(end) - es.values(start)) <= degeneracy_tolerance * scale) ++end;
        const Index m = end - start;
        if (m > 1) {
            MatrixXc remaining = es.vectors.middleCols(start, m);
            std::vector<bool> used(static_cast<std::size_t>(reference.cols()), false);
            for (Index step = 0; step < m; ++step) {
                const MatrixXc proj = remaining.adjoint() * reference;
                Index best = -1;
                double best_norm = -1;
                for (Index p = 0; p < reference.cols(); ++p) {
                    if (used[static_cast<std::size_t>(p)]) continue;
                    const double nrm = proj.col(p).norm();
                    if (nrm > best_norm + 1e-12) {
                        best_norm = nrm;
                        best = p;
                    }
                }
                used[static_cast<std::size_t>(best)] = true;
                const VectorXc y = proj.col(best) / best_norm;
                es.vectors.col(start + step) = remaining * y;
                if (remaining.cols() > 1) remaining = deflate(remaining, y);
            }
        }
        start = end;
    }
    return es;
}

MatrixXd overlap_matrix(const MatrixXc& eigenvectors, const MatrixXc& env_basis, const VectorXc& phi) {
    const Index d_e = env_basis.rows();
    const Index d = eigenvectors.rows();
    if (eigenvectors.cols() != d) throw std::invalid_argument("overlap_matrix: eigenbasis must be square");
    if (env_basis.cols() != d_e || phi.size() * d_e != d) throw std::invalid_argument("overlap_matrix: dimension mismatch");
    if (!is_isometry(eigenvectors, 1e-9) || !is_isometry(env_basis, 1e-9)) {
        throw std::invalid_argument("overlap_matrix: bases must be orthonormal");
    }
    if (std::abs(phi.norm() - 1.0) > 1e-9) throw std::invalid_argument("overlap_matrix: phi is not normalized");
    MatrixXc products(d, d_e);
    for (Index j = 0; j < d_e; ++j) products.col(j) = kron(phi, env_basis.col(j));
    return (eigenvectors.adjoint() * products).cwiseAbs();
}

namespace {

AssignmentResult assignment_for(const HamiltonianSpec& spec, Index phi_index, VectorXc* phi_out = nullptr) {
    const ProductBasis pb = product_basis(spec);
    if (phi_index < 0 || phi_index >= pb.system.cols()) throw std::invalid_argument("absence: phi index out of range");
    const MatrixXc reference = kron(pb.system, pb.environment);
    const auto es = aligned_eigenbasis(hamiltonian_matrix(normalized(spec)), reference);
    const VectorXc phi = pb.system.col(phi_index);
    if (phi_out) *phi_out = phi;
    return delta_phi(overlap_matrix(es.vectors, pb.environment, phi));
}

} // namespace

CouplingSearch tune_coupling(CoupledProduct base, Index phi_index, double target, int iterations) {
    auto delta_at = [&](double g) {
        base.g = g;
        HamiltonianSpec spec;
        spec.kind = base;
        return assignment_for(spec, phi_index).delta_phi;
    };
    double lo = 0.0;
    double d_lo = delta_at(lo);
    if (d_lo < target) throw NumericalError("tune_coupling: target not reached even at g = 0");
    double hi = 1.0;
    int doublings = 0;
    while (delta_at(hi) >= target) {
        lo = hi;
        hi *= 2;
        if (++doublings > 40) throw NumericalError("tune_coupling: overlap never drops below the target");
    }
    d_lo = delta_at(lo);
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double d = delta_at(mid);
        if (d >= target) {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
        }
    }
    return {lo, d_lo};
}

AbsenceReport verify_absence(const HamiltonianSpec& spec_in, Index phi_index, const AbsenceOptions& options) {
    VectorXc phi;
    const AssignmentResult a = assignment_for(spec_in, phi_index, &phi);
    AbsenceReport r;
    r.delta_phi = a.delta_phi;
    r.delta_unconstrained = delta_unconstrained(a.overlaps);
    r.bound = memory_bound(std::clamp(a.delta_phi, 0.0, 1.0));
    r.times = options.times;
    r.seed = options.seed;

    HamiltonianSpec spec = spec_in;
    spec.phi_s = phi;
    spec.omega_e.reset();
    const ThermalizationModel model(spec);
    const Index d_s = model.d_s();
    const Index d_e = model.d_e();
    const MatrixXc phi_proj = phi * phi.adjoint();
    const double fidelity_floor = 2 * r.delta_phi * r.delta_phi - 1;

    const std::size_t nt = options.times.size();
    std::vector<double> dist(nt), margin(nt);
    parallel_for(nt, [&](std::size_t i) {
        const MatrixXc tau_s = partial_trace(model.tilde_tau(options.times[i]).matrix(), {d_s, d_e}, {0});
        dist[i] = trace_distance(tau_s, phi_proj);
        const double f = std::sqrt(std::max(0.0, (phi.adjoint() * tau_s * phi)(0).real()));
        margin[i] = f - fidelity_floor;
    });
    r.deterministic_max_distance = nt ? *std::max_element(dist.begin(), dist.end()) : 0.0;
    r.min_fidelity_margin = nt ? *std::min_element(margin.begin(), margin.end()) : 0.0;
    r.deterministic_ok = !r.bound.valid || (r.deterministic_max_distance <= r.bound.bound + options.tolerance &&
                                            r.min_fidelity_margin >= -options.tolerance);

    const double de = static_cast<double>(d_e);
    r.mc_radius = r.bound.bound + static_cast<double>(d_s) / std::sqrt(de) + std::pow(de, -1.0 / 3.0);
    r.mc_bound = std::exp(-std::cbrt(de) / 16.0);
    const std::size_t ns = options.n_env_samples;
    std::vector<std::vector<char>> exceed(ns, std::vector<char>(nt, 0));
    const Propagator& prop = model.propagator();
    parallel_for(ns, [&](std::size_t s) {
        Rng rng = make_rng(options.seed, s);
        const VectorXc psi = haar_state(d_e, rng).amplitudes();
        const VectorXc start = kron(phi, psi);
        for (std::size_t i = 0; i < nt; ++i) {
            const VectorXc v = prop.evolve_vector(start, options.times[i]);
            const MatrixXc m = Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                                               Eigen::RowMajor>>(v.data(), d_s, d_e);
            exceed[s][i] = trace_distance(MatrixXc(m * m.adjoint()), phi_proj) > r.mc_radius;
        }
    });
    for (std::size_t i = 0; i < nt && ns > 0; ++i) {
        std::size_t count = 0;
        for (std::size_t s = 0; s < ns; ++s) count += static_cast<std::size_t>(exceed[s][i]);
        r.mc_exceed_fraction = std::max(r.mc_exceed_fraction, static_cast<double>(count) / static_cast<double>(ns));
    }
    r.mc_asserted = r.bound.valid && r.mc_bound <= 0.05;
    r.mc_ok = !r.mc_asserted || r.mc_exceed_fraction <= r.mc_bound;
    return r;
}

} // namespace qmem
