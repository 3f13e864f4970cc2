#include "qmem/dynamics.hpp"
#include "qmem/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace qmem {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::memory_retained:
        return "memory_retained";
    case Verdict::memory_lost:
        return "memory_lost";
    default:
        return "inconclusive";
    }
}

namespace {

VectorXc basis_vector(Index d, Index k) {
    VectorXc v = VectorXc::Zero(d);
    v(k) = 1;
    return v;
}

} // namespace

ThermalizationModel::ThermalizationModel(HamiltonianSpec spec)
    : spec_(normalized(std::move(spec))), propagator_(hamiltonian_matrix(spec_)) {
    const Index ds = d_s();
    const Index de = d_e();
    omega_s_ = spec_.omega_s ? *spec_.omega_s : MatrixXc(MatrixXc::Identity(ds, ds));
    omega_e_ = spec_.omega_e ? *spec_.omega_e : MatrixXc(MatrixXc::Identity(de, de));
    const VectorXc psi = spec_.psi_e ? *spec_.psi_e : basis_vector(de, 0);
    const VectorXc phi = spec_.phi_s ? *spec_.phi_s : basis_vector(ds, 0);

    MatrixXc x(ds * de, omega_s_.cols());
    for (Index k = 0; k < omega_s_.cols(); ++k) x.col(k) = kron(omega_s_.col(k), psi);
    x /= std::sqrt(static_cast<double>(omega_s_.cols()));
    MatrixXc y(ds * de, omega_e_.cols());
    for (Index k = 0; k < omega_e_.cols(); ++k) y.col(k) = kron(phi, omega_e_.col(k));
    y /= std::sqrt(static_cast<double>(omega_e_.cols()));

    const auto& v = propagator_.eigensystem().vectors;
    tau_columns_ = v.adjoint() * x;
    tilde_tau_columns_ = v.adjoint() * y;
}

DensityMatrix ThermalizationModel::evolve_columns(const MatrixXc& columns, double t) const {
    const VectorXc p = propagator_.phases(t);
    const MatrixXc x = propagator_.eigensystem().vectors * (p.asDiagonal() * columns);
    return DensityMatrix(x * x.adjoint(), spec_.layout);
}

DensityMatrix ThermalizationModel::tau(double t) const { return evolve_columns(tau_columns_, t); }

DensityMatrix ThermalizationModel::tilde_tau(double t) const { return evolve_columns(tilde_tau_columns_, t); }

CriteriaPair compare_marginals(const DensityMatrix& first, const DensityMatrix& second, double t,
                               const CriteriaOptions& options, const char* firing_eq, const char* retention_eq) {
    const auto a = entropy_report(first, options.epsilon);
    const auto b = entropy_report(second, options.epsilon);
    CriteriaPair out;
    auto& f = out.firing;
    f.equation = firing_eq;
    f.time = t;
    f.epsilon = options.epsilon;
    f.lhs = a.h_max_smooth;
    f.rhs = b.h_min_smooth;
    f.margin = f.rhs - f.lhs;
    f.verdict = f.margin > options.slack ? Verdict::memory_lost : Verdict::inconclusive;

    auto& r = out.retention;
    r.equation = retention_eq;
    r.time = t;
    r.epsilon = options.epsilon;
    r.lhs = a.h_min_smooth;
    r.rhs = b.h_max_smooth;
    r.margin = r.rhs - r.lhs;
    r.verdict = -r.margin > options.slack ? Verdict::memory_retained : Verdict::inconclusive;

    // Both can only hold when the smoothing corrections dominate; no sound call then.
    if (f.verdict != Verdict::inconclusive && r.verdict != Verdict::inconclusive) {
        f.verdict = r.verdict = Verdict::inconclusive;
    }
    return out;
}

CriteriaPair ThermalizationModel::system_criteria(double t, const CriteriaOptions& options) const {
    const DensityMatrix rho = tau(t);
    return compare_marginals(partial_trace(rho, {"S"}), partial_trace(rho, {"E"}), t, options, "18", "20");
}

CriteriaPair ThermalizationModel::env_criteria(double t, const CriteriaOptions& options) const {
    const DensityMatrix rho = tilde_tau(t);
    return compare_marginals(partial_trace(rho, {"S"}), partial_trace(rho, {"E"}), t, options, "29", "30");
}

DimensionCertificates ThermalizationModel::certificates() const {
    DimensionCertificates c;
    c.system = std::log2(static_cast<double>(d_omega_s())) > 2.0 * std::log2(static_cast<double>(d_e()));
    c.environment = std::log2(static_cast<double>(d_omega_e())) > 2.0 * std::log2(static_cast<double>(d_s()));
    return c;
}

CriteriaPair system_criteria(const ThermalizationModel& model, double t, const CriteriaOptions& options) {
    return model.system_criteria(t, options);
}

CriteriaPair env_criteria(const ThermalizationModel& model, double t, const CriteriaOptions& options) {
    return model.env_criteria(t, options);
}

DimensionCertificates dimension_certificates(const ThermalizationModel& model) { return model.certificates(); }

std::vector<CriteriaPair> criteria_scan(const ThermalizationModel& model, const std::vector<double>& times,
                                        bool environment, const CriteriaOptions& options) {
    std::vector<CriteriaPair> out(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        out[i] = environment ? model.env_criteria(times[i], options) : model.system_criteria(times[i], options);
    });
    return out;
}

LightconeResult lightcone_scan(const ThermalizationModel& model, const std::vector<double>& times,
                               const CriteriaOptions& options) {
    const auto* chain = std::get_if<SpinChain>(&model.spec().kind);
    if (!chain) throw std::invalid_argument("lightcone_scan: requires a spin chain");
    if (!chain->system_contiguous()) throw std::invalid_argument("lightcone_scan: system sites must be contiguous");
    LightconeResult out;
    out.boundary_size = chain->boundary_size();
    out.rows.resize(times.size());
    const double log_ds = std::log2(static_cast<double>(model.d_s()));
    parallel_for(times.size(), [&](std::size_t i) {
        const DensityMatrix rho = model.tau(times[i]);
        const DensityMatrix rho_s = partial_trace(rho, {"S"});
        const DensityMatrix rho_e = partial_trace(rho, {"E"});
        auto& row = out.rows[i];
        row.t = times[i];
        row.h_max_e = h_max_smooth(rho_e, options.epsilon);
        row.s_deficit = log_ds - h_min_smooth(rho_s, options.epsilon);
        row.eq18 = compare_marginals(rho_s, rho_e, times[i], options, "18", "20").firing.verdict;
    });
    for (const auto& row : out.rows) {
        if (row.eq18 == Verdict::memory_lost && row.t < out.t_star) out.t_star = row.t;
    }
    // initial window: the first quarter of the scanned times (at least two points)
    const std::size_t window = std::max<std::size_t>(2, times.size() / 4);
    double tt = 0, te = 0, ts = 0;
    for (std::size_t i = 0; i < std::min(window, out.rows.size()); ++i) {
        const auto& row = out.rows[i];
        tt += row.t * row.t;
        te += row.t * row.h_max_e;
        ts += row.t * row.s_deficit;
    }
    if (tt > 0) {
        out.slope_h_max_e = te / tt;
        out.slope_s_deficit = ts / tt;
    }
    return out;
}

RecurrenceResult recurrence_scan(const ThermalizationModel& model, double t_max, double step, double tolerance,
                                 const CriteriaOptions& options) {
    if (!(step > 0) || !(t_max > 0)) throw std::invalid_argument("recurrence_scan: step and horizon must be positive");
    const MatrixXc tau0 = model.tau(0.0).matrix();
    const auto n_steps = static_cast<std::size_t>(std::floor(t_max / step * (1 + 1e-12)));
    RecurrenceResult out;
    constexpr std::size_t block = 256;
    std::vector<double> dist;
    for (std::size_t start = 1; start <= n_steps && !out.t_rec; start += block) {
        const std::size_t count = std::min(block, n_steps - start + 1);
        dist.assign(count, 0.0);
        parallel_for(count, [&](std::size_t i) {
            const double t = static_cast<double>(start + i) * step;
            dist[i] = trace_distance(model.tau(t).matrix(), tau0);
        });
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(start + i) * step;
            ++out.steps;
            if (dist[i] < out.min_distance) {
                out.min_distance = dist[i];
                out.t_min_distance = t;
            }
            if (dist[i] < tolerance) {
                out.t_rec = t;
                out.distance_at_rec = dist[i];
                out.eq20_at_rec = model.system_criteria(t, options).retention;
                break;
            }
        }
    }
    return out;
}

} // namespace qmem
