#include "qmem/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qmem {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double log2_checked(double x) {
    if (!(x > 0)) throw std::invalid_argument("entropy: zero matrix");
    return std::log2(x);
}

void check_epsilon(double epsilon) {
    if (!(epsilon >= 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("smoothing parameter must lie in [0, 1)");
}

// Sorted descending, clamped at zero, padded with zeros to dim.
std::vector<double> prepare(std::span<const double> eigenvalues, Index dim) {
    if (dim < static_cast<Index>(eigenvalues.size())) {
        throw std::invalid_argument("smoothing: dimension smaller than the number of eigenvalues");
    }
    std::vector<double> v(eigenvalues.begin(), eigenvalues.end());
    for (double& x : v) {
        if (x < -tol::psd) throw std::invalid_argument("smoothing: negative eigenvalue");
        x = std::max(x, 0.0);
    }
    v.resize(static_cast<std::size_t>(dim), 0.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-8) throw std::invalid_argument("smoothing: state must be normalized");
    return v;
}

// Eigenvalues below the floor are round-off from the eigensolver; they would
// otherwise enter h_max through a square root.
constexpr double kSpectralFloor = 1e-14;

std::vector<double> as_vector(const VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    for (double& x : out)
        if (std::abs(x) < kSpectralFloor) x = 0;
    return out;
}

// Best subnormalized spectrum whose largest entry is at most cap, for sorted
// eigenvalues lambda with `positive` nonzero entries. Fills s if given.
double capped_fidelity(const std::vector<double>& lambda, std::size_t positive, double cap,
                       std::vector<double>* s) {
    const std::size_t n = lambda.size();
    if (s) s->assign(n, 0.0);
    if (static_cast<double>(positive) * cap <= 1.0) {
        double f = 0;
        for (std::size_t i = 0; i < positive; ++i) {
            f += std::sqrt(lambda[i] * cap);
            if (s) (*s)[i] = cap;
        }
        return f;
    }
    // Water-filling: s_i = min(cap, c * lambda_i) with sum s_i = 1.
    std::vector<double> tail(positive + 1, 0.0);
    for (std::size_t i = positive; i-- > 0;) tail[i] = tail[i + 1] + lambda[i];
    std::size_t j = 0;
    double c = 1.0;
    for (; j < positive; ++j) {
        c = (1.0 - static_cast<double>(j) * cap) / tail[j];
        const bool below = c * lambda[j] <= cap * (1 + 1e-15);
        const bool above = j == 0 || c * lambda[j - 1] >= cap * (1 - 1e-12);
        if (below && above) break;
    }
    if (j == positive) { // numerically everything capped
        j = positive;
        c = 0;
    }
    double f = 0;
    for (std::size_t i = 0; i < positive; ++i) {
        const double si = i < j ? cap : c * lambda[i];
        f += std::sqrt(lambda[i] * si);
        if (s) (*s)[i] = si;
    }
    return f;
}

} // namespace

namespace spectral {

double h_min(std::span<const double> eigenvalues) {
    double m = 0;
    for (double x : eigenvalues) m = std::max(m, x);
    return -log2_checked(m);
}

double h_max(std::span<const double> eigenvalues) {
    double s = 0;
    for (double x : eigenvalues) s += std::sqrt(std::max(x, 0.0));
    return 2.0 * log2_checked(s);
}

double von_neumann(std::span<const double> eigenvalues) {
    double h = 0;
    for (double x : eigenvalues) {
        if (x > 0) h -= x * std::log(x);
    }
    return h / kLn2;
}

double purified_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("purified_distance: spectra differ in length");
    double f = 0, tp = 0, tq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        f += std::sqrt(std::max(p[i], 0.0) * std::max(q[i], 0.0));
        tp += p[i];
        tq += q[i];
    }
    const double g = std::min(1.0, f + std::sqrt(std::max(0.0, 1 - tp) * std::max(0.0, 1 - tq)));
    return std::sqrt(std::max(0.0, 1 - g * g));
}

SmoothedSpectrum h_min_smooth(std::span<const double> eigenvalues, Index dim, double epsilon,
                              double bisection_tolerance) {
    check_epsilon(epsilon);
    const std::vector<double> lambda = prepare(eigenvalues, dim);
    SmoothedSpectrum out;
    if (epsilon == 0.0) {
        out.spectrum = Eigen::Map<const VectorXd>(lambda.data(), static_cast<Index>(lambda.size()));
        out.entropy = -log2_checked(lambda.front());
        return out;
    }
    const std::size_t positive =
        static_cast<std::size_t>(std::count_if(lambda.begin(), lambda.end(), [](double x) { return x > 0; }));
    const double target = std::sqrt(1.0 - epsilon * epsilon);
    double lo = 0.0;
    double hi = lambda.front();
    while (hi - lo > bisection_tolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        if (capped_fidelity(lambda, positive, mid, nullptr) >= target) hi = mid;
        else lo = mid;
    }
    std::vector<double> s;
    capped_fidelity(lambda, positive, hi, &s);
    out.spectrum = Eigen::Map<const VectorXd>(s.data(), static_cast<Index>(s.size()));
    out.entropy = -std::log2(*std::max_element(s.begin(), s.end()));
    out.purified_distance = purified_distance(lambda, s);
    return out;
}

SmoothedSpectrum h_max_smooth(std::span<const double> eigenvalues, Index dim, double epsilon) {
    check_epsilon(epsilon);
    const std::vector<double> lambda = prepare(eigenvalues, dim);
    const std::size_t n = lambda.size();
    SmoothedSpectrum out;
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::sqrt(lambda[i]);
    const double target = std::sqrt(1.0 - epsilon * epsilon);

    // Minimize sum x_i over x >= 0 with |x| <= 1 and a.x >= target (x_i^2 is
    // the smoothed spectrum). Without the norm constraint the optimum puts all
    // weight on the largest entries of a; otherwise the norm is active and
    // the optimum is supported on a prefix of the sorted spectrum, where it is
    // the point of the circle {a.x = target, |x| = 1} closest to -1.
    std::vector<double> best = lambda;
    double best_sum = std::accumulate(a.begin(), a.end(), 0.0);
    if (epsilon > 0.0) {
        std::size_t ties = 0;
        while (ties < n && a[ties] >= a.front() * (1 - 1e-12)) ++ties;
        if (target <= a.front() * std::sqrt(static_cast<double>(ties))) {
            const double x = target / (static_cast<double>(ties) * a.front());
            best.assign(n, 0.0);
            for (std::size_t i = 0; i < ties; ++i) best[i] = x * x;
            best_sum = target / a.front();
        } else {
            double sum_a = a.front();
            double sum_l = lambda.front();
            for (std::size_t k = 2; k <= n && a[k - 1] > 0; ++k) {
                sum_a += a[k - 1];
                sum_l += lambda[k - 1];
                if (target * target > sum_l) continue;
                const double norm_a = std::sqrt(sum_l);
                const double p = target / norm_a;
                const double q = std::sqrt(std::max(0.0, 1 - p * p));
                const double alpha = sum_a / norm_a; // <1, u>
                const double w2 = static_cast<double>(k) - alpha * alpha;
                if (w2 <= 1e-18) continue;
                const double w = std::sqrt(w2);
                std::vector<double> x(n, 0.0);
                for (std::size_t i = 0; i < k; ++i) {
                    const double u = a[i] / norm_a;
                    x[i] = p * u - q * (1.0 - alpha * u) / w;
                }
                if (*std::min_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k)) < 0) continue;
                const double sum_x = std::accumulate(x.begin(), x.end(), 0.0);
                if (sum_x < best_sum) {
                    best_sum = sum_x;
                    for (std::size_t i = 0; i < n; ++i) best[i] = x[i] * x[i];
                }
            }
        }
    }
    out.spectrum = Eigen::Map<const VectorXd>(best.data(), static_cast<Index>(n));
    out.entropy = 2.0 * std::log2(best_sum);
    out.purified_distance = purified_distance(lambda, best);
    return out;
}

} // namespace spectral

double shannon(std::span<const double> probabilities) {
    double total = 0;
    for (double p : probabilities) {
        if (p < -tol::psd) throw std::invalid_argument("shannon: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("shannon: probabilities must sum to one");
    return spectral::von_neumann(probabilities);
}

double h_min(const DensityMatrix& rho) { return spectral::h_min(as_vector(rho.spectrum())); }
double h_max(const DensityMatrix& rho) { return spectral::h_max(as_vector(rho.spectrum())); }
double von_neumann(const DensityMatrix& rho) { return spectral::von_neumann(as_vector(rho.spectrum())); }

double h_min_smooth(const DensityMatrix& rho, const SmoothingParams& params) {
    return spectral::h_min_smooth(as_vector(rho.spectrum()), rho.dim(), params.epsilon, params.bisection_tolerance)
        .entropy;
}

double h_min_smooth(const DensityMatrix& rho, double epsilon) {
    return h_min_smooth(rho, SmoothingParams{epsilon});
}

double h_max_smooth(const DensityMatrix& rho, double epsilon) {
    return spectral::h_max_smooth(as_vector(rho.spectrum()), rho.dim(), epsilon).entropy;
}

DensityMatrix h_min_smoothing_state(const DensityMatrix& rho, double epsilon) {
    const auto es = hermitian_eig(rho.matrix());
    const auto smooth = spectral::h_min_smooth(as_vector(es.values), rho.dim(), epsilon);
    // es.values is already descending, so smooth.spectrum is aligned with es.vectors
    MatrixXc sigma = es.vectors * smooth.spectrum.cast<std::complex<double>>().asDiagonal() * es.vectors.adjoint();
    return DensityMatrix(std::move(sigma), rho.layout());
}

EntropyReport entropy_report(const DensityMatrix& rho, const std::vector<std::string>& subject, double epsilon) {
    const auto values = as_vector(partial_trace(rho, subject).spectrum());
    EntropyReport r;
    r.h_min = spectral::h_min(values);
    r.h_max = spectral::h_max(values);
    r.von_neumann = spectral::von_neumann(values);
    r.h_min_smooth = spectral::h_min_smooth(values, rho.dim(), epsilon).entropy;
    r.h_max_smooth = spectral::h_max_smooth(values, rho.dim(), epsilon).entropy;
    r.epsilon = epsilon;
    r.subject = subject;
    return r;
}

EntropyReport entropy_report(const DensityMatrix& rho, double epsilon) {
    const auto values = as_vector(rho.spectrum());
    EntropyReport r;
    r.h_min = spectral::h_min(values);
    r.h_max = spectral::h_max(values);
    r.von_neumann = spectral::von_neumann(values);
    r.h_min_smooth = spectral::h_min_smooth(values, rho.dim(), epsilon).entropy;
    r.h_max_smooth = spectral::h_max_smooth(values, rho.dim(), epsilon).entropy;
    r.epsilon = epsilon;
    r.subject = rho.layout().names();
    return r;
}

double conditional_von_neumann(const DensityMatrix& rho_ab, const std::vector<std::string>& conditioning) {
    return von_neumann(rho_ab) - von_neumann(partial_trace(rho_ab, conditioning));
}

// --- classical-quantum states ----------------------------------------------

double h_min_cond_cq(const std::vector<CqBlock>& blocks, double epsilon) {
    check_epsilon(epsilon);
    if (blocks.empty()) throw std::invalid_argument("h_min_cond_cq: no blocks");
    double total = 0, weighted_max = 0;
    for (const auto& b : blocks) {
        if (b.weight < 0) throw std::invalid_argument("h_min_cond_cq: negative weight");
        total += b.weight;
        const VectorXd ev = hermitian_eigenvalues(b.state);
        if (std::abs(ev.sum() - 1.0) > 1e-9) throw std::invalid_argument("h_min_cond_cq: blocks must be normalized");
        weighted_max += b.weight * ev(0);
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("h_min_cond_cq: weights must sum to one");
    return -std::log2(weighted_max) - std::log2(1.0 - epsilon * epsilon);
}

AnsatzResult cq_ansatz_search(std::span<const double> weights, double epsilon, int max_iterations) {
    check_epsilon(epsilon);
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("cq_ansatz_search: no weights");
    VectorXd b(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0) throw std::invalid_argument("cq_ansatz_search: negative weight");
        b(static_cast<Index>(i)) = std::sqrt(weights[i]);
    }
    if (std::abs(b.squaredNorm() - 1.0) > 1e-9) throw std::invalid_argument("cq_ansatz_search: weights must sum to one");
    const double target = std::sqrt(1.0 - epsilon * epsilon); // sum_i sqrt(w_i mu_i) >= target

    // x_i = sqrt(mu_i); minimize |x|^2 on {b.x >= target}. Start away from the
    // optimum so the search does real work.
    VectorXd x(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Index>(i)) = b(static_cast<Index>(i)) * (1.0 + 0.5 * std::sin(1.0 + 3.0 * i));
    const double step = 0.05;
    AnsatzResult out;
    for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
        VectorXd next = x - 2.0 * step * x;
        const double slack = target - b.dot(next);
        if (slack > 0) next += slack * b / b.squaredNorm();
        next = next.cwiseMax(0.0);
        const double change = (next - x).norm();
        x = std::move(next);
        if (change < 1e-16) break;
    }
    out.mu.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.mu[i] = x(static_cast<Index>(i)) * x(static_cast<Index>(i));
    out.entropy = -std::log2(x.squaredNorm());
    return out;
}

double default_chain_correction(double epsilon) {
    if (epsilon <= 0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::log2(2.0 / epsilon);
}

ChainBounds chain_bounds(const DensityMatrix& rho_ab, const std::vector<std::string>& conditioning, double epsilon,
                         const std::function<double(double)>& correction) {
    check_epsilon(epsilon);
    const DensityMatrix rho_b = partial_trace(rho_ab, conditioning);
    ChainBounds out;
    out.bound1 = h_min_smooth(rho_ab, epsilon) - std::log2(static_cast<double>(rho_b.dim()));
    out.bound2 = h_min_smooth(rho_ab, epsilon / 4) - h_max_smooth(rho_b, epsilon / 4) - correction(epsilon);
    return out;
}

} // namespace qmem
