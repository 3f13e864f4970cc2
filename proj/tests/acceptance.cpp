// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "oracles.hpp"

#include "qmem/absence.hpp"
#include "qmem/channels.hpp"
#include "qmem/decoupling.hpp"
#include "qmem/dynamics.hpp"
#include "qmem/entropy.hpp"
#include "qmem/random.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace qmem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int n, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(a + (b - a) * i / (n - 1));
    return t;
}

HamiltonianSpec dense_spec(Index ds, Index de, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    HamiltonianSpec spec;
    spec.kind = random_hermitian(ds * de, rng);
    spec.layout = SubsystemLayout{{"S", ds}, {"E", de}};
    return spec;
}

Outcome threshold() {
    const auto start = std::chrono::steady_clock::now();
    const ThresholdResult th = iid_threshold(depolarizing);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::abs(th.p_c - 0.1893) <= 1e-4 && secs < 1.0, fmt("p_c = %.6f in %.3f s", th.p_c, secs)};
}

Outcome hashing() {
    const double pc = iid_threshold(depolarizing).p_c;
    const double h = shannon(std::vector<double>{1 - pc, pc / 3, pc / 3, pc / 3});
    const double below = conditional_von_neumann(choi(depolarizing(pc - 0.02)).state, {"B"});
    const double above = conditional_von_neumann(choi(depolarizing(pc + 0.02)).state, {"B"});
    return {std::abs(h - 1) <= 1e-5 && below < 0 && above > 0,
            fmt("H = %.8f bits, H(A'|B) = %.4f / %.4f at p_c -/+ 0.02", h, below, above)};
}

Outcome lemma() {
    Rng rng = make_rng(3);
    double worst = 0, worst_ansatz = 0;
    for (std::size_t n : {2u, 4u, 8u}) {
        std::vector<CqBlock> blocks;
        for (std::size_t i = 0; i < n; ++i) {
            const VectorXc v = haar_state(4, rng).amplitudes();
            blocks.push_back({1.0 / double(n), v * v.adjoint()});
        }
        for (double eps : {0.0, 0.1, 0.3}) {
            const double expect = std::log2(1 / (1 - eps * eps));
            worst = std::max(worst, std::abs(h_min_cond_cq(blocks, eps) - expect));
            const std::vector<double> w(n, 1.0 / double(n));
            worst_ansatz = std::max(worst_ansatz, std::abs(cq_ansatz_search(w, eps).entropy - expect));
        }
    }
    return {worst <= 1e-9 && worst_ansatz <= 1e-6,
            fmt("closed form error %.1e, ansatz error %.1e", worst, worst_ansatz)};
}

Outcome decoupling() {
    std::vector<Channel> channels{Channel::identity(2)};
    for (int i = 0; i <= 7; ++i) channels.push_back(depolarizing(0.1 * i));
    channels.push_back(depolarizing(0.75));
    Rng rng = make_rng(4);
    const Index das[] = {2, 4, 16}, des[] = {2, 4};
    for (int k = 0; k < 20; ++k) channels.push_back(random_stinespring(das[k % 3], des[(k / 3) % 2], rng));
    int violations = 0;
    double worst = -1e300;
    for (const Channel& ch : channels) {
        const DecouplingReport r = decoupling_report(ch, DecouplingOptions{});
        const double excess = r.empirical_mean - r.bound.bound - 3 * r.empirical_std / std::sqrt(double(r.n_samples));
        worst = std::max(worst, excess);
        if (excess > 0) ++violations;
    }
    const double mean = decoupling_report(depolarizing(0.3), DecouplingOptions{}).empirical_mean;
    return {violations == 0 && std::abs(mean - 0.6) <= 0.015,
            fmt("%.0f channels, %.0f violations, depolarizing 0.3 mean %.6f", double(channels.size()), violations,
                mean) +
                fmt(", worst mean - bound - 3se = %.4f", worst)};
}

Outcome concentration() {
    DecouplingOptions o;
    o.n_samples = 2000;
    o.noise = 0.1;
    o.deltas = {0.5};
    const MatrixXc out = MatrixXc::Identity(2, 2) / 2.0;
    const DecouplingReport big = decoupling_report(Channel::constant(256, out), o);
    const ConcentrationResult& t = big.tail.at(0.5);
    o.n_samples = 200;
    const DecouplingReport small = decoupling_report(Channel::constant(16, out), o);
    const ConcentrationResult& s = small.tail.at(0.5);
    return {t.asserted && t.pass && t.tail_fraction <= 2 * std::exp(-4.0) && !s.asserted,
            fmt("d_A = 256 tail %.4f <= %.4f; d_A = 16 bound %.3f skipped", t.tail_fraction, t.tail_bound,
                s.tail_bound)};
}

Outcome converse() {
    int fired = 0, grid_points = 0;
    for (double eps : {0.01, 0.05, 0.1, 0.2})
        for (double delta : {1e-4, 1e-3, 0.01, 0.05}) {
            if (std::sqrt(2 * delta) + 4 * eps >= 1) continue;
            ++grid_points;
            if (converse_terms(depolarizing(0.75), eps, delta).holds) ++fired;
        }
    const ConverseResult r = converse_check(Channel::identity(2048), 0.05, 0.001, 50, 10, 1);
    return {fired == 0 && r.terms.holds && r.empirical_consistent,
            fmt("depolarizing fired %.0f of %.0f; identity 2048 lhs %.4f", fired, grid_points, r.terms.lhs) +
                fmt(" < H_min(B) %.4f, min trial average %.4f", r.terms.h_min_b, r.min_trial_average)};
}

Outcome entropy_suite() {
    Rng rng = make_rng(7);
    int bad_order = 0, bad_monotone = 0, bad_symmetry = 0, bad_oracle = 0;
    double worst_oracle = 0;
    for (int k = 0; k < 1000; ++k) {
        const DensityMatrix rho = random_density(SubsystemLayout::single("A", 2 + k % 6), rng, 1 + k % 4);
        if (h_min(rho) > von_neumann(rho) + 1e-10 || von_neumann(rho) > h_max(rho) + 1e-10) ++bad_order;
        double lo_prev = -1e300, hi_prev = 1e300;
        for (int i = 0; i <= 10; ++i) {
            const double lo = h_min_smooth(rho, 0.03 * i), hi = h_max_smooth(rho, 0.03 * i);
            if (lo < lo_prev - 1e-10 || hi > hi_prev + 1e-10) ++bad_monotone;
            lo_prev = lo;
            hi_prev = hi;
        }
        const Index da = 2 + k % 3, db = 2 + (k / 3) % 3;
        const DensityMatrix psi(PureState(haar_state(da * db, rng).amplitudes(), SubsystemLayout{{"A", da}, {"B", db}}));
        const DensityMatrix a = partial_trace(psi, {"A"}), b = partial_trace(psi, {"B"});
        if (std::abs(h_min(a) - h_min(b)) > 1e-10 || std::abs(h_max(a) - h_max(b)) > 1e-10 ||
            std::abs(h_min_smooth(a, 0.1) - h_min_smooth(b, 0.1)) > 1e-10 ||
            std::abs(h_max_smooth(a, 0.1) - h_max_smooth(b, 0.1)) > 1e-10)
            ++bad_symmetry;
        if (k < 200) {
            const Index d = 2 + k % 2;
            const VectorXd ev = random_density(SubsystemLayout::single("A", d), rng).spectrum();
            const std::vector<double> p(ev.data(), ev.data() + d);
            const double eps = 0.02 + 0.03 * (k % 8);
            const double e1 = std::abs(h_min_smooth(DensityMatrix(ev.cast<std::complex<double>>().asDiagonal(),
                                                                  SubsystemLayout::single("A", d)),
                                                    eps) -
                                       oracle::h_min_smooth(p, eps));
            const double e2 = std::abs(spectral::h_max_smooth(std::span<const double>(p), d, eps).entropy -
                                       oracle::h_max_smooth(p, eps));
            worst_oracle = std::max({worst_oracle, e1, e2});
            if (e1 > 1e-4 || e2 > 1e-4) ++bad_oracle;
        }
    }
    return {bad_order + bad_monotone + bad_symmetry + bad_oracle == 0,
            fmt("ordering %.0f, monotonicity %.0f, symmetry %.0f failures", bad_order, bad_monotone, bad_symmetry) +
                fmt("; oracle worst %.1e bits, %.0f failures", worst_oracle, bad_oracle)};
}

Outcome criteria_sanity() {
    int bad = 0, cases = 0;
    for (Index dw : {2, 3, 4}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            HamiltonianSpec spec = dense_spec(4, 4, 50 + seed);
            Rng rng = make_rng(60 + seed);
            spec.omega_s = haar_unitary(4, rng).leftCols(dw);
            spec.omega_e = haar_unitary(4, rng).leftCols(dw);
            const ThermalizationModel m(spec);
            ++cases;
            const CriteriaPair s = m.system_criteria(0), e = m.env_criteria(0);
            if (s.retention.verdict != Verdict::memory_retained || s.retention.margin > -1e-9) ++bad;
            if (e.firing.verdict != Verdict::memory_lost || e.firing.margin < 1e-9) ++bad;
        }
    }
    Rng rng = make_rng(17);
    std::uniform_real_distribution<double> ut(0, 100);
    int cert_bad = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ThermalizationModel sys(dense_spec(8, 2, 100 + seed));
        const ThermalizationModel env(dense_spec(2, 8, 200 + seed));
        if (!sys.certificates().system || !env.certificates().environment) ++cert_bad;
        for (int k = 0; k < 50; ++k) {
            const double t = ut(rng);
            if (sys.system_criteria(t).retention.verdict != Verdict::memory_retained) ++cert_bad;
            if (env.env_criteria(t).firing.verdict != Verdict::memory_lost) ++cert_bad;
        }
    }
    return {bad == 0 && cert_bad == 0,
            fmt("t = 0 failures %.0f of %.0f models; certificate failures %.0f of 1000 checks", bad, cases, cert_bad)};
}

Outcome lightcone() {
    std::string detail;
    double prev = 0;
    bool ok = true;
    for (int l : {2, 3, 4}) {
        SpinChain c;
        c.n_sites = 8;
        c.hx = 1.0;
        for (int s = 0; s < l; ++s) c.system_sites.push_back(s);
        HamiltonianSpec spec;
        spec.kind = c;
        const auto lc = lightcone_scan(ThermalizationModel(spec), grid(0, 8, 81));
        ok = ok && std::isfinite(lc.t_star) && lc.t_star >= prev;
        prev = lc.t_star;
        if (!detail.empty()) detail += ", ";
        detail += fmt("t*(%.0f) = %.2f", l, lc.t_star);
    }
    return {ok, detail};
}

Outcome absence() {
    Rng rng = make_rng(10);
    CoupledProduct cp{random_hermitian(2, rng), random_hermitian(16, rng), random_hermitian(32, rng), 0.0};
    const CouplingSearch tuned = tune_coupling(cp, 0, 0.95);
    AbsenceOptions o;
    o.times = grid(0, 100, 100);
    o.n_env_samples = 50;
    HamiltonianSpec spec;
    spec.kind = cp;
    const AbsenceReport free = verify_absence(spec, 0, o);
    cp.g = tuned.g;
    spec.kind = cp;
    const AbsenceReport r = verify_absence(spec, 0, o);
    const bool ok = r.bound.valid && r.deterministic_max_distance <= 1.1866 + 1e-8 &&
                    r.deterministic_max_distance <= r.bound.bound + 1e-8 && r.min_fidelity_margin >= -1e-8 &&
                    free.deterministic_max_distance <= 1e-10;
    return {ok, fmt("delta = %.6f at g = %.4g, max distance %.4f", r.delta_phi, tuned.g, r.deterministic_max_distance) +
                    fmt(" <= %.4f, fidelity margin %.3e; g = 0 distance %.1e", r.bound.bound, r.min_fidelity_margin,
                        free.deterministic_max_distance) +
                    fmt("; Monte-Carlo radius %.3f exceeded by %.2f (bound %.3f, not asserted)", r.mc_radius,
                        r.mc_exceed_fraction, r.mc_bound)};
}

Outcome bottleneck() {
    Rng rng = make_rng(11);
    std::uniform_int_distribution<int> rows(1, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0;
    for (int k = 0; k < 200; ++k) {
        const int r = rows(rng);
        const int c = std::uniform_int_distribution<int>(1, r)(rng);
        MatrixXd w(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) w(i, j) = unit(rng);
        if (delta_phi(w).delta_phi != oracle::bottleneck(w)) ++mismatches;
    }
    return {mismatches == 0, fmt("%.0f mismatches in 200 instances", mismatches)};
}

Outcome aep() {
    Rng rng = make_rng(12);
    int decreasing = 0;
    double worst_drop = 0;
    for (int k = 0; k < 20; ++k) {
        const VectorXd one = random_density(SubsystemLayout::single("A", 2), rng).spectrum();
        VectorXd spec = one;
        double prev = -1;
        bool mono = true;
        for (int n = 1; n <= 8; ++n) {
            if (n > 1) {
                VectorXd next(spec.size() * 2);
                for (Index i = 0; i < spec.size(); ++i) next.segment(2 * i, 2) = spec(i) * one;
                spec = next;
            }
            const double rate =
                spectral::h_min_smooth(std::span<const double>(spec.data(), std::size_t(spec.size())), spec.size(), 0.05)
                    .entropy /
                n;
            if (rate < prev - 1e-9) {
                mono = false;
                worst_drop = std::max(worst_drop, prev - rate);
            }
            prev = rate;
        }
        if (!mono) ++decreasing;
    }
    return {decreasing == 0, fmt("%.0f of 20 states have a decreasing rate (largest step down %.4f bits)", decreasing,
                                 worst_drop)};
}

} // namespace

int main() {
    criterion(1, "depolarizing threshold", threshold);
    criterion(2, "hashing-bound consistency", hashing);
    criterion(3, "closed form for classical-quantum states", lemma);
    criterion(4, "decoupling bound", decoupling);
    criterion(5, "concentration", concentration);
    criterion(6, "converse consistency", converse);
    criterion(7, "entropy property suite", entropy_suite);
    criterion(8, "criteria sanity", criteria_sanity);
    criterion(9, "light cone", lightcone);
    criterion(10, "absence of thermalization", absence);
    criterion(11, "bottleneck assignment", bottleneck);
    criterion(12, "i.i.d. trend", aep);
    return failures == 0 ? 0 : 1;
}
