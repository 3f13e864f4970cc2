#pragma once

#include "qmem/entropy.hpp"
#include "qmem/qmat.hpp"

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qmem {

// 1-D nearest-neighbour qubit chain. Ising: sum_b J_b Z_b Z_{b+1} + hx sum X + hz sum Z.
// Heisenberg: sum_b J_b (XX + YY + ZZ) + hx sum X + hz sum Z.
struct SpinChain {
    enum class Model { ising, heisenberg };

    Model model = Model::ising;
    int n_sites = 2;
    double j = 1.0;
    std::vector<double> bond_couplings; // overrides j when non-empty, size n_sites - 1
    double hx = 0.0;
    double hz = 0.0;
    std::vector<int> system_sites;      // reordered first: layout is [S, E]
    double boundary_scale = 1.0;        // multiplies bonds crossing the S-E cut

    double coupling(int bond) const;
    bool system_contiguous() const;
    int boundary_size() const; // number of bonds crossing the cut
};

// H_S (x) I + I (x) H_E + g H_int.
struct CoupledProduct {
    MatrixXc h_s;
    MatrixXc h_e;
    MatrixXc h_int;
    double g = 0.0;
};

struct HamiltonianSpec {
    std::variant<MatrixXc, SpinChain, CoupledProduct> kind;
    SubsystemLayout layout; // [S, E]; derived for spin chains and coupled products
    std::optional<MatrixXc> omega_s; // columns span Omega_S; full S when absent
    std::optional<MatrixXc> omega_e;
    std::optional<VectorXc> psi_e;   // initial environment state for tau; |0> when absent
    std::optional<VectorXc> phi_s;   // initial system state for tilde tau; |0> when absent
};

// Validates the spec and fills in the derived layout.
HamiltonianSpec normalized(HamiltonianSpec spec);
MatrixXc hamiltonian_matrix(const HamiltonianSpec& spec);

enum class Verdict { memory_retained, memory_lost, inconclusive };
const char* to_string(Verdict v);

struct CriterionVerdict {
    std::string equation;
    double time = 0;
    double lhs = 0;
    double rhs = 0;
    double margin = 0; // rhs - lhs
    double epsilon = 0;
    Verdict verdict = Verdict::inconclusive;
};

struct CriteriaOptions {
    double epsilon = 0.05;
    double slack = 0.0; // bits required beyond strict inequality
};

struct CriteriaPair {
    CriterionVerdict firing;    // memory lost when it fires (18 resp. 29)
    CriterionVerdict retention; // memory retained when it fires (20 resp. 30)
};

struct DimensionCertificates {
    bool system = false;      // log d_{Omega_S} > 2 log d_E
    bool environment = false; // log d_{Omega_E} > 2 log d_S
};

// Evolution of the two special states under a fixed Hamiltonian; the
// eigendecomposition is computed once.
class ThermalizationModel {
public:
    explicit ThermalizationModel(HamiltonianSpec spec);

    const HamiltonianSpec& spec() const { return spec_; }
    const SubsystemLayout& layout() const { return spec_.layout; }
    Index d_s() const { return spec_.layout[0].dim; }
    Index d_e() const { return spec_.layout[1].dim; }
    Index d_omega_s() const { return omega_s_.cols(); }
    Index d_omega_e() const { return omega_e_.cols(); }
    const Propagator& propagator() const { return propagator_; }

    // U(t) (pi_{Omega_S} (x) |psi><psi|_E) U(t)^dag
    DensityMatrix tau(double t) const;
    // U(t) (|phi><phi|_S (x) pi_{Omega_E}) U(t)^dag
    DensityMatrix tilde_tau(double t) const;

    // Equations 18 (firing) and 20 (retention) on tau(t).
    CriteriaPair system_criteria(double t, const CriteriaOptions& options = {}) const;
    // Equations 29 (firing) and 30 (retention) on tilde_tau(t).
    CriteriaPair env_criteria(double t, const CriteriaOptions& options = {}) const;

    DimensionCertificates certificates() const;

private:
    DensityMatrix evolve_columns(const MatrixXc& columns_eigenbasis, double t) const;

    HamiltonianSpec spec_;
    Propagator propagator_;
    MatrixXc omega_s_;
    MatrixXc omega_e_;
    MatrixXc tau_columns_;       // initial purification columns in the eigenbasis
    MatrixXc tilde_tau_columns_;
};

CriteriaPair system_criteria(const ThermalizationModel& model, double t, const CriteriaOptions& options = {});
CriteriaPair env_criteria(const ThermalizationModel& model, double t, const CriteriaOptions& options = {});
DimensionCertificates dimension_certificates(const ThermalizationModel& model);

// Verdicts on S and E marginals: firing if hmax(first) + slack < hmin(second).
CriteriaPair compare_marginals(const DensityMatrix& first, const DensityMatrix& second, double t,
                               const CriteriaOptions& options, const char* firing_eq, const char* retention_eq);

std::vector<CriteriaPair> criteria_scan(const ThermalizationModel& model, const std::vector<double>& times,
                                        bool environment, const CriteriaOptions& options = {});

struct LightconeRow {
    double t = 0;
    double h_max_e = 0;   // H_max^eps(E)
    double s_deficit = 0; // log d_S - H_min^eps(S)
    Verdict eq18 = Verdict::inconclusive;
};

struct LightconeResult {
    std::vector<LightconeRow> rows;
    double t_star = std::numeric_limits<double>::infinity(); // first sampled time where Eq. 18 fires
    double slope_h_max_e = 0;   // least-squares slope through the origin over the initial window
    double slope_s_deficit = 0;
    int boundary_size = 0;
};

// Requires a spin chain with contiguous S.
LightconeResult lightcone_scan(const ThermalizationModel& model, const std::vector<double>& times,
                               const CriteriaOptions& options = {});

struct RecurrenceResult {
    std::optional<double> t_rec;
    double distance_at_rec = std::numeric_limits<double>::quiet_NaN();
    double min_distance = std::numeric_limits<double>::infinity();
    double t_min_distance = 0;
    std::optional<CriterionVerdict> eq20_at_rec;
    int steps = 0;
};

// Scans t = step, 2 step, ... <= t_max for ||tau(t) - tau(0)||_1 < tolerance.
RecurrenceResult recurrence_scan(const ThermalizationModel& model, double t_max, double step,
                                 double tolerance = 1e-8, const CriteriaOptions& options = {});

} // namespace qmem
