#include "qmem/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmem {

double SpinChain::coupling(int bond) const {
    double c = bond_couplings.empty() ? j : bond_couplings.at(static_cast<std::size_t>(bond));
    const bool a = std::find(system_sites.begin(), system_sites.end(), bond) != system_sites.end();
    const bool b = std::find(system_sites.begin(), system_sites.end(), bond + 1) != system_sites.end();
    if (a != b) c *= boundary_scale;
    return c;
}

bool SpinChain::system_contiguous() const {
    if (system_sites.empty()) return false;
    auto sorted = system_sites;
    std::sort(sorted.begin(), sorted.end());
    return sorted.back() - sorted.front() + 1 == static_cast<int>(sorted.size());
}

int SpinChain::boundary_size() const {
    int count = 0;
    for (int b = 0; b + 1 < n_sites; ++b) {
        const bool a = std::find(system_sites.begin(), system_sites.end(), b) != system_sites.end();
        const bool c = std::find(system_sites.begin(), system_sites.end(), b + 1) != system_sites.end();
        if (a != c) ++count;
    }
    return count;
}

namespace {

using cd = std::complex<double>;

void validate_chain(const SpinChain& c) {
    if (c.n_sites < 2 || c.n_sites > 12) throw std::invalid_argument("spin chain: n_sites must lie in [2, 12]");
    if (!c.bond_couplings.empty() && static_cast<int>(c.bond_couplings.size()) != c.n_sites - 1) {
        throw std::invalid_argument("spin chain: bond_couplings must have n_sites - 1 entries");
    }
    if (c.system_sites.empty() || static_cast<int>(c.system_sites.size()) >= c.n_sites) {
        throw std::invalid_argument("spin chain: system must be a non-empty proper subset of the sites");
    }
    auto sorted = c.system_sites;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("spin chain: duplicate system site");
    }
    if (sorted.front() < 0 || sorted.back() >= c.n_sites) throw std::invalid_argument("spin chain: system site out of range");
}

// Bit position of each site once system sites are moved to the front
// (most significant first).
std::vector<int> bit_positions(const SpinChain& c) {
    std::vector<int> order = c.system_sites;
    for (int s = 0; s < c.n_sites; ++s)
        if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    std::vector<int> pos(static_cast<std::size_t>(c.n_sites));
    for (int k = 0; k < c.n_sites; ++k) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = c.n_sites - 1 - k;
    return pos;
}

MatrixXc chain_matrix(const SpinChain& c) {
    const Index d = Index(1) << c.n_sites;
    const auto pos = bit_positions(c);
    MatrixXc h = MatrixXc::Zero(d, d);
    auto bit = [](Index state, int p) { return (state >> p) & 1; };
    auto z = [&](Index state, int p) { return bit(state, p) ? -1.0 : 1.0; };
    for (Index s = 0; s < d; ++s) {
        for (int site = 0; site < c.n_sites; ++site) {
            const int p = pos[static_cast<std::size_t>(site)];
            h(s, s) += c.hz * z(s, p);
            h(s ^ (Index(1) << p), s) += c.hx;
        }
        for (int b = 0; b + 1 < c.n_sites; ++b) {
            const double jb = c.coupling(b);
            const int p = pos[static_cast<std::size_t>(b)];
            const int q = pos[static_cast<std::size_t>(b + 1)];
            h(s, s) += jb * z(s, p) * z(s, q);
            if (c.model == SpinChain::Model::heisenberg && bit(s, p) != bit(s, q)) {
                // XX + YY swaps antiparallel neighbours with amplitude 2
                h(s ^ (Index(1) << p) ^ (Index(1) << q), s) += 2.0 * jb;
            }
        }
    }
    return h;
}

void check_hermitian(const MatrixXc& h, const char* what) {
    if (h.rows() != h.cols()) throw std::invalid_argument(std::string(what) + " is not square");
    const double scale = std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
    if (hermiticity_error(h) > tol::hermitian * scale) throw std::invalid_argument(std::string(what) + " is not Hermitian");
}

} // namespace

HamiltonianSpec normalized(HamiltonianSpec spec) {
    if (const auto* chain = std::get_if<SpinChain>(&spec.kind)) {
        validate_chain(*chain);
        const Index d_s = Index(1) << chain->system_sites.size();
        const Index d_e = Index(1) << (chain->n_sites - static_cast<int>(chain->system_sites.size()));
        spec.layout = SubsystemLayout{{"S", d_s}, {"E", d_e}};
    } else if (const auto* cp = std::get_if<CoupledProduct>(&spec.kind)) {
        check_hermitian(cp->h_s, "H_S");
        check_hermitian(cp->h_e, "H_E");
        check_hermitian(cp->h_int, "H_int");
        if (cp->h_int.rows() != cp->h_s.rows() * cp->h_e.rows()) {
            throw std::invalid_argument("coupled product: H_int must act on S (x) E");
        }
        spec.layout = SubsystemLayout{{"S", cp->h_s.rows()}, {"E", cp->h_e.rows()}};
    } else {
        const auto& h = std::get<MatrixXc>(spec.kind);
        check_hermitian(h, "Hamiltonian");
        if (spec.layout.empty()) throw std::invalid_argument("explicit Hamiltonian needs a layout [S, E]");
        if (spec.layout.size() != 2) throw std::invalid_argument("Hamiltonian layout must have exactly two factors [S, E]");
        if (spec.layout.dim() != h.rows()) throw std::invalid_argument("Hamiltonian dimension does not match layout");
        spec.layout = SubsystemLayout{{"S", spec.layout[0].dim}, {"E", spec.layout[1].dim}};
    }
    const Index d_s = spec.layout[0].dim;
    const Index d_e = spec.layout[1].dim;
    auto check_subspace = [](const std::optional<MatrixXc>& omega, Index rows, const char* name) {
        if (!omega) return;
        if (omega->rows() != rows || omega->cols() < 1 || omega->cols() > rows) {
            throw std::invalid_argument(std::string(name) + ": basis has the wrong shape");
        }
        if (!is_isometry(*omega, 1e-9)) throw std::invalid_argument(std::string(name) + ": basis is not orthonormal");
    };
    check_subspace(spec.omega_s, d_s, "omega_S");
    check_subspace(spec.omega_e, d_e, "omega_E");
    auto check_state = [](const std::optional<VectorXc>& v, Index dim, const char* name) {
        if (!v) return;
        if (v->size() != dim) throw std::invalid_argument(std::string(name) + ": wrong dimension");
        if (std::abs(v->norm() - 1.0) > 1e-9) throw std::invalid_argument(std::string(name) + ": not normalized");
    };
    check_state(spec.psi_e, d_e, "psi_E");
    check_state(spec.phi_s, d_s, "phi_S");
    return spec;
}

MatrixXc hamiltonian_matrix(const HamiltonianSpec& spec) {
    if (const auto* chain = std::get_if<SpinChain>(&spec.kind)) return chain_matrix(*chain);
    if (const auto* cp = std::get_if<CoupledProduct>(&spec.kind)) {
        const Index d_s = cp->h_s.rows();
        const Index d_e = cp->h_e.rows();
        MatrixXc h = kron(cp->h_s, MatrixXc::Identity(d_e, d_e));
        h += kron(MatrixXc::Identity(d_s, d_s), cp->h_e);
        h += cp->g * cp->h_int;
        return (h + h.adjoint()) / 2.0;
    }
    const auto& h = std::get<MatrixXc>(spec.kind);
    return (h + h.adjoint()) / 2.0;
}

} // namespace qmem
