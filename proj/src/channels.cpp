#include "qmem/channels.hpp"
#include "qmem/entropy.hpp"
#include "qmem/errors.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace qmem {

struct Channel::Cache {
    std::once_flag once;
    std::vector<MatrixXc> kraus;
};

namespace {

using cd = std::complex<double>;

void check_completeness(const std::vector<MatrixXc>& kraus) {
    if (kraus.empty()) throw std::invalid_argument("channel: empty Kraus list");
    const Index d_in = kraus.front().cols();
    const Index d_out = kraus.front().rows();
    MatrixXc sum = MatrixXc::Zero(d_in, d_in);
    for (const auto& k : kraus) {
        if (k.cols() != d_in || k.rows() != d_out) throw std::invalid_argument("channel: Kraus operators differ in shape");
        sum += k.adjoint() * k;
    }
    if ((sum - MatrixXc::Identity(d_in, d_in)).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("channel: Kraus operators are not trace preserving");
    }
}

const Factor& env_factor(const Stinespring& s) {
    if (s.env_state.layout().size() != 1) throw std::invalid_argument("channel: environment state must be a single factor");
    return s.env_state.layout()[0];
}

std::vector<MatrixXc> kraus_from_dilation(Index d_in, const Stinespring& s) {
    const Index d_e = s.env_state.dim();
    const VectorXc& psi = s.env_state.amplitudes();
    // columns j of U (|j> (x) |psi>), laid out as rows (i, e)
    MatrixXc applied(d_in * d_e, d_in);
    for (Index j = 0; j < d_in; ++j) {
        applied.col(j) = s.joint_unitary.middleCols(j * d_e, d_e) * psi;
    }
    std::vector<MatrixXc> out;
    if (s.traced == Stinespring::Traced::environment) {
        for (Index e = 0; e < d_e; ++e) {
            MatrixXc k(d_in, d_in);
            for (Index i = 0; i < d_in; ++i) k.row(i) = applied.row(i * d_e + e);
            if (k.cwiseAbs().maxCoeff() > 0) out.push_back(std::move(k));
        }
    } else {
        for (Index i = 0; i < d_in; ++i) {
            MatrixXc k = applied.middleRows(i * d_e, d_e);
            if (k.cwiseAbs().maxCoeff() > 0) out.push_back(std::move(k));
        }
    }
    return out;
}

} // namespace

Channel Channel::from_kraus(std::vector<MatrixXc> kraus) {
    check_completeness(kraus);
    Channel ch;
    ch.kind_ = Kind::kraus;
    ch.input_dim_ = kraus.front().cols();
    ch.output_dim_ = kraus.front().rows();
    ch.cache_ = std::make_shared<Cache>();
    ch.cache_->kraus = std::move(kraus);
    std::call_once(ch.cache_->once, [] {});
    return ch;
}

Channel Channel::from_stinespring(Index input_dim, Stinespring dilation) {
    if (input_dim < 1) throw std::invalid_argument("channel: input dimension must be positive");
    env_factor(dilation);
    const Index d_e = dilation.env_state.dim();
    const Index d = input_dim * d_e;
    const auto& u = dilation.joint_unitary;
    if (u.rows() != d || u.cols() != d) throw std::invalid_argument("channel: joint unitary does not match input (x) environment");
    if ((u.adjoint() * u - MatrixXc::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("channel: joint operator is not unitary");
    }
    Channel ch;
    ch.kind_ = Kind::stinespring;
    ch.input_dim_ = input_dim;
    ch.output_dim_ = dilation.traced == Stinespring::Traced::environment ? input_dim : d_e;
    ch.dilation_ = std::make_shared<const Stinespring>(std::move(dilation));
    ch.cache_ = std::make_shared<Cache>();
    return ch;
}

Channel Channel::identity(Index d) {
    if (d < 1) throw std::invalid_argument("channel: dimension must be positive");
    Channel ch;
    ch.kind_ = Kind::identity;
    ch.input_dim_ = ch.output_dim_ = d;
    ch.cache_ = std::make_shared<Cache>();
    return ch;
}

Channel Channel::unitary(const MatrixXc& u) {
    if (u.rows() != u.cols() || !is_isometry(u, 1e-9)) throw std::invalid_argument("channel: matrix is not unitary");
    Channel ch;
    ch.kind_ = Kind::unitary;
    ch.input_dim_ = ch.output_dim_ = u.rows();
    ch.cache_ = std::make_shared<Cache>();
    ch.cache_->kraus = {u};
    std::call_once(ch.cache_->once, [] {});
    return ch;
}

Channel Channel::constant(Index input_dim, const MatrixXc& omega) {
    const auto es = hermitian_eig(omega);
    if (std::abs(omega.trace().real() - 1.0) > 1e-9 || es.values(es.values.size() - 1) < -tol::psd) {
        throw std::invalid_argument("channel: constant output must be a normalized state");
    }
    // K_{k,j} = sqrt(w_k) |v_k><j|
    std::vector<MatrixXc> kraus;
    for (Index k = 0; k < es.values.size(); ++k) {
        if (es.values(k) <= 0) continue;
        const VectorXc v = es.vectors.col(k) * std::sqrt(es.values(k));
        for (Index j = 0; j < input_dim; ++j) {
            MatrixXc op = MatrixXc::Zero(omega.rows(), input_dim);
            op.col(j) = v;
            kraus.push_back(std::move(op));
        }
    }
    return from_kraus(std::move(kraus));
}

const Stinespring& Channel::stinespring() const {
    if (!dilation_) throw std::logic_error("channel: no Stinespring representation stored");
    return *dilation_;
}

const std::vector<MatrixXc>& Channel::kraus() const {
    std::call_once(cache_->once, [this] {
        if (kind_ == Kind::identity) cache_->kraus = {MatrixXc::Identity(input_dim_, input_dim_)};
        else cache_->kraus = kraus_from_dilation(input_dim_, *dilation_);
    });
    return cache_->kraus;
}

MatrixXc Channel::apply_kraus(const MatrixXc& rho) const {
    if (rho.rows() != input_dim_ || rho.cols() != input_dim_) throw std::invalid_argument("channel: input dimension mismatch");
    MatrixXc out = MatrixXc::Zero(output_dim_, output_dim_);
    for (const auto& k : kraus()) out.noalias() += k * rho * k.adjoint();
    return out;
}

MatrixXc Channel::apply_stinespring(const MatrixXc& rho) const {
    if (rho.rows() != input_dim_ || rho.cols() != input_dim_) throw std::invalid_argument("channel: input dimension mismatch");
    const auto& s = stinespring();
    const MatrixXc joint = s.joint_unitary * kron(rho, s.env_state.projector()) * s.joint_unitary.adjoint();
    const std::size_t keep = s.traced == Stinespring::Traced::environment ? 0 : 1;
    return partial_trace(joint, {input_dim_, s.env_state.dim()}, {keep});
}

MatrixXc Channel::apply(const MatrixXc& rho) const {
    if (rho.rows() != input_dim_ || rho.cols() != input_dim_) throw std::invalid_argument("channel: input dimension mismatch");
    switch (kind_) {
    case Kind::identity:
        return rho;
    case Kind::stinespring:
        return apply_stinespring(rho);
    default:
        return apply_kraus(rho);
    }
}

DensityMatrix Channel::apply(const DensityMatrix& rho, const std::string& output_name) const {
    return DensityMatrix(apply(rho.matrix()), SubsystemLayout::single(output_name, output_dim_));
}

MatrixXc Channel::apply_pure_factor(const VectorXc& phi) const {
    if (phi.size() != input_dim_) throw std::invalid_argument("channel: input dimension mismatch");
    if (kind_ == Kind::identity) return phi;
    const auto& ks = kraus();
    MatrixXc w(output_dim_, static_cast<Index>(ks.size()));
    for (std::size_t k = 0; k < ks.size(); ++k) w.col(static_cast<Index>(k)) = ks[k] * phi;
    return w;
}

MatrixXc Channel::complementary(const MatrixXc& rho) const {
    if (rho.rows() != input_dim_ || rho.cols() != input_dim_) throw std::invalid_argument("channel: input dimension mismatch");
    const auto& ks = kraus();
    const Index r = static_cast<Index>(ks.size());
    MatrixXc out(r, r);
    for (Index k = 0; k < r; ++k)
        for (Index l = 0; l < r; ++l) out(k, l) = (ks[k] * rho * ks[l].adjoint()).trace();
    return out;
}

ChoiState choi(const Channel& ch, std::string source) {
    const Index d_in = ch.input_dim();
    const Index d_out = ch.output_dim();
    const double norm = 1.0 / std::sqrt(static_cast<double>(d_in));
    MatrixXc tau = MatrixXc::Zero(d_in * d_out, d_in * d_out);
    for (const auto& k : ch.kraus()) {
        VectorXc v(d_in * d_out);
        for (Index i = 0; i < d_in; ++i) v.segment(i * d_out, d_out) = k.col(i) * norm;
        tau.noalias() += v * v.adjoint();
    }
    return {DensityMatrix(std::move(tau), SubsystemLayout{{"A'", d_in}, {"B", d_out}}), std::move(source)};
}

VectorXd choi_spectrum(const Channel& ch) {
    if (ch.is_identity()) return VectorXd::Ones(1);
    const auto& ks = ch.kraus();
    const Index r = static_cast<Index>(ks.size());
    MatrixXc gram(r, r);
    const double d = static_cast<double>(ch.input_dim());
    for (Index k = 0; k < r; ++k)
        for (Index l = 0; l < r; ++l) gram(k, l) = (ks[k].adjoint() * ks[l]).trace() / d;
    VectorXd ev = hermitian_eigenvalues(gram);
    return ev.cwiseMax(0.0);
}

DensityMatrix dilation_output(const Channel& ch, const MatrixXc& rho) {
    if (ch.has_stinespring()) {
        const auto& s = ch.stinespring();
        MatrixXc joint = s.joint_unitary * kron(rho, s.env_state.projector()) * s.joint_unitary.adjoint();
        const Index d_e = s.env_state.dim();
        SubsystemLayout layout{{"S", ch.input_dim()}, {"E", d_e}};
        return DensityMatrix(std::move(joint), std::move(layout));
    }
    // canonical isometry V|j> = sum_k K_k|j> (x) |k>
    const auto& ks = ch.kraus();
    const Index r = static_cast<Index>(ks.size());
    const Index d_out = ch.output_dim();
    MatrixXc v(d_out * r, ch.input_dim());
    for (Index b = 0; b < d_out; ++b)
        for (Index k = 0; k < r; ++k) v.row(b * r + k) = ks[static_cast<std::size_t>(k)].row(b);
    return DensityMatrix(v * rho * v.adjoint(), SubsystemLayout{{"S", d_out}, {"E", r}});
}

Channel depolarizing(double p) {
    if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("depolarizing: p must lie in [0, 1]");
    VectorXc psi(4);
    psi << std::sqrt(1.0 - p), std::sqrt(p / 3), std::sqrt(p / 3), std::sqrt(p / 3);
    psi /= psi.norm();
    const cd i(0, 1);
    std::array<MatrixXc, 4> sigma;
    sigma[0] = MatrixXc::Identity(2, 2);
    sigma[1] = MatrixXc::Zero(2, 2);
    sigma[1] << 0, 1, 1, 0;
    sigma[2] = MatrixXc::Zero(2, 2);
    sigma[2] << 0, -i, i, 0;
    sigma[3] = MatrixXc::Zero(2, 2);
    sigma[3] << 1, 0, 0, -1;
    MatrixXc u = MatrixXc::Zero(8, 8);
    for (Index a = 0; a < 4; ++a) {
        MatrixXc proj = MatrixXc::Zero(4, 4);
        proj(a, a) = 1;
        u += kron(sigma[static_cast<std::size_t>(a)], proj);
    }
    Stinespring s{PureState(std::move(psi), SubsystemLayout::single("E", 4)), std::move(u),
                  Stinespring::Traced::environment};
    return Channel::from_stinespring(2, std::move(s));
}

Channel random_stinespring(Index d_a, Index d_e, Rng& rng) {
    VectorXc env = VectorXc::Zero(d_e);
    env(0) = 1;
    Stinespring s{PureState(std::move(env), SubsystemLayout::single("E", d_e)), haar_unitary(d_a * d_e, rng),
                  Stinespring::Traced::environment};
    return Channel::from_stinespring(d_a, std::move(s));
}

double entropy_balance(const Channel& ch) {
    const DensityMatrix tau = dilation_output(ch, maximally_mixed_matrix<double>(ch.input_dim()));
    return von_neumann(partial_trace(tau, {"S"})) - von_neumann(partial_trace(tau, {"E"}));
}

ThresholdResult iid_threshold(const std::function<Channel(double)>& family, double lo, double hi, double tolerance) {
    if (!(lo < hi)) throw std::invalid_argument("iid_threshold: empty interval");
    double f_lo = entropy_balance(family(lo));
    const double f_hi = entropy_balance(family(hi));
    if (f_lo == 0.0) return {lo, 0};
    if (f_hi == 0.0) return {hi, 0};
    if ((f_lo > 0) == (f_hi > 0)) throw NumericalError("iid_threshold: no sign change of H(S) - H(E) on the interval");
    ThresholdResult out;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double f = entropy_balance(family(mid));
        ++out.iterations;
        if (f == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((f > 0) == (f_lo > 0)) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    out.p_c = 0.5 * (lo + hi);
    return out;
}

} // namespace qmem
