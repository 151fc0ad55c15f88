#include "mqmed/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mqmed/errors.hpp"
#include "mqmed/quadrature.hpp"

namespace mqmed {

namespace {

constexpr cplx I{0.0, 1.0};

// 1 - cos(x) without cancellation at small x.
double one_minus_cos(double x)
{
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

}  // namespace

// ---- harmonic --------------------------------------------------------------

cplx ho_trace(const HarmonicMode& m, std::size_t a, std::size_t b, double t, const ThermalSpec& th)
{
    const double dd = m.d(b) - m.d(a);
    if (dd == 0.0) return 1.0;
    const double w = m.omega;
    const double huang_rhys = 0.5 * w * dd * dd;  // omega^2 dd^2 / (2 omega)
    const double wt = w * t;
    const cplx exponent = -huang_rhys * cplx(th.coth_half(w) * one_minus_cos(wt), std::sin(wt));
    return std::exp(exponent);
}

cplx ho_weighted_trace(const HarmonicMode& m, std::size_t a, std::size_t b, double t, const ThermalSpec& th)
{
    const double dd = m.d(b) - m.d(a);
    if (dd == 0.0) return 0.0;
    const double w = m.omega;
    const double lambda = 0.5 * w * w * dd * dd;
    const double wt = w * t;
    return lambda * ho_trace(m, a, b, t, th) * cplx(std::cos(wt), -th.coth_half(w) * std::sin(wt));
}

// ---- spin ------------------------------------------------------------------

namespace {

struct SpinAngles {
    double dressed;  // omega tilde
    double cos2;     // cos^2(2 theta)
    double sin2;     // sin^2(2 theta)
};

SpinAngles spin_angles(const SpinMode& m)
{
    const double wt = m.dressed_frequency();
    if (wt == 0.0) return {0.0, 1.0, 0.0};
    const double c = std::cos(2.0 * m.mixing_angle());
    const double s = std::sin(2.0 * m.mixing_angle());
    return {wt, c * c, s * s};
}

}  // namespace

cplx spin_trace(const SpinMode& m, SpinDirection, double t, const ThermalSpec& th)
{
    const SpinAngles g = spin_angles(m);
    if (g.sin2 == 0.0) return 1.0;
    const double x = g.dressed * t;
    return g.cos2 + g.sin2 * cplx(std::cos(x), -th.tanh_half(g.dressed) * std::sin(x));
}

cplx spin_weighted_trace(const SpinMode& m, SpinDirection, double t, const ThermalSpec& th)
{
    const SpinAngles g = spin_angles(m);
    if (g.sin2 == 0.0) return 0.0;
    const double x = g.dressed * t;
    return g.dressed * g.sin2 * cplx(th.tanh_half(g.dressed) * std::cos(x), -std::sin(x));
}

// ---- generic ---------------------------------------------------------------

namespace {

void check_hermitian(const Eigen::MatrixXcd& v, std::size_t cap)
{
    if (v.rows() != v.cols()) throw ModelError("bath operator must be square");
    if (static_cast<std::size_t>(v.rows()) > cap) {
        std::ostringstream msg;
        msg << "generic mode dimension " << v.rows() << " exceeds cap " << cap;
        throw DimensionCapError(msg.str());
    }
    const double asym = (v - v.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermiticityTolerance) throw ModelError("non-Hermitian bath operator");
}

// Normalised Boltzmann weights of the eigenvalues.
Eigen::VectorXd thermal_weights(const Eigen::VectorXd& e, const ThermalSpec& th)
{
    const double e0 = e.minCoeff();
    Eigen::VectorXd p(e.size());
    if (th.zero_temperature) {
        const double tol = 1e-12 * std::max(1.0, std::abs(e0));
        for (Eigen::Index i = 0; i < e.size(); ++i) p(i) = (e(i) - e0 <= tol) ? 1.0 : 0.0;
    } else {
        for (Eigen::Index i = 0; i < e.size(); ++i) p(i) = std::exp(-th.beta * (e(i) - e0));
    }
    return p / p.sum();
}

}  // namespace

GenericPairTrace::GenericPairTrace(const Eigen::MatrixXcd& v_a, const Eigen::MatrixXcd& v_b,
                                   const ThermalSpec& th, std::size_t dim_cap)
{
    check_hermitian(v_a, dim_cap);
    check_hermitian(v_b, dim_cap);
    if (v_a.rows() != v_b.rows()) throw ModelError("generic mode operators differ in dimension");
    const Eigen::MatrixXcd ha = 0.5 * (v_a + v_a.adjoint());
    const Eigen::MatrixXcd hb = 0.5 * (v_b + v_b.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(ha), eb(hb);
    const Eigen::VectorXd& a = ea.eigenvalues();
    const Eigen::VectorXd& b = eb.eigenvalues();
    const Eigen::VectorXd p = thermal_weights(a, th);
    const Eigen::MatrixXcd overlap = ea.eigenvectors().adjoint() * eb.eigenvectors();
    for (Eigen::Index m = 0; m < a.size(); ++m) {
        if (p(m) == 0.0) continue;
        for (Eigen::Index n = 0; n < b.size(); ++n) {
            const double w = p(m) * std::norm(overlap(m, n));
            if (w == 0.0) continue;
            const double delta = b(n) - a(m);
            const double cw[2] = {w, w * delta};
            table_.add(delta, cw, cw);
        }
    }
}

void GenericPairTrace::evaluate(double t, cplx& plain, cplx& weighted) const
{
    simd::PhaseSum s[2];
    table_.evaluate(t, s);
    plain = cplx(s[0].cos_sum, -s[0].sin_sum);
    weighted = cplx(s[1].cos_sum, -s[1].sin_sum);
}

cplx GenericPairTrace::plain(double t) const
{
    cplx p, w;
    evaluate(t, p, w);
    return p;
}

cplx GenericPairTrace::weighted(double t) const
{
    cplx p, w;
    evaluate(t, p, w);
    return w;
}

cplx generic_trace(const GenericMode& m, std::size_t a, std::size_t b, double t, const ThermalSpec& th,
                   std::size_t dim_cap)
{
    return GenericPairTrace(m.v.at(a), m.v.at(b), th, dim_cap).plain(t);
}

cplx generic_weighted_trace(const GenericMode& m, std::size_t a, std::size_t b, double t,
                            const ThermalSpec& th, std::size_t dim_cap)
{
    return GenericPairTrace(m.v.at(a), m.v.at(b), th, dim_cap).weighted(t);
}

double log_partition_function(const Eigen::MatrixXcd& v, const ThermalSpec& th)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (v + v.adjoint()), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& e = es.eigenvalues();
    const double e0 = e.minCoeff();
    if (th.zero_temperature) {
        const double tol = 1e-12 * std::max(1.0, std::abs(e0));
        double g = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i) g += (e(i) - e0 <= tol) ? 1.0 : 0.0;
        return std::log(g);  // beta-independent part; the ground energy cancels in ratios only at T > 0
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) s += std::exp(-th.beta * (e(i) - e0));
    return -th.beta * e0 + std::log(s);
}

// ---- engine ----------------------------------------------------------------

TraceEngine::TraceEngine(const Model& model, std::size_t generic_dim_cap)
    : model_(model), n_states_(model.n_states()), n_modes_(model.n_modes())
{
    require_valid(model_);
    if (is_harmonic(model_.bath)) harmonic_ = harmonic_modes(model_.bath, n_states_);
    if (const auto* gb = std::get_if<GenericBath>(&model_.bath)) {
        generic_.resize(n_modes_ * n_states_ * n_states_);
        for (std::size_t j = 0; j < n_modes_; ++j) {
            for (std::size_t a = 0; a < n_states_; ++a) {
                for (std::size_t b = 0; b < n_states_; ++b) {
                    if (a == b) continue;
                    generic_[(j * n_states_ + a) * n_states_ + b] = std::make_unique<GenericPairTrace>(
                        gb->modes[j].v[a], gb->modes[j].v[b], model_.thermal, generic_dim_cap);
                }
            }
        }
    }
}

const GenericPairTrace& TraceEngine::generic_pair(std::size_t j, std::size_t a, std::size_t b) const
{
    return *generic_[(j * n_states_ + a) * n_states_ + b];
}

cplx TraceEngine::mode_trace(std::size_t j, std::size_t a, std::size_t b, double t) const
{
    if (a == b) return 1.0;
    switch (model_.bath.index()) {
    case 0:
    case 1: return ho_trace(harmonic_[j], a, b, t, model_.thermal);
    case 2: {
        const auto& m = std::get<SpinBath>(model_.bath).modes[j];
        return spin_trace(m, a == 0 ? SpinDirection::plus_to_minus : SpinDirection::minus_to_plus, t,
                          model_.thermal);
    }
    default: return generic_pair(j, a, b).plain(t);
    }
}

cplx TraceEngine::mode_weighted_trace(std::size_t j, std::size_t a, std::size_t b, double t) const
{
    if (a == b) return 0.0;
    switch (model_.bath.index()) {
    case 0:
    case 1: return ho_weighted_trace(harmonic_[j], a, b, t, model_.thermal);
    case 2: {
        const auto& m = std::get<SpinBath>(model_.bath).modes[j];
        return spin_weighted_trace(m, a == 0 ? SpinDirection::plus_to_minus : SpinDirection::minus_to_plus,
                                   t, model_.thermal);
    }
    default: return generic_pair(j, a, b).weighted(t);
    }
}

cplx TraceEngine::full_trace(std::size_t a, std::size_t b, double t) const
{
    const double de = model_.subsystem.energies[b] - model_.subsystem.energies[a];
    cplx prod = std::exp(-I * (t * de));
    for (std::size_t j = 0; j < n_modes_; ++j) prod *= mode_trace(j, a, b, t);
    return prod;
}

cplx TraceEngine::full_trace_weighted(std::size_t j, std::size_t a, std::size_t b, double t) const
{
    const double de = model_.subsystem.energies[b] - model_.subsystem.energies[a];
    cplx prod = std::exp(-I * (t * de));
    for (std::size_t k = 0; k < n_modes_; ++k)
        prod *= (k == j) ? mode_weighted_trace(k, a, b, t) : mode_trace(k, a, b, t);
    return prod;
}

cplx assemble_full_trace(const Model& model, std::size_t a, std::size_t b, double t)
{
    return TraceEngine(model).full_trace(a, b, t);
}

// ---- line broadening -------------------------------------------------------

LineBroadening::LineBroadening(const std::vector<HarmonicMode>& modes, std::size_t n_states,
                               const ThermalSpec& th)
    : n_states_(n_states), lambda_(Eigen::MatrixXd::Zero(n_states, n_states))
{
    pairs_.resize(n_states * (n_states + 1) / 2);
    for (std::size_t a = 0; a < n_states; ++a) {
        for (std::size_t b = a; b < n_states; ++b) {
            PairTable& p = pairs_[a * n_states - a * (a + 1) / 2 + b];
            for (const auto& m : modes) {
                const double w = m.omega;
                const double c = 0.5 * w * m.d(a) * m.d(b);  // J_j / w_j^2
                if (c == 0.0) continue;
                const double coth = th.coth_half(w);
                const double cw[2] = {-c * coth, c * w};
                const double sw[2] = {c, c * w * coth};
                p.table.add(w, cw, sw);
                p.re_const += c * coth;
                p.lambda += c * w;
            }
            lambda_(a, b) = lambda_(b, a) = p.lambda;
        }
    }
}

const LineBroadening::PairTable& LineBroadening::pair(std::size_t a, std::size_t b) const
{
    if (a > b) std::swap(a, b);
    return pairs_[a * n_states_ - a * (a + 1) / 2 + b];
}

cplx LineBroadening::g(std::size_t a, std::size_t b, double t) const
{
    const PairTable& p = pair(a, b);
    simd::PhaseSum s[2];
    p.table.evaluate(t, s);
    return {p.re_const + s[0].cos_sum, s[0].sin_sum - t * p.lambda};
}

cplx LineBroadening::g_dot(std::size_t a, std::size_t b, double t) const
{
    const PairTable& p = pair(a, b);
    simd::PhaseSum s[2];
    p.table.evaluate(t, s);
    return {s[1].sin_sum, s[1].cos_sum - p.lambda};
}

cplx line_broadening(const BathSpec& bath, std::size_t n_states, std::size_t a, std::size_t b, double t,
                     const ThermalSpec& th)
{
    return LineBroadening(harmonic_modes(bath, n_states), n_states, th).g(a, b, t);
}

cplx line_broadening(const SpectralDensityTable& table, double t, const ThermalSpec& th,
                     const ContinuousQuadrature& q)
{
    validate_table(table);
    if (t == 0.0) return 0.0;
    auto integrand = [&](double w) -> cplx {
        const double j = table(w);
        const double wt = w * t;
        const double inv_w2 = 1.0 / (w * w);
        return j * inv_w2 * cplx(th.coth_half(w) * one_minus_cos(wt), std::sin(wt) - wt);
    };
    cplx total = 0.0;
    for (std::size_t k = 0; k + 1 < table.omega.size(); ++k) {
        const auto r = integrate_interval(integrand, table.omega[k], table.omega[k + 1], q.rel_tol, q.abs_tol,
                                          q.max_intervals);
        if (!r.converged) throw NonConvergenceError("line-broadening quadrature over omega did not converge");
        total += r.value;
    }
    return total;
}

// ---- optical profiles ------------------------------------------------------

SpectralProfiles spectral_profiles(const Model& model, std::size_t a, double t)
{
    if (!std::holds_alternative<LocalHarmonicBath>(model.bath))
        throw UnsupportedBathError("spectral profiles need a local harmonic bath");
    const std::size_t n = model.n_states();
    const LineBroadening lb(harmonic_modes(model.bath, n), n, model.thermal);
    const cplx g = lb.g(a, a, t);
    const double lam = lb.reorganization(a, a);
    const double e = model.subsystem.energies[a];
    return {std::exp(-I * (t * (e - lam)) - std::conj(g)), std::exp(-I * (t * (e + lam)) - g)};
}

// ---- spin bath profiles ----------------------------------------------------

SpinBathProfile::SpinBathProfile(const SpinBath& bath, const ThermalSpec& th)
{
    for (const auto& m : bath.modes) {
        const double w = m.omega;
        const double g2 = m.gamma * m.gamma;
        omega_.push_back(w);
        weight_.push_back(g2);
        if (w == 0.0) {
            if (th.zero_temperature && g2 != 0.0)
                throw ModelError("zero-frequency spin mode has no finite reorganization energy at T = 0");
            if (g2 != 0.0) zero_frequency_ = true;
            lambda_.push_back(g2 * 0.5 * th.beta);
            zero_weight_ += g2;
        } else {
            const double tanh = th.tanh_half(w);
            lambda_.push_back(g2 * tanh / w);
            if (g2 != 0.0) table_.add(w, -g2 / (w * w), g2 * tanh / (w * w));
            re_const_ += g2 / (w * w);
            lin_ += g2 * tanh / w;
        }
        total_lambda_ += lambda_.back();
    }
}

cplx SpinBathProfile::g(double t) const
{
    const simd::PhaseSum s = table_.size() ? table_.evaluate(t) : simd::PhaseSum{};
    return {re_const_ + s.cos_sum + 0.5 * zero_weight_ * t * t, s.sin_sum - t * lin_};
}

SpinBathProfile spin_bath_profiles(const SpinBath& bath, const ThermalSpec& th)
{
    return SpinBathProfile(bath, th);
}

}  // namespace mqmed
