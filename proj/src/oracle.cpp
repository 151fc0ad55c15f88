#include "mqmed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "mqmed/errors.hpp"
#include "mqmed/rates.hpp"

namespace mqmed {

namespace {

constexpr cplx I{0.0, 1.0};

// Normalised exp(-beta v) for a Hermitian v; the ground-space projector at zero temperature.
Eigen::MatrixXcd thermal_state(const Eigen::MatrixXcd& v, const ThermalSpec& th)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (v + v.adjoint()));
    const Eigen::VectorXd& e = es.eigenvalues();
    const double e0 = e.minCoeff();
    Eigen::VectorXd w(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (th.zero_temperature)
            w(i) = (e(i) - e0 <= 1e-12 * std::max(1.0, std::abs(e0))) ? 1.0 : 0.0;
        else
            w(i) = std::exp(-th.beta * (e(i) - e0));
    }
    w /= w.sum();
    const Eigen::MatrixXcd& u = es.eigenvectors();
    return u * w.cast<cplx>().asDiagonal() * u.adjoint();
}

Eigen::MatrixXcd spin_operator(const SpinMode& m, std::size_t state)
{
    const double sign = state == 0 ? -1.0 : 1.0;  // v_(+/-) = (omega/2) sigma_z -/+ gamma sigma_x
    Eigen::MatrixXcd v(2, 2);
    v << 0.5 * m.omega, sign * m.gamma, sign * m.gamma, -0.5 * m.omega;
    return v;
}

// Places `local` on mode j of the bath and |A><A| on the subsystem.
void embed(std::vector<Eigen::Triplet<cplx>>& out, const Eigen::MatrixXcd& local, std::size_t state,
           std::size_t j, const std::vector<std::size_t>& dims, std::size_t bath_dim)
{
    std::size_t after = 1;
    for (std::size_t k = j + 1; k < dims.size(); ++k) after *= dims[k];
    const std::size_t d = dims[j];
    const std::size_t before = bath_dim / (after * d);
    const std::size_t offset = state * bath_dim;
    for (std::size_t hi = 0; hi < before; ++hi) {
        for (std::size_t lo = 0; lo < after; ++lo) {
            const std::size_t base = offset + hi * d * after + lo;
            for (std::size_t p = 0; p < d; ++p) {
                for (std::size_t q = 0; q < d; ++q) {
                    const cplx val = local(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                    if (val != 0.0) out.emplace_back(base + p * after, base + q * after, val);
                }
            }
        }
    }
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y)
{
    Eigen::MatrixXcd out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k)
            out.block(i * y.rows(), k * y.cols(), y.rows(), y.cols()) = x(i, k) * y;
    return out;
}

}  // namespace

// ---- operators -------------------------------------------------------------

Eigen::MatrixXcd lowering_operator(std::size_t n)
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k)
        a(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = std::sqrt(static_cast<double>(k));
    return a;
}

Eigen::MatrixXcd position_operator(std::size_t n, double omega)
{
    const Eigen::MatrixXcd a = lowering_operator(n);
    return (a + a.adjoint()) / std::sqrt(2.0 * omega);
}

Eigen::MatrixXcd momentum_operator(std::size_t n, double omega)
{
    const Eigen::MatrixXcd a = lowering_operator(n);
    return I * std::sqrt(0.5 * omega) * (a.adjoint() - a);
}

Eigen::MatrixXcd truncated_oscillator(std::size_t n, double omega, double d)
{
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd v = -(omega * omega * d) * position_operator(n, omega);
    for (Eigen::Index k = 0; k < dim; ++k) v(k, k) += omega * (static_cast<double>(k) + 0.5) + 0.5 * omega * omega * d * d;
    return v;
}

double thermal_tail(const HarmonicMode& mode, std::size_t n_states, std::size_t levels, const ThermalSpec& th)
{
    double worst = 0.0;
    const auto top = static_cast<Eigen::Index>(levels - 1);
    for (std::size_t a = 0; a < n_states; ++a) {
        const Eigen::MatrixXcd r = thermal_state(truncated_oscillator(levels, mode.omega, mode.d(a)), th);
        worst = std::max(worst, r(top, top).real());
    }
    return worst;
}

std::size_t auto_harmonic_levels(const HarmonicMode& mode, std::size_t n_states, const ThermalSpec& th, double tail,
                                 std::size_t max_levels)
{
    for (std::size_t n = 4; n < max_levels; ++n)
        if (thermal_tail(mode, n_states, n, th) < tail) return n;
    return max_levels;
}

// ---- truncated system ------------------------------------------------------

TruncatedSystem build_truncated(const Model& model, const TruncationSpec& spec)
{
    require_valid(model);
    TruncatedSystem ts;
    ts.n_states = model.n_states();
    const std::size_t m = model.n_modes();
    ts.local_v.resize(m);

    if (is_harmonic(model.bath)) {
        const auto modes = harmonic_modes(model.bath, ts.n_states);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t n = spec.harmonic_levels ? spec.harmonic_levels
                                                       : auto_harmonic_levels(modes[j], ts.n_states, model.thermal,
                                                                              spec.auto_tail);
            for (std::size_t a = 0; a < ts.n_states; ++a)
                ts.local_v[j].push_back(truncated_oscillator(n, modes[j].omega, modes[j].d(a)));
            ts.fock.push_back(true);
        }
    } else if (const auto* sb = std::get_if<SpinBath>(&model.bath)) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t a = 0; a < ts.n_states; ++a) ts.local_v[j].push_back(spin_operator(sb->modes[j], a));
            ts.fock.push_back(false);
        }
    } else {
        const auto& gb = std::get<GenericBath>(model.bath);
        for (std::size_t j = 0; j < m; ++j) {
            ts.local_v[j] = gb.modes[j].v;
            ts.fock.push_back(false);
        }
    }

    ts.bath_dim = 1;
    for (std::size_t j = 0; j < m; ++j) {
        ts.local_dims.push_back(static_cast<std::size_t>(ts.local_v[j].front().rows()));
        ts.bath_dim *= ts.local_dims.back();
        if (ts.bath_dim * ts.n_states > spec.dim_cap) break;
    }
    ts.dim = ts.bath_dim * ts.n_states;
    if (ts.dim > spec.dim_cap || ts.local_dims.size() != m) {
        std::ostringstream msg;
        msg << "truncated dimension exceeds cap " << spec.dim_cap << "; reduce levels or modes";
        throw DimensionCapError(msg.str());
    }

    const auto dim = static_cast<Eigen::Index>(ts.dim);
    const auto& sub = model.subsystem;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t a = 0; a < ts.n_states; ++a)
        for (std::size_t k = 0; k < ts.bath_dim; ++k) trip.emplace_back(a * ts.bath_dim + k, a * ts.bath_dim + k, sub.energies[a]);
    for (std::size_t a = 0; a < ts.n_states; ++a) {
        for (std::size_t b = 0; b < ts.n_states; ++b) {
            const double v = a == b ? 0.0 : sub.coupling(a, b);
            if (v == 0.0) continue;
            for (std::size_t k = 0; k < ts.bath_dim; ++k) trip.emplace_back(a * ts.bath_dim + k, b * ts.bath_dim + k, v);
        }
    }
    ts.H_sub.resize(dim, dim);
    ts.H_sub.setFromTriplets(trip.begin(), trip.end());

    ts.real = true;
    for (std::size_t j = 0; j < m; ++j) {
        trip.clear();
        for (std::size_t a = 0; a < ts.n_states; ++a) {
            const auto& v = ts.local_v[j][a];
            if (v.imag().cwiseAbs().maxCoeff() != 0.0) ts.real = false;
            embed(trip, v, a, j, ts.local_dims, ts.bath_dim);
        }
        SparseMatrixC h(dim, dim);
        h.setFromTriplets(trip.begin(), trip.end());
        ts.h.push_back(std::move(h));
    }

    ts.H = Eigen::MatrixXcd(ts.H_sub);
    for (const auto& h : ts.h) ts.H += Eigen::MatrixXcd(h);
    return ts;
}

// ---- exact propagation -----------------------------------------------------

ExactPropagator::ExactPropagator(const TruncatedSystem& ts, std::size_t initial_state, const ThermalSpec& th,
                                 double tail_tolerance)
    : ts_(ts)
{
    if (initial_state >= ts.n_states) throw ModelError("initial state out of range");
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Ones(1, 1);
    for (std::size_t j = 0; j < ts.local_v.size(); ++j) {
        const Eigen::MatrixXcd rj = thermal_state(ts.local_v[j][initial_state], th);
        if (ts.fock[j]) {
            const auto top = rj.rows() - 1;
            const double tail = rj(top, top).real();
            if (tail > tail_tolerance) {
                std::ostringstream msg;
                msg << "thermal weight " << tail << " on the top Fock level of mode " << j << " exceeds "
                    << tail_tolerance << "; raise the harmonic level count";
                throw ModelError(msg.str());
            }
        }
        r = kron(r, rj);
    }

    if (ts.real) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ts.H.real());
        energies_ = es.eigenvalues();
        U_ = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ts.H);
        energies_ = es.eigenvalues();
        U_ = es.eigenvectors();
    }
    const auto d = static_cast<Eigen::Index>(ts.bath_dim);
    const auto ua = U_.middleRows(static_cast<Eigen::Index>(initial_state) * d, d);
    rho_ = ua.adjoint() * (r * ua);
}

Eigen::MatrixXcd ExactPropagator::weights(const SparseMatrixC& op) const
{
    Eigen::MatrixXcd o = U_.adjoint() * (op * U_);
    return rho_.cwiseProduct(o.transpose());
}

Eigen::MatrixXcd ExactPropagator::population_weights(std::size_t state) const
{
    const auto d = static_cast<Eigen::Index>(ts_.bath_dim);
    const auto ua = U_.middleRows(static_cast<Eigen::Index>(state) * d, d);
    Eigen::MatrixXcd o = ua.adjoint() * ua;
    return rho_.cwiseProduct(o.transpose());
}

std::vector<double> ExactPropagator::evaluate_weights(const Eigen::MatrixXcd& c, const std::vector<double>& times) const
{
    const Eigen::Index n = energies_.size();
    const auto nt = static_cast<Eigen::Index>(times.size());
    // sum_mn C_mn p_m conj(p_n) with p_m = exp(-i e_m t)
    Eigen::MatrixXcd pbar(n, nt);
    for (Eigen::Index k = 0; k < nt; ++k)
        for (Eigen::Index m = 0; m < n; ++m) {
            const double x = energies_(m) * times[static_cast<std::size_t>(k)];
            pbar(m, k) = cplx(std::cos(x), std::sin(x));
        }
    const Eigen::MatrixXcd y = c * pbar;
    std::vector<double> out(times.size());
    for (Eigen::Index k = 0; k < nt; ++k) out[static_cast<std::size_t>(k)] = (pbar.col(k).conjugate().cwiseProduct(y.col(k))).sum().real();
    return out;
}

double ExactPropagator::laplace(const Eigen::MatrixXcd& c, double eta) const
{
    double s = 0.0;
    const Eigen::Index n = energies_.size();
    for (Eigen::Index nn = 0; nn < n; ++nn)
        for (Eigen::Index m = 0; m < n; ++m) {
            if (m == nn) continue;
            const double w = energies_(m) - energies_(nn);
            s += (c(m, nn) * (-I * eta * w) / cplx(eta, w)).real();
        }
    return s;
}

ExactResult ExactPropagator::evaluate(const std::vector<double>& times) const
{
    ExactResult out;
    out.times = times;
    const auto nt = static_cast<Eigen::Index>(times.size());
    const auto ns = static_cast<Eigen::Index>(ts_.n_states);
    const auto nm = static_cast<Eigen::Index>(ts_.h.size());
    out.P.resize(nt, ns);
    out.E.resize(nt, nm);
    out.trace.assign(times.size(), 0.0);
    std::vector<double> total(times.size(), 0.0);

    std::vector<double> t0_times = times;
    t0_times.insert(t0_times.begin(), 0.0);
    for (Eigen::Index a = 0; a < ns; ++a) {
        const auto v = evaluate_weights(population_weights(static_cast<std::size_t>(a)), times);
        for (Eigen::Index k = 0; k < nt; ++k) {
            out.P(k, a) = v[static_cast<std::size_t>(k)];
            out.trace[static_cast<std::size_t>(k)] += v[static_cast<std::size_t>(k)];
        }
    }
    {
        const auto v = evaluate_weights(weights(ts_.H_sub), times);
        for (std::size_t k = 0; k < times.size(); ++k) total[k] += v[k];
    }
    for (Eigen::Index j = 0; j < nm; ++j) {
        const auto v = evaluate_weights(weights(ts_.h[static_cast<std::size_t>(j)]), t0_times);
        for (Eigen::Index k = 0; k < nt; ++k) {
            const double val = v[static_cast<std::size_t>(k) + 1];
            out.E(k, j) = val - v[0];
            total[static_cast<std::size_t>(k)] += val;
        }
    }
    out.total_energy = total;
    return out;
}

std::vector<double> ExactPropagator::laplace_slopes(double eta) const
{
    if (!(eta > 0.0)) throw ModelError("Laplace window needs eta > 0");
    std::vector<double> out;
    for (const auto& h : ts_.h) out.push_back(laplace(weights(h), eta));
    for (std::size_t a = 0; a < ts_.n_states; ++a) out.push_back(laplace(population_weights(a), eta));
    return out;
}

ExactResult exact_propagation(const TruncatedSystem& ts, std::size_t initial_state, const ThermalSpec& th,
                              const std::vector<double>& times)
{
    return ExactPropagator(ts, initial_state, th).evaluate(times);
}

namespace {

Eigen::MatrixXcd evolved_thermal(const TruncatedSystem& ts, std::size_t j, std::size_t a, std::size_t b, double t,
                                 const ThermalSpec& th)
{
    if (j >= ts.local_v.size() || a >= ts.n_states || b >= ts.n_states) throw ModelError("index out of range");
    const Eigen::MatrixXcd& va = ts.local_v[j][a];
    const Eigen::MatrixXcd& vb = ts.local_v[j][b];
    const Eigen::MatrixXcd ub = (-I * t * vb).exp();
    const Eigen::MatrixXcd ua = (I * t * va).exp();
    return ub * thermal_state(va, th) * ua;
}

}  // namespace

cplx oracle_mode_trace(const TruncatedSystem& ts, std::size_t j, std::size_t a, std::size_t b, double t,
                       const ThermalSpec& th)
{
    return evolved_thermal(ts, j, a, b, t, th).trace();
}

cplx oracle_mode_weighted_trace(const TruncatedSystem& ts, std::size_t j, std::size_t a, std::size_t b, double t,
                                const ThermalSpec& th)
{
    const Eigen::MatrixXcd x = evolved_thermal(ts, j, a, b, t, th);
    return (x * (ts.local_v[j][b] - ts.local_v[j][a])).trace();
}

// ---- comparison ------------------------------------------------------------

RegimeDiagnostics regime_diagnostics(const Model& model)
{
    RegimeDiagnostics r;
    const auto& s = model.subsystem;
    for (const auto& c : s.couplings) {
        if (c.value == 0.0) continue;
        const double de = std::abs(s.energies[c.a] - s.energies[c.b]);
        r.coupling_ratio = std::max(r.coupling_ratio, de > 0.0 ? std::abs(c.value) / de : std::numeric_limits<double>::infinity());
    }
    std::vector<double> freqs;
    if (is_harmonic(model.bath)) {
        for (const auto& m : harmonic_modes(model.bath, model.n_states())) {
            freqs.push_back(m.omega);
            for (std::size_t a = 0; a < model.n_states(); ++a)
                for (std::size_t b = a + 1; b < model.n_states(); ++b) {
                    const double dd = m.d(a) - m.d(b);
                    r.reorganization_ratio = std::max(r.reorganization_ratio, 0.5 * m.omega * dd * dd);
                }
        }
    } else if (const auto* sb = std::get_if<SpinBath>(&model.bath)) {
        for (const auto& m : sb->modes) {
            freqs.push_back(m.omega);
            if (m.gamma != 0.0)
                r.reorganization_ratio = std::max(
                    r.reorganization_ratio,
                    m.omega > 0.0 ? std::abs(m.gamma) / m.omega : std::numeric_limits<double>::infinity());
        }
    }
    if (!freqs.empty()) {
        const double beta = model.thermal.zero_temperature ? std::numeric_limits<double>::infinity() : model.thermal.beta;
        r.min_beta_omega = beta * *std::min_element(freqs.begin(), freqs.end());
        r.max_beta_omega = beta * *std::max_element(freqs.begin(), freqs.end());
    }
    return r;
}

ComparisonReport compare_report(const ExactResult& exact, const Trajectory& mq, const Model& model,
                                const ComparisonTolerances& tol)
{
    ComparisonReport rep;
    const RegimeDiagnostics diag = regime_diagnostics(model);
    rep.coupling_ratio = diag.coupling_ratio;
    rep.reorganization_ratio = diag.reorganization_ratio;
    rep.min_beta_omega = diag.min_beta_omega;
    rep.max_beta_omega = diag.max_beta_omega;
    if (diag.coupling_ratio > tol.max_coupling_ratio) {
        std::ostringstream os;
        os << "coupling ratio V/dE = " << diag.coupling_ratio << " exceeds " << tol.max_coupling_ratio
           << ": outside the perturbative regime";
        rep.regime_flags.push_back(os.str());
    }
    if (diag.reorganization_ratio > tol.max_reorganization_ratio) {
        std::ostringstream os;
        os << "bath coupling ratio " << diag.reorganization_ratio << " exceeds " << tol.max_reorganization_ratio
           << ": outside the weak system-bath coupling regime";
        rep.regime_flags.push_back(os.str());
    }

    bool grids_match = exact.times.size() == mq.times.size() && exact.P.cols() == mq.P.cols() &&
                       exact.E.cols() == mq.E.cols();
    for (std::size_t k = 0; grids_match && k < exact.times.size(); ++k)
        grids_match = std::abs(exact.times[k] - mq.times[k]) <= 1e-12 * std::max(1.0, std::abs(exact.times[k]));
    if (!grids_match) {
        rep.regime_flags.push_back("time grids or column sets differ; no deviations computed");
        rep.pass = false;
        return rep;
    }

    for (Eigen::Index a = 0; a < exact.P.cols(); ++a) {
        QuantityDeviation q;
        q.name = "P_" + model.subsystem.labels[static_cast<std::size_t>(a)];
        q.max_abs = (exact.P.col(a) - mq.P.col(a)).cwiseAbs().maxCoeff();
        q.max_rel = q.max_abs;
        q.pass = q.max_abs <= tol.population_abs;
        rep.quantities.push_back(q);
    }
    for (Eigen::Index j = 0; j < exact.E.cols(); ++j) {
        QuantityDeviation q;
        q.name = "E_" + (static_cast<std::size_t>(j) < mq.mode_labels.size() ? mq.mode_labels[static_cast<std::size_t>(j)]
                                                                              : std::to_string(j));
        q.max_abs = (exact.E.col(j) - mq.E.col(j)).cwiseAbs().maxCoeff();
        const double scale = exact.E.col(j).cwiseAbs().maxCoeff();
        q.max_rel = scale > 0.0 ? q.max_abs / scale : (q.max_abs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        q.pass = q.max_rel <= tol.energy_rel;
        rep.quantities.push_back(q);
    }

    const auto nt = static_cast<Eigen::Index>(exact.times.size());
    const auto ns = exact.P.cols();
    if (nt > 0) {
        const Eigen::Index start = std::min<Eigen::Index>(
            nt - 1, static_cast<Eigen::Index>(std::floor((1.0 - tol.late_window) * static_cast<double>(nt))));
        const Eigen::VectorXd late = exact.P.middleRows(start, nt - start).colwise().mean().transpose();
        rep.late_populations.assign(late.data(), late.data() + late.size());
        if (!model.thermal.zero_temperature) {
            const Eigen::VectorXd logz = bath_log_partition(model);
            Eigen::VectorXd w(ns);
            for (Eigen::Index a = 0; a < ns; ++a) w(a) = -model.thermal.beta * model.subsystem.energies[static_cast<std::size_t>(a)] + logz(a);
            w = (w.array() - w.maxCoeff()).exp();
            w /= w.sum();
            rep.boltzmann_populations.assign(w.data(), w.data() + w.size());
            rep.boltzmann_deviation = (late - w).cwiseAbs().maxCoeff();
            rep.boltzmann_pass = rep.boltzmann_deviation <= tol.boltzmann_abs;
        }
    }
    for (const auto& q : rep.quantities)
        if (!q.pass) rep.pass = false;
    return rep;
}

}  // namespace mqmed
