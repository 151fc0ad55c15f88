#include "mqmed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <boost/numeric/odeint.hpp>

#include "mqmed/errors.hpp"

namespace mqmed {

namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// exp(z) - 1 without cancellation for small |z|.
cplx expm1c(cplx z)
{
    const double s = std::sin(0.5 * z.imag());
    const double em1 = std::expm1(z.real());
    return {em1 * std::cos(z.imag()) - 2.0 * s * s, std::exp(z.real()) * std::sin(z.imag())};
}

// (exp(lambda t) - 1) / lambda, with the t limit for |lambda| < 1e-12.
cplx phi(cplx lambda, double t)
{
    if (std::abs(lambda) < 1e-12) return t;
    return expm1c(lambda * t) / lambda;
}

void check_inputs(const RateSet& rates, const Eigen::VectorXd& p0, const std::vector<double>& times)
{
    const auto n = static_cast<Eigen::Index>(rates.n_states());
    if (p0.size() != n) throw ModelError("initial population vector has the wrong length");
    if ((p0.array() < -1e-14).any()) throw ModelError("initial populations must be nonnegative");
    if (std::abs(p0.sum() - 1.0) > 1e-12) throw ModelError("initial populations must sum to 1");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) throw ModelError("times must be finite and nonnegative");
        if (i > 0 && !(times[i] > times[i - 1])) throw ModelError("times must be strictly ascending");
    }
    const double scale = std::max(rates.K.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            if (a != b && rates.K(b, a) < -1e-12 * scale) {
                std::ostringstream msg;
                msg << "negative population rate " << rates.K(b, a) << " for " << rates.state_labels[a]
                    << " -> " << rates.state_labels[b];
                throw ModelError(msg.str());
            }
}

Trajectory make_trajectory(const RateSet& rates, const std::vector<double>& times)
{
    Trajectory tr;
    tr.state_labels = rates.state_labels;
    tr.mode_labels = rates.mode_labels;
    tr.times = times;
    tr.P.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(rates.n_states()));
    tr.E.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(rates.n_modes()));
    return tr;
}

bool propagate_eigen(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::VectorXd& p0,
                     double max_condition, Trajectory& tr)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) return false;
    const CVec lambda = es.eigenvalues();
    const CMat R = es.eigenvectors();
    const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k).real() > 1e-10 * scale) {
            std::ostringstream msg;
            msg << "rate matrix has a growing eigenvalue " << lambda(k).real();
            throw ModelError(msg.str());
        }
    }
    Eigen::JacobiSVD<CMat> svd(R);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < max_condition)) return false;
    const CVec c = R.fullPivLu().solve(p0.cast<cplx>());
    const CMat WR = W.cast<cplx>() * R;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        CVec ev(lambda.size()), iv(lambda.size());
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            ev(k) = std::exp(lambda(k) * t) * c(k);
            iv(k) = phi(lambda(k), t) * c(k);
        }
        const auto row = static_cast<Eigen::Index>(i);
        tr.P.row(row) = (R * ev).real().transpose();
        if (W.rows() > 0) tr.E.row(row) = (WR * iv).real().transpose();
    }
    return true;
}

void propagate_numeric(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::VectorXd& p0,
                       const PropagationOptions& opt, Trajectory& tr)
{
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const auto n = M.rows();
    const auto m = W.rows();
    auto rhs = [&](const State& x, State& dx, double) {
        const Eigen::Map<const Eigen::VectorXd> p(x.data(), n);
        Eigen::Map<Eigen::VectorXd> dp(dx.data(), n);
        Eigen::Map<Eigen::VectorXd> de(dx.data() + n, m);
        dp.noalias() = M * p;
        if (m > 0) de.noalias() = W * p;
    };
    State x(static_cast<std::size_t>(n + m), 0.0);
    for (Eigen::Index a = 0; a < n; ++a) x[static_cast<std::size_t>(a)] = p0(a);

    std::vector<double> grid = tr.times;
    const bool prepend = grid.empty() || grid.front() > 0.0;
    if (prepend) grid.insert(grid.begin(), 0.0);
    std::size_t idx = 0;
    auto observe = [&](const State& s, double) {
        if (prepend && idx == 0) {
            ++idx;
            return;
        }
        const auto row = static_cast<Eigen::Index>(idx - (prepend ? 1 : 0));
        for (Eigen::Index a = 0; a < n; ++a) tr.P(row, a) = s[static_cast<std::size_t>(a)];
        for (Eigen::Index j = 0; j < m; ++j) tr.E(row, j) = s[static_cast<std::size_t>(n + j)];
        ++idx;
    };
    if (grid.size() == 1) {
        observe(x, 0.0);
        return;
    }
    const double rate = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
    const double dt0 = std::min(0.01 / rate, grid[1] - grid[0]);
    auto stepper = odeint::make_controlled(opt.ode_abs_tol, opt.ode_rel_tol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, x, grid.begin(), grid.end(), dt0, observe);
}

}  // namespace

Eigen::MatrixXd rate_matrix(const RateSet& rates)
{
    Eigen::MatrixXd M = rates.K;
    M.diagonal().setZero();
    for (Eigen::Index a = 0; a < M.cols(); ++a) {
        double out = 0.0;
        for (Eigen::Index b = 0; b < M.rows(); ++b)
            if (b != a) out += M(b, a);
        M(a, a) = -out;
    }
    return M;
}

Eigen::MatrixXd dissipation_weights(const RateSet& rates)
{
    const auto n = static_cast<Eigen::Index>(rates.n_states());
    const auto m = static_cast<Eigen::Index>(rates.n_modes());
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::MatrixXd& kd = rates.Kdiss[static_cast<std::size_t>(j)];
        for (Eigen::Index a = 0; a < n; ++a) {
            double s = 0.0;
            for (Eigen::Index b = 0; b < n; ++b)
                if (b != a) s += kd(b, a);
            W(j, a) = s;
        }
    }
    return W;
}

Trajectory propagate(const RateSet& rates, const Eigen::VectorXd& p0, const std::vector<double>& times,
                     const PropagationOptions& options)
{
    check_inputs(rates, p0, times);
    const Eigen::MatrixXd M = rate_matrix(rates);
    const Eigen::MatrixXd W = dissipation_weights(rates);
    Trajectory tr = make_trajectory(rates, times);
    bool done = false;
    if (options.method != PropagationMethod::numeric) {
        done = propagate_eigen(M, W, p0, options.max_condition, tr);
        if (!done && options.method == PropagationMethod::eigen)
            throw ModelError("rate matrix eigenbasis is too ill-conditioned for closed-form propagation");
    }
    if (!done) {
        propagate_numeric(M, W, p0, options, tr);
        tr.used_numeric = true;
    }
    energy_ledger(tr, rates.energies);
    return tr;
}

double energy_ledger(Trajectory& tr, const Eigen::VectorXd& energies)
{
    const auto nt = static_cast<Eigen::Index>(tr.times.size());
    tr.E_sub.assign(tr.times.size(), 0.0);
    tr.residual.assign(tr.times.size(), 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < nt; ++i) {
        const auto k = static_cast<std::size_t>(i);
        tr.E_sub[k] = tr.P.row(i).dot(energies);
        double delta = 0.0;
        for (Eigen::Index a = 0; a < tr.P.cols(); ++a) delta += energies(a) * (tr.P(i, a) - tr.P(0, a));
        const double r = delta + (tr.E.cols() ? tr.E.row(i).sum() : 0.0);
        tr.residual[k] = r;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

std::vector<std::vector<std::size_t>> rate_graph_components(const RateSet& rates)
{
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
    const std::size_t n = rates.n_states();
    Graph g(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && rates.K(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) > 0.0)
                boost::add_edge(a, b, g);
    std::vector<int> comp(n);
    const int count = boost::strong_components(g, comp.data());
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(count));
    for (std::size_t v = 0; v < n; ++v) out[static_cast<std::size_t>(comp[v])].push_back(v);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return out;
}

Eigen::VectorXd steady_state(const RateSet& rates)
{
    const std::size_t n = rates.n_states();
    const auto comps = rate_graph_components(rates);
    std::vector<std::size_t> owner(n);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (std::size_t v : comps[c]) owner[v] = c;
    std::vector<bool> closed(comps.size(), true);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && owner[a] != owner[b] &&
                rates.K(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) > 0.0)
                closed[owner[a]] = false;
    std::vector<std::size_t> closed_ids;
    for (std::size_t c = 0; c < comps.size(); ++c)
        if (closed[c]) closed_ids.push_back(c);
    if (closed_ids.size() != 1) {
        std::ostringstream msg;
        msg << "rate graph has " << closed_ids.size() << " closed classes, steady state is not unique:";
        for (std::size_t c : closed_ids) {
            msg << " {";
            for (std::size_t k = 0; k < comps[c].size(); ++k)
                msg << (k ? "," : "") << rates.state_labels[comps[c][k]];
            msg << "}";
        }
        throw ReducibleRateGraphError(msg.str());
    }
    const auto& members = comps[closed_ids.front()];
    const auto k = static_cast<Eigen::Index>(members.size());
    const Eigen::MatrixXd M = rate_matrix(rates);
    Eigen::MatrixXd A(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            A(r, c) = M(static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]),
                        static_cast<Eigen::Index>(members[static_cast<std::size_t>(c)]));
    // Closed class: columns of A sum to zero, so one balance row is redundant.
    A.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1.0;
    const Eigen::VectorXd x = A.fullPivLu().solve(rhs);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < k; ++r) p(static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)])) = x(r);
    return p;
}

double slowest_rate(const RateSet& rates)
{
    const Eigen::MatrixXd M = rate_matrix(rates);
    const double scale = M.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    double best = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double v = std::abs(es.eigenvalues()(k));
        if (v > 1e-10 * scale && (best == 0.0 || v < best)) best = v;
    }
    return best;
}

}  // namespace mqmed
