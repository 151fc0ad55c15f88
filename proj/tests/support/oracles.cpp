#include "oracles.hpp"

#include <cmath>

namespace testing_oracles {

namespace {

Eigen::MatrixXcd propagator(const Eigen::MatrixXcd& h, double t)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) ph(k) = std::exp(cplx(0.0, -t * es.eigenvalues()(k)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TracePair fock_ho_trace(double omega, double d_a, double d_b, double beta, double t, std::size_t thermal_levels,
                        std::size_t work_levels)
{
    const auto n = static_cast<Eigen::Index>(work_levels);
    // Basis: eigenstates of v_A, so v_A = omega (k + 1/2) and y = x - d_A = (a + a^dag)/sqrt(2 omega).
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) y(k - 1, k) = y(k, k - 1) = std::sqrt(static_cast<double>(k) / (2.0 * omega));
    Eigen::MatrixXd va = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) va(k, k) = omega * (static_cast<double>(k) + 0.5);
    const double s = d_a - d_b;
    const Eigen::MatrixXd w = omega * omega * s * y + Eigen::MatrixXd::Identity(n, n) * (0.5 * omega * omega * s * s);
    const Eigen::MatrixXd vb = va + w;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vb);
    const Eigen::MatrixXd& U = es.eigenvectors();
    TracePair out{};
    const double x = std::exp(-beta * omega);
    for (std::size_t k = 0; k < thermal_levels; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double p = (1.0 - x) * std::pow(x, static_cast<double>(k));
        // column k of exp(-i t v_B)
        Eigen::VectorXcd col = Eigen::VectorXcd::Zero(n);
        for (Eigen::Index m = 0; m < n; ++m)
            col += U.col(m).cast<cplx>() * (U(kk, m) * std::exp(cplx(0.0, -t * es.eigenvalues()(m))));
        const cplx phase = std::exp(cplx(0.0, t * va(kk, kk)));
        out.plain += p * phase * col(kk);
        out.weighted += p * phase * (w.row(kk).cast<cplx>() * col)(0);
    }
    return out;
}

TracePair spin_2x2_trace(double omega, double gamma, double beta, double t, bool plus_to_minus)
{
    // h = h_z sz + h_x sx; exp(-i t h) = cos(|h| t) - i sin(|h| t) h/|h|.
    auto expm = [](double hz, double hx, double tau) {
        const double r = std::hypot(hz, hx);
        Eigen::Matrix2cd m;
        const double c = std::cos(r * tau), s = r > 0 ? std::sin(r * tau) / r : tau;
        m << cplx(c, -s * hz), cplx(0.0, -s * hx), cplx(0.0, -s * hx), cplx(c, s * hz);
        return m;
    };
    auto op = [](double hz, double hx) {
        Eigen::Matrix2cd m;
        m << hz, hx, hx, -hz;
        return m;
    };
    const double gx_a = plus_to_minus ? -gamma : gamma;
    const double gx_b = -gx_a;
    const double hz = 0.5 * omega;
    // r_A = exp(-beta v_A)/Z: exp(-beta h) = cosh(beta r) - sinh(beta r) h/r
    const double r = std::hypot(hz, gx_a);
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Identity() * std::cosh(beta * r);
    if (r > 0) rho -= op(hz, gx_a) * (std::sinh(beta * r) / r);
    rho /= rho.trace();
    const Eigen::Matrix2cd X = expm(hz, gx_b, t) * rho * expm(hz, gx_a, -t);
    return {X.trace(), (X * (op(hz, gx_b) - op(hz, gx_a))).trace()};
}

TracePair dense_trace(const Eigen::MatrixXcd& v_a, const Eigen::MatrixXcd& v_b, double beta, double t)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v_a);
    const double e0 = es.eigenvalues().minCoeff();
    Eigen::VectorXd p = (-(beta) * (es.eigenvalues().array() - e0)).exp();
    p /= p.sum();
    const Eigen::MatrixXcd rho = es.eigenvectors() * p.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::MatrixXcd X = propagator(v_b, t) * rho * propagator(v_a, -t);
    return {X.trace(), (X * (v_b - v_a)).trace()};
}

VibronicRates vibronic_rates(double omega, double S, double dE, double V, double beta, double eta, int max_level)
{
    const double x = std::exp(-beta * omega);
    VibronicRates out{0.0, 0.0};
    for (int m = 0; m < max_level; ++m) {
        const double p = (1.0 - x) * std::pow(x, m);
        if (p < 1e-18) break;
        for (int n = 0; n < max_level; ++n) {
            const int lo = std::min(m, n), hi = std::max(m, n);
            const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(hi - lo), S);
            const double log_pref = -S + (hi - lo) * std::log(S) + std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0);
            const double fc = std::exp(log_pref) * lag * lag;
            const double D = dE + omega * (n - m);
            const double lor = eta / (eta * eta + D * D);
            out.K += p * fc * lor;
            out.Kdiss += p * fc * omega * (n - m) * lor;
        }
    }
    out.K *= 2.0 * V * V;
    out.Kdiss *= 2.0 * V * V;
    return out;
}

cplx trapezoid(const std::function<cplx(double)>& f, double T, std::size_t n)
{
    const double h = T / static_cast<double>(n);
    cplx s = 0.5 * (f(0.0) + f(T));
    for (std::size_t k = 1; k < n; ++k) s += f(h * static_cast<double>(k));
    return s * h;
}

}  // namespace testing_oracles
