// quadrature.hpp: adaptive Gauss-Kronrod integration on finite intervals and the half line

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>

namespace mqmed {

using cplx = std::complex<double>;

struct QuadratureSettings {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    // Stop once |f| stays below tail_eps * (largest |f| seen) over a whole panel.
    double tail_eps{1e-10};
    double t_max_cap{1e6};
    // Artificial decay exp(-eta t). Off by default; when used it is reported with every result.
    std::optional<double> damping_eta;
    // If set and the undamped integral hits the cap, retry once with this eta.
    std::optional<double> fallback_eta;
    // Width of the first panel; panels grow geometrically by panel_growth. Zero lets the
    // caller pick a model time scale (1.0 for a bare half_line_integral).
    double panel_width{0.0};
    double panel_growth{1.25};
    std::size_t max_subdivisions{20000};
};

struct QuadratureResult {
    cplx value{0.0, 0.0};
    double error{0.0};
    double t_end{0.0};
    std::optional<double> damping_eta;
    bool used_fallback{false};
    std::size_t evaluations{0};
    std::size_t panels{0};
};

struct IntervalResult {
    cplx value{0.0, 0.0};
    double error{0.0};
    double max_abs{0.0};  // largest |f| over every node evaluated
    std::size_t evaluations{0};
    bool converged{true};
};

using ComplexFunction = std::function<cplx(double)>;

// Globally adaptive 21-point Gauss-Kronrod on [a, b]. The target error is
// max(abs_tol, rel_tol * |estimate|).
IntervalResult integrate_interval(const ComplexFunction& f, double a, double b, double rel_tol,
                                  double abs_tol, std::size_t max_subdivisions = 20000);

// Integral of f over [0, inf). Throws NonConvergenceError when the envelope has not
// decayed by t_max_cap and no fallback damping is configured.
QuadratureResult half_line_integral(const ComplexFunction& f, const QuadratureSettings& settings);

}  // namespace mqmed
