#include "mqmed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "mqmed/errors.hpp"

namespace mqmed {

namespace {

// QUADPACK qk21 abscissae and weights. Odd indices are the embedded 10-point Gauss nodes.
// Samples: fv[2i], fv[2i+1] at center -/+ half*kXgk[i]; fv[20] at the center.
constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478358, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

struct Gk21 {
    cplx value;
    double error;
    double max_abs;
};

Gk21 gk21(const ComplexFunction& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    cplx fv[21];
    double max_abs = 0.0;
    fv[20] = f(center);
    for (int i = 0; i < 10; ++i) {
        const double dx = half * kXgk[i];
        fv[2 * i] = f(center - dx);
        fv[2 * i + 1] = f(center + dx);
    }
    cplx kron = kWgk[10] * fv[20];
    cplx gauss = 0.0;
    for (int i = 0; i < 10; ++i) {
        const cplx pair = fv[2 * i] + fv[2 * i + 1];
        kron += kWgk[i] * pair;
        if (i % 2 == 1) gauss += kWg[i / 2] * pair;
    }
    for (const auto& v : fv) max_abs = std::max(max_abs, std::abs(v));

    // QUADPACK error heuristic on the complex deviation.
    const cplx mean = 0.5 * kron;
    double resasc = kWgk[10] * std::abs(fv[20] - mean);
    for (int i = 0; i < 10; ++i)
        resasc += kWgk[i] * (std::abs(fv[2 * i] - mean) + std::abs(fv[2 * i + 1] - mean));
    resasc *= std::abs(half);
    double err = std::abs((kron - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    double resabs = kWgk[10] * std::abs(fv[20]);
    for (int i = 0; i < 10; ++i) resabs += kWgk[i] * (std::abs(fv[2 * i]) + std::abs(fv[2 * i + 1]));
    resabs *= std::abs(half);
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {kron * half, err, max_abs};
}

bool all_finite(cplx z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Adaptive refinement on [a, b]; target(estimate) gives the allowed absolute error.
template <class Target>
IntervalResult adapt(const ComplexFunction& f, double a, double b, Target&& target, std::size_t max_sub)
{
    IntervalResult out;
    const Gk21 first = gk21(f, a, b);
    out.evaluations = 21;
    out.max_abs = first.max_abs;
    std::priority_queue<Segment> heap;
    heap.push({a, b, first.value, first.error});
    cplx total = first.value;
    double total_err = first.error;
    std::size_t n = 1;
    while (total_err > target(total)) {
        if (n >= max_sub) {
            out.converged = false;
            break;
        }
        const Segment s = heap.top();
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) {
            out.converged = false;
            break;
        }
        heap.pop();
        const Gk21 l = gk21(f, s.a, mid);
        const Gk21 r = gk21(f, mid, s.b);
        out.evaluations += 42;
        out.max_abs = std::max({out.max_abs, l.max_abs, r.max_abs});
        total += l.value + r.value - s.value;
        total_err += l.error + r.error - s.error;
        heap.push({s.a, mid, l.value, l.error});
        heap.push({mid, s.b, r.value, r.error});
        ++n;
    }
    // Re-sum from the leaves so the result does not depend on update order.
    total = 0.0;
    total_err = 0.0;
    std::vector<Segment> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    std::sort(leaves.begin(), leaves.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    for (const auto& s : leaves) {
        total += s.value;
        total_err += s.error;
    }
    out.value = total;
    out.error = total_err;
    if (!all_finite(total)) out.converged = false;
    return out;
}

QuadratureResult integrate_panels(const ComplexFunction& f, const QuadratureSettings& s,
                                  std::optional<double> eta)
{
    ComplexFunction g = f;
    if (eta) {
        const double e = *eta;
        g = [&f, e](double t) { return f(t) * std::exp(-e * t); };
    }
    QuadratureResult out;
    out.damping_eta = eta;
    double a = 0.0;
    double width = s.panel_width > 0.0 ? s.panel_width : 1.0;
    double peak = 0.0;
    cplx total = 0.0;
    double total_err = 0.0;
    while (true) {
        const double b = std::min(a + width, s.t_max_cap);
        const cplx before = total;
        auto target = [&](cplx panel) { return std::max(s.abs_tol, s.rel_tol * std::abs(before + panel)); };
        const IntervalResult p = adapt(g, a, b, target, s.max_subdivisions);
        out.evaluations += p.evaluations;
        ++out.panels;
        if (!p.converged) {
            std::ostringstream msg;
            msg << "adaptive quadrature did not converge on panel [" << a << ", " << b << "]";
            throw NonConvergenceError(msg.str());
        }
        total += p.value;
        total_err += p.error;
        peak = std::max(peak, p.max_abs);
        if (a > 0.0 && p.max_abs <= s.tail_eps * peak) {
            out.t_end = b;
            break;
        }
        if (peak == 0.0 && a > 0.0) {
            out.t_end = b;
            break;
        }
        if (b >= s.t_max_cap) {
            std::ostringstream msg;
            msg << "integrand envelope did not decay below " << s.tail_eps << " before t = " << s.t_max_cap;
            throw NonConvergenceError(msg.str());
        }
        a = b;
        width *= s.panel_growth;
    }
    out.value = total;
    out.error = total_err;
    return out;
}

}  // namespace

IntervalResult integrate_interval(const ComplexFunction& f, double a, double b, double rel_tol,
                                  double abs_tol, std::size_t max_subdivisions)
{
    if (a == b) return {};
    auto target = [&](cplx est) { return std::max(abs_tol, rel_tol * std::abs(est)); };
    return adapt(f, a, b, target, max_subdivisions);
}

QuadratureResult half_line_integral(const ComplexFunction& f, const QuadratureSettings& s)
{
    if (!(s.rel_tol > 0.0 && s.abs_tol > 0.0 && s.tail_eps > 0.0 && s.t_max_cap > 0.0))
        throw ModelError("quadrature tolerances and cap must be positive");
    if (s.damping_eta && !(*s.damping_eta > 0.0)) throw ModelError("damping eta must be positive");
    if (s.damping_eta) return integrate_panels(f, s, s.damping_eta);
    try {
        return integrate_panels(f, s, std::nullopt);
    } catch (const NonConvergenceError&) {
        if (!s.fallback_eta) throw;
    }
    QuadratureResult r = integrate_panels(f, s, s.fallback_eta);
    r.used_fallback = true;
    return r;
}

}  // namespace mqmed
