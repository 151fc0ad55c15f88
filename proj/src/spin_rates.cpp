#include <cmath>
#include <sstream>

#include "internal/parallel.hpp"
#include "mqmed/errors.hpp"
#include "mqmed/rates.hpp"

namespace mqmed {

namespace {

constexpr cplx I{0.0, 1.0};

const SpinBath& spin_bath(const Model& model)
{
    const auto* sb = std::get_if<SpinBath>(&model.bath);
    if (!sb) throw UnsupportedBathError("operation needs a spin bath");
    if (model.n_states() != 2) throw ModelError("spin bath needs exactly two subsystem states");
    return *sb;
}

}  // namespace

RateSet spin_rates_exact(const Model& model, const QuadratureSettings& settings, std::size_t workers)
{
    spin_bath(model);
    RateOptions opt;
    opt.workers = workers;
    return compute_rate_set(model, settings, opt);
}

RateSet spin_rates_weak(const Model& model, const QuadratureSettings& settings, const WeakCouplingOptions& options)
{
    const SpinBath& bath = spin_bath(model);
    require_valid(model);
    if (!options.override_guard) {
        for (std::size_t j = 0; j < bath.modes.size(); ++j) {
            const auto& m = bath.modes[j];
            if (m.gamma == 0.0) continue;
            const double ratio = m.omega > 0.0 ? std::abs(m.gamma) / m.omega : INFINITY;
            if (ratio > options.max_ratio) {
                std::ostringstream msg;
                msg << "weak-coupling spin rates refused: mode " << j << " has gamma/omega = " << ratio
                    << " > " << options.max_ratio;
                throw ModelError(msg.str());
            }
        }
    }
    const SpinBathProfile profile(bath, model.thermal);
    const double lambda_total = profile.total_lambda();
    const auto& th = model.thermal;

    QuadratureSettings s = settings;
    if (!(s.panel_width > 0.0)) s.panel_width = characteristic_time(model);

    RateSet out = empty_rate_set(model);
    const double v = model.subsystem.coupling(0, 1);
    const double pre = 2.0 * v * v;
    if (pre == 0.0) return out;
    const std::size_t m = bath.modes.size();

    // Task layout: per direction, index 0 is the population rate, 1 + j the mode rates.
    const std::size_t per_dir = m + 1;
    std::vector<RateValue> results(2 * per_dir);
    internal::parallel_for(results.size(), worker_count(options.workers), [&](std::size_t i) {
        const std::size_t a = i / per_dir;
        const std::size_t b = 1 - a;
        const std::size_t k = i % per_dir;
        const double de = model.subsystem.energies[b] - model.subsystem.energies[a];
        auto base = [&](double t) {
            return std::exp(-I * (t * (de + 4.0 * lambda_total)) - 4.0 * profile.g(t));
        };
        QuadratureResult r;
        double factor = pre;
        try {
            if (k == 0) {
                r = half_line_integral(base, s);
            } else {
                const auto& mode = bath.modes[k - 1];
                const double lam = profile.lambda()[k - 1];
                if (lam == 0.0) return;
                factor = 4.0 * pre * lam;
                const double w = mode.omega;
                if (w > 0.0) {
                    const double coth = th.coth_half(w);
                    r = half_line_integral(
                        [&](double t) { return base(t) * cplx(std::cos(w * t), -coth * std::sin(w * t)); }, s);
                } else {
                    // omega -> 0 limit of coth(beta w/2) sin(w t) is 2t/beta.
                    const double slope = 2.0 / th.beta;
                    r = half_line_integral([&](double t) { return base(t) * cplx(1.0, -slope * t); }, s);
                }
            }
        } catch (const NonConvergenceError& e) {
            std::ostringstream msg;
            msg << "(" << model.subsystem.labels[a] << " -> " << model.subsystem.labels[b];
            if (k > 0) msg << ", mode " << (k - 1);
            msg << "): " << e.what();
            throw NonConvergenceError(msg.str());
        }
        RateValue& rv = results[i];
        rv.value = factor * r.value.real();
        rv.error = std::abs(factor) * r.error;
        rv.t_end = r.t_end;
        rv.damping_eta = r.damping_eta;
        rv.used_fallback = r.used_fallback;
    });

    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i / per_dir);
        const auto row = 1 - col;
        const std::size_t k = i % per_dir;
        const RateValue& r = results[i];
        const double eta = r.damping_eta.value_or(0.0);
        if (k == 0) {
            out.K(row, col) = r.value;
            out.K_error(row, col) = r.error;
            out.K_eta(row, col) = eta;
        } else {
            out.Kdiss[k - 1](row, col) = r.value;
            out.Kdiss_error[k - 1](row, col) = r.error;
            out.Kdiss_eta[k - 1](row, col) = eta;
        }
    }
    return out;
}

HarmonicBath surrogate_harmonic_bath(const SpinBath& bath, const ThermalSpec& th)
{
    HarmonicBath out;
    for (std::size_t j = 0; j < bath.modes.size(); ++j) {
        const auto& m = bath.modes[j];
        if (!(m.omega > 0.0))
            throw ModelError("surrogate harmonic bath needs omega > 0 (spin mode " + std::to_string(j) + ")");
        const double w = m.omega;
        // J_AA = w^3 d^2 / 2 = gamma^2 tanh(beta w / 2)
        const double d = std::sqrt(2.0 * m.gamma * m.gamma * th.tanh_half(w) / (w * w * w));
        out.modes.push_back(HarmonicMode{w, {d, -d}});
    }
    return out;
}

}  // namespace mqmed
