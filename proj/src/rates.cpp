#include "mqmed/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>

#include "internal/parallel.hpp"
#include "mqmed/errors.hpp"

namespace mqmed {

namespace {

constexpr cplx I{0.0, 1.0};

QuadratureSettings with_panel(const QuadratureSettings& s, const Model& model)
{
    QuadratureSettings out = s;
    if (!(out.panel_width > 0.0)) out.panel_width = characteristic_time(model);
    return out;
}

RateValue to_rate(const QuadratureResult& r, double prefactor)
{
    RateValue v;
    v.value = prefactor * r.value.real();
    v.error = std::abs(prefactor) * r.error;
    v.t_end = r.t_end;
    v.damping_eta = r.damping_eta;
    v.used_fallback = r.used_fallback;
    return v;
}

double coupling_prefactor(const Model& model, std::size_t a, std::size_t b)
{
    const double v = model.subsystem.coupling(a, b);
    return 2.0 * v * v;
}

void check_pair(const Model& model, std::size_t a, std::size_t b)
{
    if (a >= model.n_states() || b >= model.n_states()) throw ModelError("state index out of range");
    if (a == b) throw ModelError("rate constants need two distinct states");
}

void check_mode(const Model& model, std::size_t j)
{
    if (j >= model.n_modes()) throw ModelError("mode index out of range");
}

std::string triple_tag(const Model& model, std::size_t a, std::size_t b, std::size_t j)
{
    std::ostringstream os;
    os << "(" << model.subsystem.labels[a] << " -> " << model.subsystem.labels[b];
    if (j != static_cast<std::size_t>(-1)) os << ", mode " << j;
    os << ")";
    return os.str();
}

// Shared integrand pieces of the line-broadening route for one ordered pair.
struct HarmonicPair {
    LineBroadening lb;
    double phase_freq;  // E_B - E_A + Lambda_AA - 2 Lambda_AB + Lambda_BB
    std::size_t a, b;

    HarmonicPair(const Model& model, std::size_t a_, std::size_t b_)
        : lb(harmonic_modes(model.bath, model.n_states()), model.n_states(), model.thermal), a(a_), b(b_)
    {
        const auto& e = model.subsystem.energies;
        phase_freq = e[b] - e[a] + lb.reorganization(a, a) - 2.0 * lb.reorganization(a, b) +
                     lb.reorganization(b, b);
    }

    cplx operator()(double t) const
    {
        const cplx g = -lb.g(a, a, t) + 2.0 * lb.g(a, b, t) - lb.g(b, b, t);
        return std::exp(g - I * (t * phase_freq));
    }
};

}  // namespace

double characteristic_time(const Model& model)
{
    double scale = 0.0;
    const auto& s = model.subsystem;
    for (const auto& c : s.couplings) {
        if (c.a < s.size() && c.b < s.size()) scale = std::max(scale, std::abs(s.energies[c.a] - s.energies[c.b]));
    }
    std::visit(
        [&](const auto& bath) {
            using T = std::decay_t<decltype(bath)>;
            for (const auto& m : bath.modes) {
                if constexpr (std::is_same_v<T, SpinBath>) {
                    scale = std::max(scale, m.dressed_frequency());
                } else if constexpr (std::is_same_v<T, GenericBath>) {
                    for (const auto& v : m.v) {
                        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (v + v.adjoint()),
                                                                           Eigen::EigenvaluesOnly);
                        const auto& ev = es.eigenvalues();
                        if (ev.size()) scale = std::max(scale, ev.maxCoeff() - ev.minCoeff());
                    }
                } else {
                    scale = std::max(scale, m.omega);
                }
            }
        },
        model.bath);
    if (is_harmonic(model.bath)) {
        const Reorganization r = reorganization_energies(model.bath, model.n_states());
        scale = std::max(scale, r.total.cwiseAbs().maxCoeff());
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) return 1.0;
    return 2.0 * std::numbers::pi / scale;
}

RateValue population_rate(const TraceEngine& engine, std::size_t a, std::size_t b, const QuadratureSettings& s)
{
    const Model& model = engine.model();
    check_pair(model, a, b);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return {};
    const auto r = half_line_integral([&](double t) { return engine.full_trace(a, b, t); }, with_panel(s, model));
    return to_rate(r, pre);
}

RateValue population_rate(const Model& model, std::size_t a, std::size_t b, const QuadratureSettings& s)
{
    check_pair(model, a, b);
    if (coupling_prefactor(model, a, b) == 0.0) return {};
    return population_rate(TraceEngine(model), a, b, s);
}

RateValue dissipation_rate_general(const TraceEngine& engine, std::size_t j, std::size_t a, std::size_t b,
                                   const QuadratureSettings& s)
{
    const Model& model = engine.model();
    check_pair(model, a, b);
    check_mode(model, j);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return {};
    const auto r = half_line_integral([&](double t) { return engine.full_trace_weighted(j, a, b, t); },
                                      with_panel(s, model));
    return to_rate(r, pre);
}

RateValue dissipation_rate_general(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                   const QuadratureSettings& s)
{
    check_pair(model, a, b);
    check_mode(model, j);
    if (coupling_prefactor(model, a, b) == 0.0) return {};
    return dissipation_rate_general(TraceEngine(model), j, a, b, s);
}

RateValue population_rate_harmonic(const Model& model, std::size_t a, std::size_t b, const QuadratureSettings& s)
{
    check_pair(model, a, b);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return {};
    const HarmonicPair f(model, a, b);
    return to_rate(half_line_integral(f, with_panel(s, model)), pre);
}

RateValue dissipation_rate_harmonic(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                    const QuadratureSettings& s)
{
    check_pair(model, a, b);
    check_mode(model, j);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return {};
    const HarmonicMode mode = harmonic_modes(model.bath, model.n_states())[j];
    const double dd = mode.d(a) - mode.d(b);
    const double lambda = 0.5 * mode.omega * mode.omega * dd * dd;  // lambda_AA - 2 lambda_AB + lambda_BB
    if (lambda == 0.0) return {};
    const HarmonicPair f(model, a, b);
    const double w = mode.omega;
    const double coth = model.thermal.coth_half(w);
    auto g = [&](double t) { return f(t) * cplx(std::cos(w * t), -coth * std::sin(w * t)); };
    return to_rate(half_line_integral(g, with_panel(s, model)), pre * lambda);
}

// ---- local baths -----------------------------------------------------------

namespace {

const LocalHarmonicBath& local_bath(const Model& model)
{
    const auto* lb = std::get_if<LocalHarmonicBath>(&model.bath);
    if (!lb) throw UnsupportedBathError("operation needs a local harmonic bath");
    return *lb;
}

// F_A*(t) A_B(t) for a local bath.
struct LocalProfilePair {
    LineBroadening lb;
    std::size_t a, b;
    double phase_freq;  // (E_B + Lambda_BB) - (E_A - Lambda_AA)

    LocalProfilePair(const Model& model, std::size_t a_, std::size_t b_)
        : lb(harmonic_modes(model.bath, model.n_states()), model.n_states(), model.thermal), a(a_), b(b_)
    {
        const auto& e = model.subsystem.energies;
        phase_freq = (e[b] + lb.reorganization(b, b)) - (e[a] - lb.reorganization(a, a));
    }

    cplx operator()(double t) const
    {
        return std::exp(-lb.g(a, a, t) - lb.g(b, b, t) - I * (t * phase_freq));
    }
};

RateValue potential_from(const LocalProfilePair& f, const Model& model, double omega, const QuadratureSettings& s)
{
    if (!(omega > 0.0)) throw ModelError("dissipative potential needs omega > 0");
    const double coth = model.thermal.coth_half(omega);
    auto g = [&](double t) { return f(t) * cplx(std::cos(omega * t), -coth * std::sin(omega * t)); };
    return to_rate(half_line_integral(g, with_panel(s, model)), 1.0);
}

}  // namespace

RateValue dissipative_potential(const Model& model, std::size_t a, std::size_t b, double omega,
                                const QuadratureSettings& s)
{
    local_bath(model);
    check_pair(model, a, b);
    return potential_from(LocalProfilePair(model, a, b), model, omega, s);
}

RateValue dissipation_rate_local(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                 const QuadratureSettings& s)
{
    const auto& bath = local_bath(model);
    check_pair(model, a, b);
    check_mode(model, j);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return {};
    const auto& mode = bath.modes[j];
    if (mode.owner != a && mode.owner != b) return {};
    const double lambda = 0.5 * mode.omega * mode.omega * mode.displacement * mode.displacement;
    if (lambda == 0.0) return {};
    RateValue v = dissipative_potential(model, a, b, mode.omega, s);
    v.value *= pre * lambda;
    v.error *= pre * lambda;
    return v;
}

DissipativeSpectralDensity dissipative_spectral_density(const Model& model, const SpectralDensityTable& j_aa,
                                                        std::size_t a, std::size_t b,
                                                        const std::vector<double>& omega_grid,
                                                        const QuadratureSettings& s)
{
    local_bath(model);
    check_pair(model, a, b);
    validate_table(j_aa);
    DissipativeSpectralDensity out;
    out.owner = a;
    out.other = b;
    out.omega = omega_grid;
    out.forward.assign(omega_grid.size(), 0.0);
    out.backward.assign(omega_grid.size(), 0.0);
    const double pre = coupling_prefactor(model, a, b);
    if (pre == 0.0) return out;
    const LocalProfilePair fwd(model, a, b);
    const LocalProfilePair bwd(model, b, a);
    for (std::size_t k = 0; k < omega_grid.size(); ++k) {
        const double w = omega_grid[k];
        if (!(w > 0.0)) throw ModelError("omega grid must be positive");
        const double weight = pre * j_aa(w) / w;
        if (weight == 0.0) continue;
        const RateValue f = potential_from(fwd, model, w, s);
        const RateValue r = potential_from(bwd, model, w, s);
        out.forward[k] = weight * f.value;
        out.backward[k] = weight * r.value;
        out.max_error = std::max({out.max_error, std::abs(weight) * f.error, std::abs(weight) * r.error});
    }
    return out;
}

std::vector<double> dissipation_density(const std::vector<DissipativeSpectralDensity>& tables,
                                        const Eigen::VectorXd& populations)
{
    if (tables.empty()) return {};
    const std::size_t n = tables.front().omega.size();
    const std::size_t owner = tables.front().owner;
    std::vector<double> out(n, 0.0);
    for (const auto& t : tables) {
        if (t.owner != owner || t.omega != tables.front().omega)
            throw ModelError("dissipation density tables must share owner and grid");
        if (t.owner >= static_cast<std::size_t>(populations.size()) ||
            t.other >= static_cast<std::size_t>(populations.size()))
            throw ModelError("population vector too short");
        const double pa = populations(static_cast<Eigen::Index>(t.owner));
        const double pb = populations(static_cast<Eigen::Index>(t.other));
        for (std::size_t k = 0; k < n; ++k) out[k] += t.forward[k] * pa + t.backward[k] * pb;
    }
    return out;
}

// ---- rate sets -------------------------------------------------------------

std::optional<double> RateSet::damping_eta() const
{
    double eta = K_eta.size() ? K_eta.maxCoeff() : 0.0;
    for (const auto& m : Kdiss_eta)
        if (m.size()) eta = std::max(eta, m.maxCoeff());
    if (eta > 0.0) return eta;
    return std::nullopt;
}

std::vector<std::string> default_mode_labels(const Model& model)
{
    std::vector<std::string> out;
    for (std::size_t j = 0; j < model.n_modes(); ++j) out.push_back("mode" + std::to_string(j));
    return out;
}

RateSet empty_rate_set(const Model& model)
{
    RateSet r;
    const auto n = static_cast<Eigen::Index>(model.n_states());
    r.state_labels = model.subsystem.labels;
    r.mode_labels = default_mode_labels(model);
    r.energies = Eigen::Map<const Eigen::VectorXd>(model.subsystem.energies.data(), n);
    r.K = Eigen::MatrixXd::Zero(n, n);
    r.K_error = r.K;
    r.K_eta = r.K;
    r.Kdiss.assign(model.n_modes(), r.K);
    r.Kdiss_error = r.Kdiss;
    r.Kdiss_eta = r.Kdiss;
    return r;
}

std::size_t worker_count(std::size_t requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MQMED_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

RateSet compute_rate_set(const Model& model, const QuadratureSettings& settings, const RateOptions& options)
{
    require_valid(model);
    RateSet out = empty_rate_set(model);
    const std::size_t n = model.n_states();
    const std::size_t m = model.n_modes();
    constexpr std::size_t kPopulation = static_cast<std::size_t>(-1);

    struct Task {
        std::size_t a, b, j;
    };
    std::vector<Task> tasks;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b || model.subsystem.coupling(a, b) == 0.0) continue;
            tasks.push_back({a, b, kPopulation});
            for (std::size_t j = 0; j < m; ++j) tasks.push_back({a, b, j});
        }
    }

    if (options.route != RateRoute::trace_product && !is_harmonic(model.bath))
        throw UnsupportedBathError("line-broadening and local routes need a harmonic bath");
    if (options.route == RateRoute::local) local_bath(model);

    std::unique_ptr<TraceEngine> engine;
    if (options.route == RateRoute::trace_product) engine = std::make_unique<TraceEngine>(model, options.generic_dim_cap);
    const QuadratureSettings s = with_panel(settings, model);

    std::vector<RateValue> results(tasks.size());
    internal::parallel_for(tasks.size(), worker_count(options.workers), [&](std::size_t i) {
        const Task& t = tasks[i];
        try {
            if (t.j == kPopulation) {
                results[i] = engine ? population_rate(*engine, t.a, t.b, s) : population_rate_harmonic(model, t.a, t.b, s);
            } else if (engine) {
                results[i] = dissipation_rate_general(*engine, t.j, t.a, t.b, s);
            } else if (options.route == RateRoute::local) {
                results[i] = dissipation_rate_local(model, t.j, t.a, t.b, s);
            } else {
                results[i] = dissipation_rate_harmonic(model, t.j, t.a, t.b, s);
            }
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError(triple_tag(model, t.a, t.b, t.j) + ": " + e.what());
        }
    });

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& t = tasks[i];
        const RateValue& r = results[i];
        const auto row = static_cast<Eigen::Index>(t.b);
        const auto col = static_cast<Eigen::Index>(t.a);
        const double eta = r.damping_eta.value_or(0.0);
        if (t.j == kPopulation) {
            out.K(row, col) = r.value;
            out.K_error(row, col) = r.error;
            out.K_eta(row, col) = eta;
        } else {
            out.Kdiss[t.j](row, col) = r.value;
            out.Kdiss_error[t.j](row, col) = r.error;
            out.Kdiss_eta[t.j](row, col) = eta;
        }
    }
    return out;
}

}  // namespace mqmed
