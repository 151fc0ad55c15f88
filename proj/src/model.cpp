#include "mqmed/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mqmed/errors.hpp"

namespace mqmed {

double SubsystemSpec::coupling(std::size_t a, std::size_t b) const
{
    for (const auto& c : couplings) {
        if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) return c.value;
    }
    return 0.0;
}

std::size_t SubsystemSpec::index_of(std::string_view label) const
{
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    throw ModelError("unknown state '" + std::string(label) + "'");
}

HarmonicMode LocalHarmonicMode::to_general(std::size_t n_states) const
{
    HarmonicMode m;
    m.omega = omega;
    m.displacement.assign(n_states, 0.0);
    if (owner < n_states) m.displacement[owner] = displacement;
    return m;
}

double SpinMode::dressed_frequency() const
{
    return std::hypot(omega, 2.0 * gamma);
}

double SpinMode::mixing_angle() const
{
    if (omega == 0.0) return gamma == 0.0 ? 0.0 : std::copysign(std::numbers::pi / 4.0, gamma);
    return 0.5 * std::atan(2.0 * gamma / omega);
}

std::size_t mode_count(const BathSpec& bath)
{
    return std::visit([](const auto& b) { return b.modes.size(); }, bath);
}

std::string_view bath_kind_name(const BathSpec& bath)
{
    switch (bath.index()) {
    case 0: return "ho-general";
    case 1: return "ho-local";
    case 2: return "spin";
    case 3: return "generic";
    }
    return "?";
}

bool is_harmonic(const BathSpec& bath)
{
    return std::holds_alternative<HarmonicBath>(bath) ||
           std::holds_alternative<LocalHarmonicBath>(bath);
}

std::vector<HarmonicMode> harmonic_modes(const BathSpec& bath, std::size_t n_states)
{
    if (const auto* h = std::get_if<HarmonicBath>(&bath)) {
        std::vector<HarmonicMode> out = h->modes;
        for (auto& m : out) m.displacement.resize(n_states, 0.0);
        return out;
    }
    if (const auto* l = std::get_if<LocalHarmonicBath>(&bath)) {
        std::vector<HarmonicMode> out;
        out.reserve(l->modes.size());
        for (const auto& m : l->modes) out.push_back(m.to_general(n_states));
        return out;
    }
    throw UnsupportedBathError("operation needs a harmonic bath, got " +
                               std::string(bath_kind_name(bath)));
}

double ThermalSpec::coth_half(double omega) const
{
    if (zero_temperature) return omega > 0.0 ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
    const double x = 0.5 * beta * omega;
    if (std::abs(x) < 1e-8) {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / x + x / 3.0;
    }
    return 1.0 / std::tanh(x);
}

double ThermalSpec::tanh_half(double omega) const
{
    if (zero_temperature) return omega > 0.0 ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
    const double x = 0.5 * beta * omega;
    if (std::abs(x) < 1e-8) return x - x * x * x / 3.0;
    return std::tanh(x);
}

namespace {

void check_subsystem(const SubsystemSpec& s, std::vector<std::string>& out)
{
    const std::size_t n = s.size();
    if (n < 2) out.push_back("subsystem needs at least 2 states");
    if (s.energies.size() != n) out.push_back("energy count does not match state count");
    for (double e : s.energies) {
        if (!std::isfinite(e)) out.push_back("non-finite state energy");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            if (s.labels[i] == s.labels[k]) out.push_back("duplicate state label '" + s.labels[i] + "'");
        }
    }
    for (std::size_t i = 0; i < s.couplings.size(); ++i) {
        const auto& c = s.couplings[i];
        if (c.a >= n || c.b >= n) {
            out.push_back("coupling references an undeclared state");
            continue;
        }
        if (c.a == c.b) out.push_back("coupling defined for a state with itself");
        if (!std::isfinite(c.value)) out.push_back("non-finite coupling");
        for (std::size_t k = i + 1; k < s.couplings.size(); ++k) {
            const auto& o = s.couplings[k];
            const bool same = (o.a == c.a && o.b == c.b);
            const bool swapped = (o.a == c.b && o.b == c.a);
            if (swapped && o.value != c.value) {
                std::ostringstream msg;
                msg << "asymmetric coupling between '" << s.labels[c.a] << "' and '"
                    << s.labels[c.b] << "' (" << c.value << " vs " << o.value << ")";
                out.push_back(msg.str());
            } else if (same && o.value != c.value) {
                out.push_back("conflicting duplicate coupling entries");
            }
        }
    }
}

struct BathChecker {
    std::size_t n_states;
    std::vector<std::string>& out;

    void operator()(const HarmonicBath& b) const
    {
        for (std::size_t j = 0; j < b.modes.size(); ++j) {
            const auto& m = b.modes[j];
            if (!(m.omega > 0.0) || !std::isfinite(m.omega))
                out.push_back("harmonic mode " + std::to_string(j) + " needs omega > 0");
            if (m.displacement.size() > n_states)
                out.push_back("harmonic mode " + std::to_string(j) + " has more displacements than states");
            for (double d : m.displacement) {
                if (!std::isfinite(d)) out.push_back("non-finite displacement in mode " + std::to_string(j));
            }
        }
    }
    void operator()(const LocalHarmonicBath& b) const
    {
        for (std::size_t j = 0; j < b.modes.size(); ++j) {
            const auto& m = b.modes[j];
            if (!(m.omega > 0.0) || !std::isfinite(m.omega))
                out.push_back("local mode " + std::to_string(j) + " needs omega > 0");
            if (m.owner >= n_states)
                out.push_back("local mode " + std::to_string(j) + " owned by an undeclared state");
            if (!std::isfinite(m.displacement))
                out.push_back("non-finite displacement in local mode " + std::to_string(j));
        }
    }
    void operator()(const SpinBath& b) const
    {
        if (n_states != 2) out.push_back("spin bath needs exactly two subsystem states");
        for (std::size_t j = 0; j < b.modes.size(); ++j) {
            const auto& m = b.modes[j];
            if (!(m.omega >= 0.0) || !std::isfinite(m.omega))
                out.push_back("spin mode " + std::to_string(j) + " needs omega >= 0");
            if (!std::isfinite(m.gamma)) out.push_back("non-finite gamma in spin mode " + std::to_string(j));
        }
    }
    void operator()(const GenericBath& b) const
    {
        for (std::size_t j = 0; j < b.modes.size(); ++j) {
            const auto& m = b.modes[j];
            const std::string tag = "generic mode " + std::to_string(j);
            if (m.v.size() != n_states) {
                out.push_back(tag + " does not cover every state");
                continue;
            }
            const auto dim = m.v.front().rows();
            if (dim < 2) out.push_back(tag + " needs local dimension >= 2");
            for (const auto& v : m.v) {
                if (v.rows() != dim || v.cols() != dim) {
                    out.push_back(tag + " has inconsistent matrix shapes");
                    break;
                }
                if (!v.allFinite()) out.push_back(tag + " has non-finite entries");
                const double asym = (v - v.adjoint()).cwiseAbs().maxCoeff();
                if (asym > kHermiticityTolerance) {
                    std::ostringstream msg;
                    msg << "non-Hermitian bath operator in " << tag << " (max|M-M^H| = " << asym << ")";
                    out.push_back(msg.str());
                }
            }
        }
    }
};

}  // namespace

ValidationReport validate_model(const SubsystemSpec& subsystem, const BathSpec& bath,
                                const ThermalSpec& thermal)
{
    ValidationReport r;
    check_subsystem(subsystem, r.violations);
    std::visit(BathChecker{subsystem.size(), r.violations}, bath);
    if (!thermal.zero_temperature && !(thermal.beta > 0.0 && std::isfinite(thermal.beta)))
        r.violations.push_back("beta must be positive and finite (use the zero-temperature flag)");
    return r;
}

void require_valid(const Model& m)
{
    const auto r = validate_model(m);
    if (r.ok()) return;
    std::string msg = "invalid model:";
    for (const auto& v : r.violations) msg += "\n  - " + v;
    throw ModelError(msg);
}

Reorganization reorganization_energies(const BathSpec& bath, std::size_t n_states)
{
    const auto modes = harmonic_modes(bath, n_states);
    const auto n = static_cast<Eigen::Index>(n_states);
    Reorganization r;
    r.total = Eigen::MatrixXd::Zero(n, n);
    r.per_mode.reserve(modes.size());
    for (const auto& m : modes) {
        Eigen::MatrixXd lam(n, n);
        const double w2 = m.omega * m.omega;
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) lam(a, b) = 0.5 * w2 * m.d(a) * m.d(b);
        }
        r.total += lam;
        r.per_mode.push_back(std::move(lam));
    }
    return r;
}

}  // namespace mqmed
