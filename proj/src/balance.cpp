#include <cmath>
#include <sstream>

#include "mqmed/errors.hpp"
#include "mqmed/rates.hpp"

namespace mqmed {

Eigen::VectorXd bath_log_partition(const Model& model)
{
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    // Displaced oscillators and the two spin operators share their spectra across states,
    // so only generic modes contribute.
    if (const auto* gb = std::get_if<GenericBath>(&model.bath)) {
        for (const auto& m : gb->modes)
            for (Eigen::Index a = 0; a < n; ++a) out(a) += log_partition_function(m.v[static_cast<std::size_t>(a)], model.thermal);
    }
    return out;
}

bool BalanceReport::ok() const
{
    for (const auto& p : populations)
        if (!p.ok) return false;
    for (const auto& d : dissipation)
        if (!d.ok) return false;
    for (const auto& s : sum_rules)
        if (!s.ok) return false;
    return true;
}

std::vector<std::string> BalanceReport::violations(const std::vector<std::string>& states,
                                                   const std::vector<std::string>& modes) const
{
    std::vector<std::string> out;
    for (const auto& p : populations) {
        if (p.ok) continue;
        std::ostringstream os;
        os << "population detailed balance violated for " << states[p.a] << " <-> " << states[p.b]
           << ": K_AB/K_BA = " << p.ratio << ", expected " << p.expected << " (rel dev " << p.rel_dev << ")";
        out.push_back(os.str());
    }
    for (const auto& d : dissipation) {
        if (d.ok) continue;
        std::ostringstream os;
        os << "dissipation detailed balance violated for " << modes[d.j] << ", " << states[d.a] << " <-> "
           << states[d.b] << ": ratio " << d.ratio << ", expected " << d.expected << " (rel dev " << d.rel_dev
           << ")";
        out.push_back(os.str());
    }
    for (const auto& s : sum_rules) {
        if (s.ok) continue;
        std::ostringstream os;
        os << "energy sum rule violated for " << states[s.a] << " -> " << states[s.b] << ": sum " << s.sum
           << ", expected " << s.expected << " (|dev| " << s.abs_dev << " > " << s.bound << ")";
        out.push_back(os.str());
    }
    return out;
}

BalanceReport verify_balance(const RateSet& rates, const Model& model, const BalanceTolerances& tol)
{
    const std::size_t n = rates.n_states();
    if (n != model.n_states() || rates.n_modes() != model.n_modes())
        throw ModelError("rate set does not match the model");
    BalanceReport rep;
    const bool finite_t = !model.thermal.zero_temperature;
    const Eigen::VectorXd logz = finite_t ? bath_log_partition(model) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const auto& e = model.subsystem.energies;
    const double beta = model.thermal.beta;

    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto ia = static_cast<Eigen::Index>(a);
            const auto ib = static_cast<Eigen::Index>(b);
            const double k_ba = rates.K(ib, ia);  // a -> b
            const double k_ab = rates.K(ia, ib);  // b -> a

            if (a < b) {
                PairBalance p;
                p.a = a;
                p.b = b;
                if (finite_t && k_ba > tol.abs_tol && k_ab > tol.abs_tol) {
                    p.checked = true;
                    p.ratio = k_ab / k_ba;
                    p.expected = std::exp(-beta * e[a] + logz(ia) + beta * e[b] - logz(ib));
                    p.rel_dev = std::abs(p.ratio - p.expected) / p.expected;
                    p.ok = p.rel_dev <= tol.ratio_rel;
                }
                rep.populations.push_back(p);

                for (std::size_t j = 0; j < rates.n_modes(); ++j) {
                    DissipationBalance d;
                    d.j = j;
                    d.a = a;
                    d.b = b;
                    const double kd_ba = rates.Kdiss[j](ib, ia);
                    const double kd_ab = rates.Kdiss[j](ia, ib);
                    if (k_ba > tol.abs_tol && std::abs(kd_ba) > tol.abs_tol) {
                        d.checked = true;
                        d.ratio = kd_ab / kd_ba;
                        d.expected = -k_ab / k_ba;
                        d.rel_dev = std::abs(d.ratio - d.expected) / std::max(std::abs(d.expected), tol.abs_tol);
                        d.ok = d.rel_dev <= tol.ratio_rel;
                    }
                    rep.dissipation.push_back(d);
                }
            }

            SumRule s;
            s.a = a;
            s.b = b;
            double scale = 0.0;
            for (std::size_t j = 0; j < rates.n_modes(); ++j) {
                const double kd = rates.Kdiss[j](ib, ia);
                s.sum += kd;
                scale += std::abs(kd);
            }
            s.expected = (e[a] - e[b]) * k_ba;
            s.abs_dev = std::abs(s.sum - s.expected);
            scale = std::max(scale, std::abs(s.expected));
            s.bound = std::max(tol.sum_rel * scale, 10.0 * tol.abs_tol);
            s.ok = s.abs_dev <= s.bound;
            rep.sum_rules.push_back(s);
        }
    }
    return rep;
}

}  // namespace mqmed
