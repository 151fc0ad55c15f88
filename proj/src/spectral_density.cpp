#include "mqmed/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mqmed/errors.hpp"

namespace mqmed {

double SpectralDensityTable::operator()(double w) const
{
    if (omega.empty() || w < omega.front() || w > omega.back()) return 0.0;
    auto it = std::upper_bound(omega.begin(), omega.end(), w);
    if (it == omega.end()) return values.back();
    const auto k = static_cast<std::size_t>(it - omega.begin());
    if (k == 0) return values.front();
    const double w0 = omega[k - 1], w1 = omega[k];
    const double f = (w - w0) / (w1 - w0);
    return values[k - 1] + f * (values[k] - values[k - 1]);
}

void validate_table(const SpectralDensityTable& t)
{
    if (t.omega.size() < 2) throw ModelError("spectral density table needs at least 2 samples");
    if (t.omega.size() != t.values.size()) throw ModelError("spectral density columns differ in length");
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
        if (!(t.omega[i] > 0.0) || !std::isfinite(t.omega[i]))
            throw ModelError("spectral density grid must be positive and finite");
        if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
            throw ModelError("spectral density grid must be strictly ascending");
        if (!std::isfinite(t.values[i])) throw ModelError("spectral density values must be finite");
        if (t.a == t.b && t.values[i] < 0.0)
            throw ModelError("diagonal spectral density must be nonnegative");
    }
}

SpectralDensityTable read_spectral_density(std::istream& in, std::size_t a, std::size_t b)
{
    SpectralDensityTable t;
    t.a = a;
    t.b = b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double w = 0.0, j = 0.0;
        if (!(ls >> w)) continue;
        if (!(ls >> j)) throw ModelError("spectral density line " + std::to_string(lineno) + ": expected two columns");
        t.omega.push_back(w);
        t.values.push_back(j);
    }
    validate_table(t);
    return t;
}

SpectralDensityTable read_spectral_density_file(const std::string& path, std::size_t a, std::size_t b)
{
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open spectral density file '" + path + "'");
    return read_spectral_density(in, a, b);
}

namespace {

// Integral of J(w)/w over [w0, x] for J linear between (w0, j0) and (w1, j1).
double segment_integral(double w0, double w1, double j0, double j1, double x)
{
    const double slope = (j1 - j0) / (w1 - w0);
    const double intercept = j0 - slope * w0;
    return intercept * std::log(x / w0) + slope * (x - w0);
}

}  // namespace

double table_reorganization_energy(const SpectralDensityTable& t)
{
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < t.omega.size(); ++k)
        total += segment_integral(t.omega[k], t.omega[k + 1], t.values[k], t.values[k + 1], t.omega[k + 1]);
    return total;
}

std::vector<HarmonicMode> discretize_spectral_density(const SpectralDensityTable& t, std::size_t n_modes,
                                                      std::size_t n_states)
{
    validate_table(t);
    if (n_modes == 0) throw ModelError("discretization needs at least one mode");
    if (t.a != t.b) throw ModelError("only diagonal spectral densities J_AA can be discretized");
    if (t.a >= n_states) throw ModelError("spectral density owner is not a declared state");

    const std::size_t segs = t.omega.size() - 1;
    std::vector<double> cumulative(segs + 1, 0.0);
    for (std::size_t k = 0; k < segs; ++k) {
        cumulative[k + 1] = cumulative[k] + segment_integral(t.omega[k], t.omega[k + 1], t.values[k],
                                                             t.values[k + 1], t.omega[k + 1]);
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) throw DegenerateInputError("spectral density has zero reorganization energy");

    // Frequency at which the running reorganization energy reaches `target`.
    auto invert = [&](double target) {
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t k = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
        if (k >= segs) k = segs - 1;
        double lo = t.omega[k], hi = t.omega[k + 1];
        const double need = target - cumulative[k];
        for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (segment_integral(t.omega[k], t.omega[k + 1], t.values[k], t.values[k + 1], mid) < need)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    const double lambda = total / static_cast<double>(n_modes);
    std::vector<HarmonicMode> modes;
    modes.reserve(n_modes);
    for (std::size_t j = 0; j < n_modes; ++j) {
        const double w = invert((static_cast<double>(j) + 0.5) * lambda);
        HarmonicMode m;
        m.omega = w;
        m.displacement.assign(n_states, 0.0);
        m.displacement[t.a] = std::sqrt(2.0 * lambda) / w;
        modes.push_back(std::move(m));
    }
    return modes;
}

}  // namespace mqmed
