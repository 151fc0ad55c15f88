// spectral_density.hpp: tabulated bath spectral densities J_AB(omega)

#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "mqmed/model.hpp"

namespace mqmed {

// Samples of J_AB(omega) on an ascending positive grid. J is interpolated linearly
// between samples and is zero outside the grid.
struct SpectralDensityTable {
    std::vector<double> omega;
    std::vector<double> values;
    std::size_t a{0};
    std::size_t b{0};

    double operator()(double w) const;
    double min_omega() const { return omega.front(); }
    double max_omega() const { return omega.back(); }
};

// Throws ModelError on a malformed table.
void validate_table(const SpectralDensityTable& table);

// Two whitespace- or comma-separated columns (omega, J); '#' starts a comment.
SpectralDensityTable read_spectral_density(std::istream& in, std::size_t a = 0, std::size_t b = 0);
SpectralDensityTable read_spectral_density_file(const std::string& path, std::size_t a = 0,
                                                std::size_t b = 0);

// Integral of J(omega)/omega over the table, exact for the piecewise-linear J.
double table_reorganization_energy(const SpectralDensityTable& table);

// Equal-reorganization partition of J(omega)/omega into n_modes harmonic modes displaced
// on state table.a. Each mode sits at the median frequency of its bin.
std::vector<HarmonicMode> discretize_spectral_density(const SpectralDensityTable& table,
                                                      std::size_t n_modes, std::size_t n_states);

}  // namespace mqmed
