// units.hpp: conversions between laboratory units and the internal hbar = k_B = 1 system
//
// Internally every energy and angular frequency shares one reciprocal-time unit and
// times are measured in its inverse. The laboratory-facing constants are pinned here.

#pragma once

#include <string_view>

namespace mqmed::units {

inline constexpr double kBoltzmannWavenumberPerKelvin = 0.6950348;  // cm^-1 / K
inline constexpr double kSpeedOfLightCmPerFs = 2.99792458e-5;       // cm / fs
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Unit {
    wavenumber,       // cm^-1, energy
    rad_per_fs,       // angular frequency
    femtosecond,      // time
    wavenumber_time,  // time conjugate to cm^-1 energies (units of cm)
    kelvin,           // temperature, converts to an energy k_B T
    dimensionless,    // already in internal units
};

Unit parse_unit(std::string_view name);
std::string_view unit_name(Unit u);

// Deterministic conversion. Throws UnitError for pairs with no physical meaning.
double unit_convert(double value, Unit from, Unit to);

// beta = 1 / (k_B T) expressed in inverse `energy_unit`.
double beta_from_kelvin(double kelvin, Unit energy_unit);

}  // namespace mqmed::units
