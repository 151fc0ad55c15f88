#include "mqmed/units.hpp"

#include <string>

#include "mqmed/errors.hpp"

namespace mqmed::units {

namespace {

constexpr double kRadPerFsPerWavenumber = kTwoPi * kSpeedOfLightCmPerFs;

}  // namespace

Unit parse_unit(std::string_view name)
{
    if (name == "cm-1" || name == "cm^-1" || name == "wavenumber") return Unit::wavenumber;
    if (name == "rad/fs") return Unit::rad_per_fs;
    if (name == "fs") return Unit::femtosecond;
    if (name == "cm") return Unit::wavenumber_time;
    if (name == "K") return Unit::kelvin;
    if (name == "dimensionless" || name == "hbar=1") return Unit::dimensionless;
    throw UnitError("unknown unit '" + std::string(name) + "'");
}

std::string_view unit_name(Unit u)
{
    switch (u) {
    case Unit::wavenumber: return "cm-1";
    case Unit::rad_per_fs: return "rad/fs";
    case Unit::femtosecond: return "fs";
    case Unit::wavenumber_time: return "cm";
    case Unit::kelvin: return "K";
    case Unit::dimensionless: return "dimensionless";
    }
    return "?";
}

double unit_convert(double value, Unit from, Unit to)
{
    if (from == to) return value;
    using enum Unit;
    // Time conversions keep the phase omega * t invariant.
    if (from == wavenumber && to == rad_per_fs) return value * kRadPerFsPerWavenumber;
    if (from == rad_per_fs && to == wavenumber) return value / kRadPerFsPerWavenumber;
    if (from == femtosecond && to == wavenumber_time) return value * kRadPerFsPerWavenumber;
    if (from == wavenumber_time && to == femtosecond) return value / kRadPerFsPerWavenumber;
    if (from == kelvin && to == wavenumber) return value * kBoltzmannWavenumberPerKelvin;
    if (from == kelvin && to == rad_per_fs)
        return value * kBoltzmannWavenumberPerKelvin * kRadPerFsPerWavenumber;
    throw UnitError("no conversion from " + std::string(unit_name(from)) + " to " +
                    std::string(unit_name(to)));
}

double beta_from_kelvin(double kelvin, Unit energy_unit)
{
    if (!(kelvin > 0.0)) throw UnitError("temperature must be positive");
    if (energy_unit == Unit::dimensionless)
        throw UnitError("a temperature in K needs a physical energy unit");
    return 1.0 / unit_convert(kelvin, Unit::kelvin, energy_unit);
}

}  // namespace mqmed::units
