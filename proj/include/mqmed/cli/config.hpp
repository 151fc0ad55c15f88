// config.hpp: run configuration document (JSON) and its validation
//
// Energies and frequencies are read in units.energy and used unchanged internally
// (hbar = k_B = 1), so internal times are in the reciprocal of that unit. Times in the
// config are read in units.time and converted.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqmed/errors.hpp"
#include "mqmed/model.hpp"
#include "mqmed/oracle.hpp"
#include "mqmed/quadrature.hpp"
#include "mqmed/rates.hpp"
#include "mqmed/spectral_density.hpp"
#include "mqmed/units.hpp"

namespace mqmed::cli {

// Parse or validation failure; the message carries line:col or the offending key.
struct ConfigError : Error {
    using Error::Error;
};

enum class Task { rates, dynamics, dsd, spin, verify, oracle_compare };

std::string_view task_name(Task t);

struct OutputSpec {
    std::string directory{"mqmed_out"};
    bool csv{true};
    bool svg{true};
};

struct RunConfig {
    std::string path;         // config file, empty for in-memory text
    std::string base_dir;     // relative paths resolve against this
    std::uint64_t hash{0};    // FNV-1a of the config bytes
    Model model;
    std::vector<std::string> mode_labels;
    units::Unit energy_unit{units::Unit::dimensionless};
    units::Unit time_unit{units::Unit::dimensionless};
    // Spectral density tables by owner state (bath.kind = sd-table).
    std::map<std::size_t, SpectralDensityTable> sd_tables;
    std::size_t sd_modes{1000};

    Task task{Task::rates};
    std::optional<std::size_t> initial_state;
    RateRoute route{RateRoute::trace_product};
    std::string rates_file;  // verify: use this rate table instead of computing one
    bool weak_override{false};
    double weak_max_ratio{0.2};

    QuadratureSettings quadrature;
    std::vector<double> times;  // internal units
    std::vector<double> times_user;  // as written in the config
    std::vector<double> omega_grid;
    TruncationSpec truncation;
    std::optional<double> oracle_eta;
    std::size_t workers{0};
    std::size_t generic_dim_cap{kDefaultGenericDimCap};
    BalanceTolerances balance;
    ComparisonTolerances comparison;

    OutputSpec output;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace mqmed::cli
