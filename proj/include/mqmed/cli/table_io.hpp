// table_io.hpp: CSV tables with a '#' metadata header

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mqmed/dynamics.hpp"
#include "mqmed/oracle.hpp"
#include "mqmed/rates.hpp"

namespace mqmed::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double x);

struct TableHeader {
    std::uint64_t config_hash{0};
    std::string task;
    std::vector<std::pair<std::string, std::string>> extra;
};

void write_header(std::ostream& out, const TableHeader& h);

// from,to,mode,K,Kdiss,err_estimate,damping_eta. The population rate of a pair sits on a
// row with mode "-" and an empty Kdiss; per-mode rows leave K empty. Pairs whose rates
// are all zero are omitted.
void write_rate_table(std::ostream& out, const TableHeader& h, const RateSet& rates);

// Reads a table written by write_rate_table back onto the states and modes of a model.
// Throws Error naming the line on malformed input or unknown labels.
RateSet read_rate_table(std::istream& in, const std::vector<std::string>& state_labels,
                        const std::vector<std::string>& mode_labels, const Eigen::VectorXd& energies);
RateSet read_rate_table_file(const std::string& path, const std::vector<std::string>& state_labels,
                             const std::vector<std::string>& mode_labels, const Eigen::VectorXd& energies);

// t,P_<state>...,E_<mode>...,E_sub,residual. times_out replaces the trajectory's internal
// times in the t column (config time units).
void write_trajectory(std::ostream& out, const TableHeader& h, const Trajectory& traj,
                      const std::vector<double>& times_out);

// source,t,P_<state>...,E_<mode>... with one row per source (oracle, mqmed) and time.
void write_comparison_table(std::ostream& out, const TableHeader& h, const ExactResult& exact,
                            const Trajectory& mq, const std::vector<double>& times_out);

}  // namespace mqmed::cli
