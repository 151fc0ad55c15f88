// dynamics.hpp: population master equation, per-mode dissipated energy, steady states
//
//   dP_A/dt = sum_B (K_AB P_B - K_BA P_A)
//   dE_j/dt = sum_A sum_{B != A} Kdiss^j_BA P_A
// E_j is measured from t = 0, so E_j(0) = 0.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqmed/rates.hpp"

namespace mqmed {

struct Trajectory {
    std::vector<std::string> state_labels;
    std::vector<std::string> mode_labels;
    std::vector<double> times;
    Eigen::MatrixXd P;  // times x states
    Eigen::MatrixXd E;  // times x modes
    std::vector<double> E_sub;
    std::vector<double> residual;
    bool used_numeric{false};

    std::size_t size() const { return times.size(); }
};

// M(b, a) = K_BA for b != a and M(a, a) = -sum_b K_BA.
Eigen::MatrixXd rate_matrix(const RateSet& rates);

// Per-state dissipation weights: w(j, A) = sum_{B != A} Kdiss^j_BA.
Eigen::MatrixXd dissipation_weights(const RateSet& rates);

enum class PropagationMethod { automatic, eigen, numeric };

struct PropagationOptions {
    PropagationMethod method{PropagationMethod::automatic};
    double ode_abs_tol{1e-13};
    double ode_rel_tol{1e-12};
    // Above this eigenvector condition number the automatic method integrates numerically.
    double max_condition{1e8};
};

// P0 must be a population vector (nonnegative, unit sum). Throws ModelError for ill-formed
// rate matrices (negative rates or growing modes).
Trajectory propagate(const RateSet& rates, const Eigen::VectorXd& p0, const std::vector<double>& times,
                     const PropagationOptions& options = {});

// residual(t) = [E_sub(t) - E_sub(0)] + sum_j E_j(t). Returns the largest |residual|.
double energy_ledger(Trajectory& trajectory, const Eigen::VectorXd& energies);

// Unique stationary populations. Throws ReducibleRateGraphError when the rate graph has
// more than one closed class.
Eigen::VectorXd steady_state(const RateSet& rates);

// Strongly connected components of the directed graph a -> b for K_BA > 0, in a stable order.
std::vector<std::vector<std::size_t>> rate_graph_components(const RateSet& rates);

// Smallest nonzero |eigenvalue| of the rate matrix (0 when every rate vanishes).
double slowest_rate(const RateSet& rates);

}  // namespace mqmed
