// rates.hpp: population and per-mode dissipation rate constants
//
// With V = V_AB and the full trace C_AB(t) for the transfer A -> B,
//   K_BA       = 2|V|^2 Re int_0^inf C_AB(t) dt
//   Kdiss^j_BA = 2|V|^2 Re int_0^inf C_AB(t) [weighted_j / plain_j](t) dt
// Matrices are stored column = source, row = destination: K(b, a) = K_BA.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqmed/correlation.hpp"
#include "mqmed/model.hpp"
#include "mqmed/quadrature.hpp"
#include "mqmed/spectral_density.hpp"

namespace mqmed {

struct RateValue {
    double value{0.0};
    double error{0.0};
    double t_end{0.0};
    std::optional<double> damping_eta;
    bool used_fallback{false};
};

// Inverse of the fastest frequency scale in the model; used as the first panel width
// when settings.panel_width is zero.
double characteristic_time(const Model& model);

// Trace-product route (every bath family).
RateValue population_rate(const TraceEngine& engine, std::size_t a, std::size_t b,
                          const QuadratureSettings& settings);
RateValue population_rate(const Model& model, std::size_t a, std::size_t b,
                          const QuadratureSettings& settings);
RateValue dissipation_rate_general(const TraceEngine& engine, std::size_t j, std::size_t a, std::size_t b,
                                   const QuadratureSettings& settings);
RateValue dissipation_rate_general(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                   const QuadratureSettings& settings);

// Line-broadening route (harmonic baths): the integrand is built from
// exp[-i t (E_B - E_A + Lambda_AA - 2 Lambda_AB + Lambda_BB) - g_AA + 2 g_AB - g_BB].
RateValue population_rate_harmonic(const Model& model, std::size_t a, std::size_t b,
                                   const QuadratureSettings& settings);
RateValue dissipation_rate_harmonic(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                    const QuadratureSettings& settings);

// ---- local harmonic baths --------------------------------------------------

// I_BA(omega) = Re int F_A*(t) A_B(t) [cos omega t - i coth(beta omega/2) sin omega t] dt
RateValue dissipative_potential(const Model& model, std::size_t a, std::size_t b, double omega,
                                const QuadratureSettings& settings);

// Kdiss^j_BA = 2|V|^2 lambda_j I_BA(omega_j) for a mode owned by A or by B. Modes owned by
// any other state give 0.
RateValue dissipation_rate_local(const Model& model, std::size_t j, std::size_t a, std::size_t b,
                                 const QuadratureSettings& settings);

struct DissipativeSpectralDensity {
    std::size_t owner{0};  // A: the state whose J_AA is resolved
    std::size_t other{0};  // B
    std::vector<double> omega;
    std::vector<double> forward;   // J^A_BA(omega), transfer A -> B
    std::vector<double> backward;  // J^A_AB(omega), transfer B -> A
    double max_error{0.0};
};

// J^A_BA(omega) = 2|V_AB|^2 (J_AA(omega)/omega) I_BA(omega) on the grid. The model's
// local bath supplies the line-broadening functions; j_aa supplies the prefactor.
DissipativeSpectralDensity dissipative_spectral_density(const Model& model, const SpectralDensityTable& j_aa,
                                                        std::size_t a, std::size_t b,
                                                        const std::vector<double>& omega_grid,
                                                        const QuadratureSettings& settings);

// D_A(omega, t) = sum_{B != A} [J^A_BA(omega) P_A(t) + J^A_AB(omega) P_B(t)], one value per
// grid point. Every table must share the owner A and the same grid.
std::vector<double> dissipation_density(const std::vector<DissipativeSpectralDensity>& tables,
                                        const Eigen::VectorXd& populations);

// ---- whole rate sets -------------------------------------------------------

struct RateSet {
    std::vector<std::string> state_labels;
    std::vector<std::string> mode_labels;
    Eigen::VectorXd energies;
    Eigen::MatrixXd K;                  // K(b, a) = K_BA
    Eigen::MatrixXd K_error;
    std::vector<Eigen::MatrixXd> Kdiss;  // Kdiss[j](b, a)
    std::vector<Eigen::MatrixXd> Kdiss_error;
    // Damping actually applied to each integral, 0 when none.
    Eigen::MatrixXd K_eta;
    std::vector<Eigen::MatrixXd> Kdiss_eta;

    // Largest damping applied anywhere, if any.
    std::optional<double> damping_eta() const;

    std::size_t n_states() const { return state_labels.size(); }
    std::size_t n_modes() const { return mode_labels.size(); }
};

// Empty rate set with zero matrices sized for the model.
RateSet empty_rate_set(const Model& model);
std::vector<std::string> default_mode_labels(const Model& model);

enum class RateRoute { trace_product, line_broadening, local };

struct RateOptions {
    RateRoute route{RateRoute::trace_product};
    // 0 reads MQMED_WORKERS (default 1).
    std::size_t workers{0};
    std::size_t generic_dim_cap{kDefaultGenericDimCap};
};

std::size_t worker_count(std::size_t requested);

// Every (A, B, j) integral is an independent task. Results do not depend on the worker
// count. NonConvergenceError messages name the offending triple.
RateSet compute_rate_set(const Model& model, const QuadratureSettings& settings, const RateOptions& options = {});

// ---- spin baths ------------------------------------------------------------

// Exact spin traces through the generic machinery.
RateSet spin_rates_exact(const Model& model, const QuadratureSettings& settings, std::size_t workers = 0);

struct WeakCouplingOptions {
    double max_ratio{0.2};  // largest allowed gamma/omega
    bool override_guard{false};
    std::size_t workers{0};
};

// Weak-coupling spin rates from g_s and Lambda_s. Throws ModelError when some
// gamma_j / omega_j exceeds max_ratio unless override_guard is set.
RateSet spin_rates_weak(const Model& model, const QuadratureSettings& settings,
                        const WeakCouplingOptions& options = {});

// Harmonic bath with J_(++)(omega) = J_(--)(omega) = J_s(omega) tanh(beta omega/2):
// one mode per spin, displaced by +d on state 0 and -d on state 1.
HarmonicBath surrogate_harmonic_bath(const SpinBath& bath, const ThermalSpec& th);

// ---- balance checks --------------------------------------------------------

struct PairBalance {
    std::size_t a{0}, b{0};
    double ratio{0.0};     // K_AB / K_BA
    double expected{0.0};  // Z_A / Z_B
    double rel_dev{0.0};
    bool checked{false};
    bool ok{true};
};

struct DissipationBalance {
    std::size_t j{0}, a{0}, b{0};
    double ratio{0.0};     // Kdiss^j_AB / Kdiss^j_BA
    double expected{0.0};  // -K_AB / K_BA
    double rel_dev{0.0};
    bool checked{false};
    bool ok{true};
};

struct SumRule {
    std::size_t a{0}, b{0};  // transfer a -> b
    double sum{0.0};         // sum_j Kdiss^j_BA
    double expected{0.0};    // (E_A - E_B) K_BA
    double abs_dev{0.0};
    double bound{0.0};
    bool ok{true};
};

struct BalanceTolerances {
    double ratio_rel{1e-4};
    double sum_rel{1e-6};
    double abs_tol{1e-12};
};

struct BalanceReport {
    std::vector<PairBalance> populations;
    std::vector<DissipationBalance> dissipation;
    std::vector<SumRule> sum_rules;
    bool ok() const;
    // One line per violated check, naming the invariant.
    std::vector<std::string> violations(const std::vector<std::string>& state_labels,
                                        const std::vector<std::string>& mode_labels) const;
};

// log of the bath partition function of every state (up to a common constant).
Eigen::VectorXd bath_log_partition(const Model& model);

BalanceReport verify_balance(const RateSet& rates, const Model& model, const BalanceTolerances& tol = {});

}  // namespace mqmed
