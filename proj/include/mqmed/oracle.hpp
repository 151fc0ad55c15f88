// oracle.hpp: brute-force reference: the full Hamiltonian in a truncated product basis
//
// Basis order is |A> (x) |i_0> (x) ... (x) |i_{M-1}>, with the subsystem index slowest and
// mode 0 the slowest bath index. The Hamiltonian is assembled as
//   H = H_sub + h_0 + h_1 + ... + h_{M-1}
// in exactly that order, h_j = sum_A |A><A| (x) v_Aj acting on mode j only.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mqmed/dynamics.hpp"
#include "mqmed/model.hpp"

namespace mqmed {

inline constexpr std::size_t kDefaultOracleDimCap = 8192;
inline constexpr std::size_t kMaxHarmonicLevels = 60;

struct TruncationSpec {
    // Fock levels per harmonic mode; 0 picks the smallest count whose thermal tail is
    // below auto_tail, up to kMaxHarmonicLevels.
    std::size_t harmonic_levels{0};
    double auto_tail{1e-10};
    std::size_t dim_cap{kDefaultOracleDimCap};
};

using SparseMatrixC = Eigen::SparseMatrix<cplx>;

struct TruncatedSystem {
    std::size_t n_states{0};
    std::vector<std::size_t> local_dims;  // per mode
    std::size_t bath_dim{1};
    std::size_t dim{0};
    Eigen::MatrixXcd H;
    SparseMatrixC H_sub;
    std::vector<SparseMatrixC> h;                     // per mode
    std::vector<std::vector<Eigen::MatrixXcd>> local_v;  // local_v[j][A]
    std::vector<bool> fock;                           // true for truncated harmonic modes
    bool real{true};
};

// Ladder-operator matrices on n Fock levels.
Eigen::MatrixXcd lowering_operator(std::size_t n);
// Mass-weighted x = (a + a^dag)/sqrt(2 omega) and p = i sqrt(omega/2)(a^dag - a).
Eigen::MatrixXcd position_operator(std::size_t n, double omega);
Eigen::MatrixXcd momentum_operator(std::size_t n, double omega);
// omega (a^dag a + 1/2) - omega^2 d x + omega^2 d^2 / 2 on n levels.
Eigen::MatrixXcd truncated_oscillator(std::size_t n, double omega, double displacement);

// Largest weight of the truncated thermal state on the top Fock level over all states.
double thermal_tail(const HarmonicMode& mode, std::size_t n_states, std::size_t levels, const ThermalSpec& th);
std::size_t auto_harmonic_levels(const HarmonicMode& mode, std::size_t n_states, const ThermalSpec& th,
                                 double tail = 1e-10, std::size_t max_levels = kMaxHarmonicLevels);

// Throws DimensionCapError when the product dimension exceeds the cap.
TruncatedSystem build_truncated(const Model& model, const TruncationSpec& spec = {});

struct ExactResult {
    std::vector<std::string> state_labels;
    std::vector<std::string> mode_labels;
    std::vector<double> times;
    Eigen::MatrixXd P;  // times x states
    Eigen::MatrixXd E;  // times x modes, Tr[h_j rho(t)] - Tr[h_j rho(0)]
    std::vector<double> total_energy;  // Tr[H rho(t)]
    std::vector<double> trace;         // Tr rho(t)
};

// rho(0) = |A><A| (x) R_A with R_A the product of truncated local thermal states.
// Refuses (ModelError) when a harmonic mode's thermal weight on its top level exceeds
// tail_tolerance.
class ExactPropagator {
public:
    ExactPropagator(const TruncatedSystem& ts, std::size_t initial_state, const ThermalSpec& th,
                    double tail_tolerance = 1e-8);

    ExactResult evaluate(const std::vector<double>& times) const;

    // eta^2 int_0^inf exp(-eta t) [O(t) - O(0)] dt: the early-time slope of O weighted by an
    // exponential window of length 1/eta. One entry per mode, then one per state population.
    std::vector<double> laplace_slopes(double eta) const;

    const Eigen::VectorXd& eigenvalues() const { return energies_; }

private:
    // C_mn = rho~_mn O~_nm in the eigenbasis of H.
    Eigen::MatrixXcd weights(const SparseMatrixC& op) const;
    Eigen::MatrixXcd population_weights(std::size_t state) const;
    std::vector<double> evaluate_weights(const Eigen::MatrixXcd& c, const std::vector<double>& times) const;
    double laplace(const Eigen::MatrixXcd& c, double eta) const;

    const TruncatedSystem& ts_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd U_;
    Eigen::MatrixXcd rho_;  // initial density in the eigenbasis
};

ExactResult exact_propagation(const TruncatedSystem& ts, std::size_t initial_state, const ThermalSpec& th,
                              const std::vector<double>& times);

// Tr[exp(-i t v_B) r_A exp(+i t v_A)] by dense matrix exponentials of the oracle's own
// local operators, and its (v_B - v_A)-weighted counterpart.
cplx oracle_mode_trace(const TruncatedSystem& ts, std::size_t j, std::size_t a, std::size_t b, double t,
                       const ThermalSpec& th);
cplx oracle_mode_weighted_trace(const TruncatedSystem& ts, std::size_t j, std::size_t a, std::size_t b, double t,
                                const ThermalSpec& th);

// ---- comparison ------------------------------------------------------------

struct ComparisonTolerances {
    double population_abs{0.05};
    double energy_rel{0.2};  // relative to the largest |E_j| of the exact run
    double late_window{0.25};  // trailing fraction of the grid averaged for long-time populations
    double boltzmann_abs{0.05};
    double max_coupling_ratio{0.1};      // V / |dE|
    double max_reorganization_ratio{0.05};  // lambda / omega (harmonic) or gamma / omega (spin)
};

struct QuantityDeviation {
    std::string name;
    double max_abs{0.0};
    double max_rel{0.0};
    bool pass{true};
};

struct ComparisonReport {
    std::vector<QuantityDeviation> quantities;
    double coupling_ratio{0.0};
    double reorganization_ratio{0.0};
    double min_beta_omega{0.0};
    double max_beta_omega{0.0};
    std::vector<std::string> regime_flags;
    std::vector<double> late_populations;
    std::vector<double> boltzmann_populations;
    double boltzmann_deviation{0.0};
    bool boltzmann_pass{true};
    bool pass{true};
};

struct RegimeDiagnostics {
    double coupling_ratio{0.0};          // max V / |E_A - E_B|
    double reorganization_ratio{0.0};    // max lambda / omega or gamma / omega
    double min_beta_omega{0.0};
    double max_beta_omega{0.0};
};

RegimeDiagnostics regime_diagnostics(const Model& model);

ComparisonReport compare_report(const ExactResult& exact, const Trajectory& mqmed, const Model& model,
                                const ComparisonTolerances& tol = {});

}  // namespace mqmed
