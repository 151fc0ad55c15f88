// correlation.hpp: single-mode operator-product traces and line-broadening functions
//
// Conventions (hbar = 1). For one bath component with state operators v_A, v_B and the
// thermal density r_A = exp(-beta v_A) / Tr exp(-beta v_A):
//
//   plain(t)    = Tr[ exp(-i t v_B) r_A exp(+i t v_A) ]
//   weighted(t) = i d/dt plain(t)
//
// so that the full trace for a transfer A -> B is
//   exp(-i t (E_B - E_A)) * prod_j plain_j(t).
// plain(0) = 1, |plain(t)| <= 1 and plain(-t) = conj(plain(t)).

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "mqmed/model.hpp"
#include "mqmed/simd/cos_sin_sum.hpp"
#include "mqmed/spectral_density.hpp"

namespace mqmed {

inline constexpr std::size_t kDefaultGenericDimCap = 512;

// ---- harmonic modes --------------------------------------------------------

cplx ho_trace(const HarmonicMode& mode, std::size_t a, std::size_t b, double t, const ThermalSpec& th);
cplx ho_weighted_trace(const HarmonicMode& mode, std::size_t a, std::size_t b, double t,
                       const ThermalSpec& th);

// ---- spin modes ------------------------------------------------------------

enum class SpinDirection { plus_to_minus, minus_to_plus };

// Both directions give the same value: v_+ and v_- are related by a pi rotation about z,
// which leaves the trace invariant.
cplx spin_trace(const SpinMode& mode, SpinDirection dir, double t, const ThermalSpec& th);
cplx spin_weighted_trace(const SpinMode& mode, SpinDirection dir, double t, const ThermalSpec& th);

// ---- generic modes ---------------------------------------------------------

// Eigen-expanded trace for one ordered pair (A -> B). With v_A = sum a_m |m><m| and
// v_B = sum b_n |n><n|,
//   plain(t) = sum_mn p_m |<m|n>|^2 exp(-i t (b_n - a_m)),
// so one decomposition serves every t.
class GenericPairTrace {
public:
    GenericPairTrace(const Eigen::MatrixXcd& v_a, const Eigen::MatrixXcd& v_b, const ThermalSpec& th,
                     std::size_t dim_cap = kDefaultGenericDimCap);

    cplx plain(double t) const;
    cplx weighted(double t) const;
    void evaluate(double t, cplx& plain, cplx& weighted) const;

    std::size_t terms() const { return table_.size(); }

private:
    simd::PhaseTable table_{2};
};

cplx generic_trace(const GenericMode& mode, std::size_t a, std::size_t b, double t, const ThermalSpec& th,
                   std::size_t dim_cap = kDefaultGenericDimCap);
cplx generic_weighted_trace(const GenericMode& mode, std::size_t a, std::size_t b, double t,
                            const ThermalSpec& th, std::size_t dim_cap = kDefaultGenericDimCap);

// log Tr exp(-beta v) for a Hermitian matrix (used by detailed-balance checks).
double log_partition_function(const Eigen::MatrixXcd& v, const ThermalSpec& th);

// ---- whole-bath traces -----------------------------------------------------

// Precomputed per-mode data for every ordered state pair. Immutable after
// construction; concurrent reads are safe.
class TraceEngine {
public:
    explicit TraceEngine(const Model& model, std::size_t generic_dim_cap = kDefaultGenericDimCap);

    const Model& model() const { return model_; }
    std::size_t n_modes() const { return n_modes_; }

    cplx mode_trace(std::size_t j, std::size_t a, std::size_t b, double t) const;
    cplx mode_weighted_trace(std::size_t j, std::size_t a, std::size_t b, double t) const;

    // exp(-i t (E_B - E_A)) prod_j plain_j(t)
    cplx full_trace(std::size_t a, std::size_t b, double t) const;
    // Full trace with mode j's plain trace replaced by its weighted trace.
    cplx full_trace_weighted(std::size_t j, std::size_t a, std::size_t b, double t) const;

private:
    const GenericPairTrace& generic_pair(std::size_t j, std::size_t a, std::size_t b) const;

    Model model_;
    std::size_t n_states_;
    std::size_t n_modes_;
    std::vector<HarmonicMode> harmonic_;
    std::vector<std::unique_ptr<GenericPairTrace>> generic_;  // [j][a][b]
};

cplx assemble_full_trace(const Model& model, std::size_t a, std::size_t b, double t);

// ---- line broadening -------------------------------------------------------

// g_AB(t) = sum_j J_j [coth(beta w_j/2)(1 - cos w_j t)/w_j^2 + i (sin w_j t - w_j t)/w_j^2]
// with J_j = w_j^3 d_Aj d_Bj / 2, for every state pair of a discrete harmonic bath.
class LineBroadening {
public:
    LineBroadening(const std::vector<HarmonicMode>& modes, std::size_t n_states, const ThermalSpec& th);

    cplx g(std::size_t a, std::size_t b, double t) const;
    // d g_AB / dt
    cplx g_dot(std::size_t a, std::size_t b, double t) const;
    double reorganization(std::size_t a, std::size_t b) const { return lambda_(a, b); }

private:
    struct PairTable {
        simd::PhaseTable table{2};  // channel 0: g, channel 1: dg/dt
        double re_const{0.0};       // sum_j c_j coth_j
        double lambda{0.0};         // sum_j c_j w_j = Lambda_AB
    };
    const PairTable& pair(std::size_t a, std::size_t b) const;

    std::size_t n_states_;
    std::vector<PairTable> pairs_;  // upper triangle, row-major
    Eigen::MatrixXd lambda_;
};

cplx line_broadening(const BathSpec& harmonic_bath, std::size_t n_states, std::size_t a, std::size_t b,
                     double t, const ThermalSpec& th);

struct ContinuousQuadrature {
    double rel_tol{1e-10};
    double abs_tol{1e-13};
    std::size_t max_intervals{4000};
};

// Continuous path: adaptive Gauss-Kronrod over omega on the interpolated table.
// Throws NonConvergenceError when the tolerance cannot be met.
cplx line_broadening(const SpectralDensityTable& table, double t, const ThermalSpec& th,
                     const ContinuousQuadrature& q = {});

// ---- optical time profiles (local harmonic bath) ---------------------------

struct SpectralProfiles {
    cplx fluorescence;  // F_A(t) = exp[-i t (E_A - Lambda_AA) - conj(g_AA(t))]
    cplx absorption;    // A_A(t) = exp[-i t (E_A + Lambda_AA) - g_AA(t)]
};

SpectralProfiles spectral_profiles(const Model& model, std::size_t a, double t);

// ---- spin bath profiles ----------------------------------------------------

// J_s(omega) = sum_j gamma_j^2 delta(omega - omega_j), lambda_s^j = gamma_j^2 tanh(beta w_j/2) / w_j,
// Lambda_s = sum_j lambda_s^j and
// g_s(t) = sum_j gamma_j^2 [(1 - cos w_j t)/w_j^2 + i tanh(beta w_j/2)(sin w_j t - w_j t)/w_j^2].
class SpinBathProfile {
public:
    SpinBathProfile(const SpinBath& bath, const ThermalSpec& th);

    const std::vector<double>& omega() const { return omega_; }
    const std::vector<double>& spectral_weight() const { return weight_; }  // gamma_j^2
    const std::vector<double>& lambda() const { return lambda_; }
    double total_lambda() const { return total_lambda_; }
    // True when some omega_j = 0 and the beta/2 limit was used for lambda_s^j.
    bool used_zero_frequency_limit() const { return zero_frequency_; }

    cplx g(double t) const;

private:
    std::vector<double> omega_, weight_, lambda_;
    double total_lambda_{0.0};
    bool zero_frequency_{false};
    double zero_weight_{0.0};  // sum of gamma^2 over omega = 0 modes
    double re_const_{0.0};
    double lin_{0.0};
    simd::PhaseTable table_{1};
};

SpinBathProfile spin_bath_profiles(const SpinBath& bath, const ThermalSpec& th);

}  // namespace mqmed
