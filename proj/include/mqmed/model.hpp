// model.hpp: subsystem, bath and thermal descriptions of the total Hamiltonian
//
// The Hamiltonian is split as H = H_ener + H_coup + sum_j h_j with
//   h_j = sum_A |A><A| (x) v_Aj
// so each bath component couples only to the diagonal of the subsystem. Bath
// families differ only in how v_Aj is parameterised.

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mqmed {

using cplx = std::complex<double>;

struct Coupling {
    std::size_t a{0};
    std::size_t b{0};
    double value{0.0};
};

struct SubsystemSpec {
    std::vector<std::string> labels;
    std::vector<double> energies;     // E_A
    std::vector<Coupling> couplings;  // V_AB, one entry per unordered pair

    std::size_t size() const { return labels.size(); }
    // Symmetric lookup; absent pairs read as 0.
    double coupling(std::size_t a, std::size_t b) const;
    // Throws ModelError for unknown labels.
    std::size_t index_of(std::string_view label) const;
};

// v_Aj = p^2/2 + omega^2 (x - d_A)^2 / 2 in mass-weighted coordinates.
struct HarmonicMode {
    double omega{1.0};
    std::vector<double> displacement;  // indexed by state; missing entries are 0

    double d(std::size_t state) const
    {
        return state < displacement.size() ? displacement[state] : 0.0;
    }
};

// Harmonic mode that is displaced only on its owner state.
struct LocalHarmonicMode {
    std::size_t owner{0};
    double omega{1.0};
    double displacement{0.0};

    HarmonicMode to_general(std::size_t n_states) const;
};

// v_(+/-)j = (omega/2) sigma_z -/+ gamma sigma_x, state 0 is "+" and state 1 is "-".
struct SpinMode {
    double omega{1.0};
    double gamma{0.0};

    // sqrt(omega^2 + 4 gamma^2)
    double dressed_frequency() const;
    // theta = atan(2 gamma / omega) / 2, with theta = pi/4 at omega = 0.
    double mixing_angle() const;
};

// Arbitrary finite local space; v[A] is the Hermitian operator for state A.
struct GenericMode {
    std::vector<Eigen::MatrixXcd> v;

    std::size_t dim() const { return v.empty() ? 0 : static_cast<std::size_t>(v.front().rows()); }
};

struct HarmonicBath {
    std::vector<HarmonicMode> modes;
};
struct LocalHarmonicBath {
    std::vector<LocalHarmonicMode> modes;
};
struct SpinBath {
    std::vector<SpinMode> modes;
};
struct GenericBath {
    std::vector<GenericMode> modes;
};

using BathSpec = std::variant<HarmonicBath, LocalHarmonicBath, SpinBath, GenericBath>;

std::size_t mode_count(const BathSpec& bath);
std::string_view bath_kind_name(const BathSpec& bath);
bool is_harmonic(const BathSpec& bath);
// General-coupling view of a harmonic or local bath. Throws UnsupportedBathError otherwise.
std::vector<HarmonicMode> harmonic_modes(const BathSpec& bath, std::size_t n_states);

// Inverse temperature. Infinite beta is not representable; the zero-temperature flag
// replaces coth and tanh of beta*omega/2 by their limits instead.
struct ThermalSpec {
    double beta{1.0};
    bool zero_temperature{false};

    static ThermalSpec at_zero_temperature() { return ThermalSpec{1.0, true}; }

    double coth_half(double omega) const;  // coth(beta omega / 2)
    double tanh_half(double omega) const;  // tanh(beta omega / 2)
};

struct Model {
    SubsystemSpec subsystem;
    BathSpec bath;
    ThermalSpec thermal;

    std::size_t n_states() const { return subsystem.size(); }
    std::size_t n_modes() const { return mode_count(bath); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline constexpr double kHermiticityTolerance = 1e-12;

ValidationReport validate_model(const SubsystemSpec& subsystem, const BathSpec& bath,
                                const ThermalSpec& thermal);
inline ValidationReport validate_model(const Model& m)
{
    return validate_model(m.subsystem, m.bath, m.thermal);
}
// Throws ModelError listing every violation.
void require_valid(const Model& m);

struct Reorganization {
    Eigen::MatrixXd total;                // Lambda_AB
    std::vector<Eigen::MatrixXd> per_mode;  // lambda^j_AB
};

// Lambda_AB = sum_j omega_j^2 d_Aj d_Bj / 2. Harmonic baths only.
Reorganization reorganization_energies(const BathSpec& bath, std::size_t n_states);

}  // namespace mqmed
