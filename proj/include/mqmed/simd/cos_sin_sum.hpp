// cos_sin_sum.hpp: weighted trigonometric sums, the inner loop of every trace evaluation
//
// For a fixed set of frequencies nu_k and several weight channels c,
//   C_c(t) = sum_k a_ck cos(nu_k t),   S_c(t) = sum_k b_ck sin(nu_k t).
// Line-broadening functions, eigen-expanded generic traces and exact-propagation
// observables all reduce to this form. One sincos per frequency is shared by all
// channels.
//
// Two kernels implement it: a scalar reference built on std::cos/std::sin and an
// AVX2+FMA kernel with its own vectorised sincos. The kernel is picked once at run
// time from the CPU features; MQMED_SIMD=scalar forces the reference path.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mqmed::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Overrides the dispatch for the whole process. Throws if the ISA is unsupported.
void set_active_isa(Isa isa);

inline constexpr std::size_t kMaxChannels = 8;
inline constexpr std::size_t kLaneWidth = 4;

struct PhaseSum {
    double cos_sum{0.0};
    double sin_sum{0.0};
};

// Frequencies plus per-channel weights, stored padded to the lane width with zero
// weights so kernels never handle tails.
class PhaseTable {
public:
    explicit PhaseTable(std::size_t channels = 1);

    void add(double freq, std::span<const double> cos_weights, std::span<const double> sin_weights);
    // Single-channel convenience.
    void add(double freq, double cos_weight, double sin_weight);

    std::size_t size() const { return size_; }
    std::size_t channels() const { return channels_; }
    std::size_t padded_size() const { return freq_.size(); }

    // Evaluates every channel at time t using the active kernel.
    void evaluate(double t, std::span<PhaseSum> out) const;
    void evaluate(Isa isa, double t, std::span<PhaseSum> out) const;
    PhaseSum evaluate(double t) const;

    const double* freq() const { return freq_.data(); }
    const double* cos_weights(std::size_t c) const { return cw_[c].data(); }
    const double* sin_weights(std::size_t c) const { return sw_[c].data(); }

private:
    void pad();

    std::size_t channels_;
    std::size_t size_{0};
    std::vector<double> freq_;
    std::vector<std::vector<double>> cw_;
    std::vector<std::vector<double>> sw_;
};

namespace detail {

struct KernelArgs {
    const double* freq;
    std::size_t n;  // multiple of kLaneWidth
    const double* const* cos_w;
    const double* const* sin_w;
    std::size_t channels;
    double t;
    PhaseSum* out;
};

void cos_sin_sums_scalar(const KernelArgs& args);
void cos_sin_sums_avx2(const KernelArgs& args);

}  // namespace detail

}  // namespace mqmed::simd
