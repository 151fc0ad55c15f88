#include "mqmed/simd/cos_sin_sum.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mqmed::simd {

namespace {

bool cpu_has_avx2()
{
#if defined(MQMED_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa()
{
    if (const char* env = std::getenv("MQMED_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& isa_slot()
{
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

}  // namespace

std::string_view isa_name(Isa isa)
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa)
{
    return isa == Isa::scalar || cpu_has_avx2();
}

Isa active_isa()
{
    return isa_slot().load(std::memory_order_relaxed);
}

void set_active_isa(Isa isa)
{
    if (!isa_supported(isa)) throw std::runtime_error("ISA not supported on this CPU: " + std::string(isa_name(isa)));
    isa_slot().store(isa, std::memory_order_relaxed);
}

PhaseTable::PhaseTable(std::size_t channels)
    : channels_(channels), cw_(channels), sw_(channels)
{
    if (channels == 0 || channels > kMaxChannels)
        throw std::invalid_argument("PhaseTable supports 1.." + std::to_string(kMaxChannels) + " channels");
}

void PhaseTable::add(double freq, std::span<const double> cos_weights, std::span<const double> sin_weights)
{
    if (cos_weights.size() != channels_ || sin_weights.size() != channels_)
        throw std::invalid_argument("PhaseTable::add: weight count does not match channel count");
    // Drop the padding, append, re-pad.
    freq_.resize(size_);
    for (std::size_t c = 0; c < channels_; ++c) {
        cw_[c].resize(size_);
        sw_[c].resize(size_);
        cw_[c].push_back(cos_weights[c]);
        sw_[c].push_back(sin_weights[c]);
    }
    freq_.push_back(freq);
    ++size_;
    pad();
}

void PhaseTable::add(double freq, double cos_weight, double sin_weight)
{
    add(freq, std::span<const double>(&cos_weight, 1), std::span<const double>(&sin_weight, 1));
}

void PhaseTable::pad()
{
    const std::size_t padded = (size_ + kLaneWidth - 1) / kLaneWidth * kLaneWidth;
    freq_.resize(padded, 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
        cw_[c].resize(padded, 0.0);
        sw_[c].resize(padded, 0.0);
    }
}

void PhaseTable::evaluate(Isa isa, double t, std::span<PhaseSum> out) const
{
    if (out.size() < channels_) throw std::invalid_argument("PhaseTable::evaluate: output too small");
    const double* cw[kMaxChannels];
    const double* sw[kMaxChannels];
    for (std::size_t c = 0; c < channels_; ++c) {
        cw[c] = cw_[c].data();
        sw[c] = sw_[c].data();
    }
    const detail::KernelArgs args{freq_.data(), freq_.size(), cw, sw, channels_, t, out.data()};
    if (isa == Isa::avx2)
        detail::cos_sin_sums_avx2(args);
    else
        detail::cos_sin_sums_scalar(args);
}

void PhaseTable::evaluate(double t, std::span<PhaseSum> out) const
{
    evaluate(active_isa(), t, out);
}

PhaseSum PhaseTable::evaluate(double t) const
{
    PhaseSum out[kMaxChannels];
    evaluate(t, std::span<PhaseSum>(out, channels_));
    return out[0];
}

}  // namespace mqmed::simd
