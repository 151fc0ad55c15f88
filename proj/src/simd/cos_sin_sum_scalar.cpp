// Reference kernel: std::cos / std::sin, sequential accumulation.

#include <cmath>

#include "mqmed/simd/cos_sin_sum.hpp"

namespace mqmed::simd::detail {

void cos_sin_sums_scalar(const KernelArgs& a)
{
    double cs[kMaxChannels] = {};
    double ss[kMaxChannels] = {};
    for (std::size_t k = 0; k < a.n; ++k) {
        const double x = a.freq[k] * a.t;
        const double c = std::cos(x);
        const double s = std::sin(x);
        for (std::size_t ch = 0; ch < a.channels; ++ch) {
            cs[ch] += a.cos_w[ch][k] * c;
            ss[ch] += a.sin_w[ch][k] * s;
        }
    }
    for (std::size_t ch = 0; ch < a.channels; ++ch) a.out[ch] = PhaseSum{cs[ch], ss[ch]};
}

}  // namespace mqmed::simd::detail
