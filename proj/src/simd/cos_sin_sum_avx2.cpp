// AVX2 + FMA kernel. Compiled with -mavx2 -mfma; only called after a CPU check.
//
// sincos: Cody-Waite reduction by pi/2 in three FMA steps, then the fdlibm
// minimax kernels on |r| <= pi/4. Lanes with |x| beyond kReductionLimit fall back
// to std::sin/std::cos.

#include <cmath>

#include "mqmed/simd/cos_sin_sum.hpp"

#if defined(MQMED_HAVE_AVX2_TU)

#include <immintrin.h>

namespace mqmed::simd::detail {

namespace {

constexpr double kTwoOverPi = 0.6366197723675814;
constexpr double kPio2Hi = 1.5707963267948966;
constexpr double kPio2Mid = 6.123233995736766e-17;
constexpr double kPio2Lo = -1.4973849048591698e-33;
constexpr double kReductionLimit = 1.0e9;

constexpr double S1 = -1.66666666666666324348e-01;
constexpr double S2 = 8.33333333332248946124e-03;
constexpr double S3 = -1.98412698298579493134e-04;
constexpr double S4 = 2.75573137070700676789e-06;
constexpr double S5 = -2.50507602534068634195e-08;
constexpr double S6 = 1.58969099521155010221e-10;

constexpr double C1 = 4.16666666666666019037e-02;
constexpr double C2 = -1.38888888888741095749e-03;
constexpr double C3 = 2.48015872894767294178e-05;
constexpr double C4 = -2.75573143513906633035e-07;
constexpr double C5 = 2.08757232129817482790e-09;
constexpr double C6 = -1.13596475577881948265e-11;

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline void sincos_pd(__m256d x, __m256d& s_out, __m256d& c_out)
{
    const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, set1(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(q, set1(kPio2Hi), x);
    r = _mm256_fnmadd_pd(q, set1(kPio2Mid), r);
    r = _mm256_fnmadd_pd(q, set1(kPio2Lo), r);

    const __m256d z = _mm256_mul_pd(r, r);
    const __m256d w = _mm256_mul_pd(z, z);

    // sin(r)
    __m256d rs = _mm256_fmadd_pd(z, set1(S4), set1(S3));
    rs = _mm256_fmadd_pd(z, rs, set1(S2));
    __m256d rs_hi = _mm256_fmadd_pd(z, set1(S6), set1(S5));
    rs = _mm256_fmadd_pd(_mm256_mul_pd(z, w), rs_hi, rs);
    const __m256d v = _mm256_mul_pd(z, r);
    const __m256d sin_r = _mm256_fmadd_pd(v, _mm256_fmadd_pd(z, rs, set1(S1)), r);

    // cos(r)
    __m256d rc_lo = _mm256_fmadd_pd(z, set1(C3), set1(C2));
    rc_lo = _mm256_mul_pd(z, _mm256_fmadd_pd(z, rc_lo, set1(C1)));
    __m256d rc_hi = _mm256_fmadd_pd(z, set1(C6), set1(C5));
    rc_hi = _mm256_fmadd_pd(z, rc_hi, set1(C4));
    const __m256d rc = _mm256_fmadd_pd(_mm256_mul_pd(w, w), rc_hi, rc_lo);
    const __m256d hz = _mm256_mul_pd(set1(0.5), z);
    const __m256d one = set1(1.0);
    const __m256d w1 = _mm256_sub_pd(one, hz);
    const __m256d corr = _mm256_fmadd_pd(z, rc, _mm256_sub_pd(_mm256_sub_pd(one, w1), hz));
    const __m256d cos_r = _mm256_add_pd(w1, corr);

    // Quadrant n mod 4: swap on odd n; sin negative for n&2; cos negative for (n+1)&2.
    const __m256i qi = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
    const __m256i one_i = _mm256_set1_epi64x(1);
    const __m256i two_i = _mm256_set1_epi64x(2);
    const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one_i), one_i));
    const __m256i sin_neg = _mm256_slli_epi64(_mm256_and_si256(qi, two_i), 62);
    const __m256i cos_neg = _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(qi, one_i), two_i), 62);

    const __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap);
    const __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap);
    s_out = _mm256_xor_pd(s, _mm256_castsi256_pd(sin_neg));
    c_out = _mm256_xor_pd(c, _mm256_castsi256_pd(cos_neg));
}

inline double hsum(__m256d v)
{
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

void cos_sin_sums_avx2(const KernelArgs& a)
{
    __m256d cs[kMaxChannels];
    __m256d ss[kMaxChannels];
    for (std::size_t ch = 0; ch < a.channels; ++ch) {
        cs[ch] = _mm256_setzero_pd();
        ss[ch] = _mm256_setzero_pd();
    }
    const __m256d tv = set1(a.t);
    const __m256d limit = set1(kReductionLimit);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    for (std::size_t k = 0; k < a.n; k += kLaneWidth) {
        const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(a.freq + k), tv);
        __m256d s, c;
        const __m256d big = _mm256_cmp_pd(_mm256_and_pd(x, abs_mask), limit, _CMP_GT_OQ);
        if (_mm256_movemask_pd(big) == 0) {
            sincos_pd(x, s, c);
        } else {
            alignas(32) double xs[4], sv[4], cv[4];
            _mm256_store_pd(xs, x);
            for (int l = 0; l < 4; ++l) {
                sv[l] = std::sin(xs[l]);
                cv[l] = std::cos(xs[l]);
            }
            s = _mm256_load_pd(sv);
            c = _mm256_load_pd(cv);
        }
        for (std::size_t ch = 0; ch < a.channels; ++ch) {
            cs[ch] = _mm256_fmadd_pd(_mm256_loadu_pd(a.cos_w[ch] + k), c, cs[ch]);
            ss[ch] = _mm256_fmadd_pd(_mm256_loadu_pd(a.sin_w[ch] + k), s, ss[ch]);
        }
    }
    for (std::size_t ch = 0; ch < a.channels; ++ch) a.out[ch] = PhaseSum{hsum(cs[ch]), hsum(ss[ch])};
}

}  // namespace mqmed::simd::detail

#else

namespace mqmed::simd::detail {

void cos_sin_sums_avx2(const KernelArgs& a)
{
    cos_sin_sums_scalar(a);
}

}  // namespace mqmed::simd::detail

#endif
