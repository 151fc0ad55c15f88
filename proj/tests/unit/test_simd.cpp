#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mqmed/simd/cos_sin_sum.hpp"

using namespace mqmed::simd;

namespace {

PhaseTable random_table(std::size_t n, std::size_t channels, std::uint64_t seed, double fmax)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> f(-fmax, fmax), w(-1.0, 1.0);
    PhaseTable t(channels);
    std::vector<double> cw(channels), sw(channels);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t c = 0; c < channels; ++c) {
            cw[c] = w(rng);
            sw[c] = w(rng);
        }
        t.add(f(rng), cw, sw);
    }
    return t;
}

// Plain double loop, independent of both kernels.
std::vector<PhaseSum> reference(const PhaseTable& t, double time)
{
    std::vector<PhaseSum> out(t.channels());
    for (std::size_t c = 0; c < t.channels(); ++c) {
        long double cs = 0, ss = 0;
        for (std::size_t k = 0; k < t.padded_size(); ++k) {
            cs += static_cast<long double>(t.cos_weights(c)[k]) * std::cos(static_cast<long double>(t.freq()[k]) * time);
            ss += static_cast<long double>(t.sin_weights(c)[k]) * std::sin(static_cast<long double>(t.freq()[k]) * time);
        }
        out[c] = {static_cast<double>(cs), static_cast<double>(ss)};
    }
    return out;
}

}  // namespace

TEST_SUITE("simd")
{
    TEST_CASE("scalar kernel matches a long-double loop")
    {
        const auto t = random_table(37, 3, 11, 5.0);
        std::vector<PhaseSum> got(3);
        for (double time : {0.0, 0.3, 7.1, 123.4, 5e4}) {
            t.evaluate(Isa::scalar, time, got);
            const auto ref = reference(t, time);
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(got[c].cos_sum == doctest::Approx(ref[c].cos_sum).epsilon(1e-12).scale(37));
                CHECK(got[c].sin_sum == doctest::Approx(ref[c].sin_sum).epsilon(1e-12).scale(37));
            }
        }
    }

    TEST_CASE("avx2 kernel matches scalar kernel")
    {
        if (!isa_supported(Isa::avx2)) {
            MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
            return;
        }
        for (std::size_t n : {1u, 3u, 4u, 5u, 64u, 1001u}) {
            for (std::size_t ch : {1u, 2u, 8u}) {
                const auto t = random_table(n, ch, 100 + n + ch, 30.0);
                std::vector<PhaseSum> a(ch), b(ch);
                for (double time : {0.0, 1e-3, 0.77, 19.0, 2.5e3, 1e6}) {
                    t.evaluate(Isa::scalar, time, a);
                    t.evaluate(Isa::avx2, time, b);
                    for (std::size_t c = 0; c < ch; ++c) {
                        CHECK(std::abs(a[c].cos_sum - b[c].cos_sum) <= 1e-13 * static_cast<double>(n));
                        CHECK(std::abs(a[c].sin_sum - b[c].sin_sum) <= 1e-13 * static_cast<double>(n));
                    }
                }
            }
        }
    }

    TEST_CASE("padding never changes the sums")
    {
        PhaseTable t(1);
        t.add(1.3, 0.5, 0.25);
        CHECK(t.size() == 1);
        CHECK(t.padded_size() % kLaneWidth == 0);
        const PhaseSum s = t.evaluate(2.0);
        CHECK(s.cos_sum == doctest::Approx(0.5 * std::cos(2.6)).epsilon(1e-15));
        CHECK(s.sin_sum == doctest::Approx(0.25 * std::sin(2.6)).epsilon(1e-15));
    }

    TEST_CASE("dispatch can be forced and restored")
    {
        const Isa before = active_isa();
        set_active_isa(Isa::scalar);
        CHECK(active_isa() == Isa::scalar);
        set_active_isa(before);
        CHECK(active_isa() == before);
        CHECK(isa_name(Isa::scalar) == "scalar");
    }
}
