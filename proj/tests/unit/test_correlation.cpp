#include <doctest.h>

#include <cmath>
#include <random>

#include "mqmed/correlation.hpp"
#include "mqmed/errors.hpp"
#include "oracles.hpp"

using namespace mqmed;
namespace to = testing_oracles;

namespace {

double rel(cplx a, cplx b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

HarmonicMode displaced(double omega, double d_a, double d_b)
{
    return HarmonicMode{omega, {d_a, d_b}};
}

// Displaced oscillator pair written as a generic mode on `levels` Fock states of v_A.
GenericMode fock_generic(double omega, double dd, std::size_t levels)
{
    const auto n = static_cast<Eigen::Index>(levels);
    Eigen::MatrixXcd va = Eigen::MatrixXcd::Zero(n, n), y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) va(k, k) = omega * (static_cast<double>(k) + 0.5);
    for (Eigen::Index k = 1; k < n; ++k) y(k - 1, k) = y(k, k - 1) = std::sqrt(static_cast<double>(k) / (2.0 * omega));
    const Eigen::MatrixXcd vb = va - omega * omega * dd * y + Eigen::MatrixXcd::Identity(n, n) * (0.5 * omega * omega * dd * dd);
    return GenericMode{{va, vb}};
}

}  // namespace

TEST_SUITE("correlation")
{
    TEST_CASE("harmonic trace basics")
    {
        const ThermalSpec th{1.3, false};
        const auto m = displaced(0.8, 0.2, 1.7);
        CHECK(ho_trace(m, 0, 1, 0.0, th) == cplx(1.0, 0.0));
        const auto same = displaced(0.8, 0.9, 0.9);
        for (double t : {0.5, 3.0, 40.0}) CHECK(ho_trace(same, 0, 1, t, th) == cplx(1.0, 0.0));
    }

    TEST_CASE("zero-temperature harmonic trace at half period")
    {
        const auto m = displaced(1.0, 0.0, std::sqrt(2.0));
        const cplx v = ho_trace(m, 0, 1, M_PI, ThermalSpec::at_zero_temperature());
        const auto ref = to::fock_ho_trace(1.0, 0.0, std::sqrt(2.0), 60.0, M_PI, 60, 200);
        CHECK(std::abs(v - cplx(std::exp(-2.0), 0.0)) < 1e-14);
        CHECK(rel(v, ref.plain) < 1e-10);
    }

    TEST_CASE("harmonic trace vs Fock brute force")
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> uw(0.3, 2.0), us(0.05, 1.5), ubw(1.0, 5.0), ut(0.0, 1.0);
        for (int k = 0; k < 12; ++k) {
            const double w = uw(rng), S = us(rng), beta = ubw(rng) / w, t = 12.0 * ut(rng) / w;
            const double dd = std::sqrt(2.0 * S / w);
            const double da = 0.3 * ut(rng);
            const auto m = displaced(w, da, da + dd);
            const ThermalSpec th{beta, false};
            const auto ref = to::fock_ho_trace(w, da, da + dd, beta, t);
            CHECK(rel(ho_trace(m, 0, 1, t, th), ref.plain) < 1e-8);
            CHECK(rel(ho_weighted_trace(m, 0, 1, t, th), ref.weighted) < 1e-8);
        }
    }

    TEST_CASE("harmonic weighted trace")
    {
        const ThermalSpec th{0.9, false};
        const auto flat = displaced(1.1, 0.4, 0.4);
        CHECK(ho_weighted_trace(flat, 0, 1, 2.0, th) == cplx(0.0, 0.0));
        const auto m = displaced(1.1, 0.0, 0.8);
        const cplx w0 = ho_weighted_trace(m, 0, 1, 0.0, th);
        CHECK(w0.real() == doctest::Approx(0.5 * 1.21 * 0.64).epsilon(1e-15));
        CHECK(w0.imag() == 0.0);
    }

    TEST_CASE("weighted traces are i d/dt of plain traces")
    {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double h = 1e-6;
        for (int k = 0; k < 20; ++k) {
            const ThermalSpec th{0.3 + 3.0 * u(rng), false};
            const double t = 0.2 + 8.0 * u(rng);
            const auto m = displaced(0.2 + 2.0 * u(rng), u(rng) - 0.5, 2.0 * u(rng) - 1.0);
            const cplx fd = cplx(0.0, 1.0) * (ho_trace(m, 0, 1, t + h, th) - ho_trace(m, 0, 1, t - h, th)) / (2.0 * h);
            CHECK(rel(ho_weighted_trace(m, 0, 1, t, th), fd) < 1e-6);

            const SpinMode s{0.2 + 2.0 * u(rng), 0.8 * u(rng)};
            for (auto dir : {SpinDirection::plus_to_minus, SpinDirection::minus_to_plus}) {
                const cplx sfd = cplx(0.0, 1.0) * (spin_trace(s, dir, t + h, th) - spin_trace(s, dir, t - h, th)) / (2.0 * h);
                CHECK(rel(spin_weighted_trace(s, dir, t, th), sfd) < 1e-6);
            }
        }
    }

    TEST_CASE("spin traces vs exact two-level propagation")
    {
        const ThermalSpec th{2.0, false};
        const SpinMode s{1.0, 0.3};
        const auto ref = to::spin_2x2_trace(1.0, 0.3, 2.0, 1.0, true);
        CHECK(std::abs(spin_trace(s, SpinDirection::plus_to_minus, 1.0, th) - ref.plain) < 1e-12);

        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 50; ++k) {
            const SpinMode m{0.05 + 2.0 * u(rng), 1.5 * (u(rng) - 0.5)};
            const ThermalSpec t2{0.1 + 4.0 * u(rng), false};
            const double t = 20.0 * u(rng);
            for (bool ptm : {true, false}) {
                const auto dir = ptm ? SpinDirection::plus_to_minus : SpinDirection::minus_to_plus;
                const auto o = to::spin_2x2_trace(m.omega, m.gamma, t2.beta, t, ptm);
                CHECK(std::abs(spin_trace(m, dir, t, t2) - o.plain) < 1e-12);
                CHECK(std::abs(spin_weighted_trace(m, dir, t, t2) - o.weighted) < 1e-12);
            }
        }
    }

    TEST_CASE("spin trace limits")
    {
        const ThermalSpec th{1.0, false};
        const SpinMode free{0.7, 0.0};
        CHECK(std::abs(spin_trace(free, SpinDirection::plus_to_minus, 3.0, th) - 1.0) < 1e-15);
        CHECK(spin_weighted_trace(free, SpinDirection::plus_to_minus, 3.0, th) == cplx(0.0, 0.0));
        const SpinMode s{0.7, 0.4};
        CHECK(std::abs(spin_trace(s, SpinDirection::minus_to_plus, 0.0, th) - 1.0) < 1e-15);
        const double wt = s.dressed_frequency(), s2 = std::pow(std::sin(2.0 * s.mixing_angle()), 2);
        const cplx w0 = spin_weighted_trace(s, SpinDirection::plus_to_minus, 0.0, th);
        CHECK(w0.real() == doctest::Approx(wt * s2 * std::tanh(0.5 * wt)).epsilon(1e-14));
        CHECK(w0.imag() == 0.0);
    }

    TEST_CASE("generic traces")
    {
        const ThermalSpec th{0.8, false};
        SUBCASE("identical operators")
        {
            Eigen::MatrixXcd v(3, 3);
            v << 1.0, cplx(0.2, 0.1), 0.0, cplx(0.2, -0.1), 0.5, 0.3, 0.0, 0.3, -0.4;
            const GenericMode g{{v, v}};
            for (double t : {0.0, 1.5, 9.0}) {
                CHECK(std::abs(generic_trace(g, 0, 1, t, th) - 1.0) < 1e-13);
                CHECK(std::abs(generic_weighted_trace(g, 0, 1, t, th)) < 1e-13);
            }
        }
        SUBCASE("random Hermitian pair vs dense propagation")
        {
            std::mt19937_64 rng(17);
            std::normal_distribution<double> n(0.0, 1.0);
            for (int k = 0; k < 5; ++k) {
                Eigen::MatrixXcd a(4, 4), b(4, 4);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) {
                        a(i, j) = cplx(n(rng), n(rng));
                        b(i, j) = cplx(n(rng), n(rng));
                    }
                a = 0.5 * (a + a.adjoint()).eval();
                b = 0.5 * (b + b.adjoint()).eval();
                const GenericMode g{{a, b}};
                const GenericPairTrace pair(a, b, th);
                for (double t : {0.0, 0.37, 2.9, 11.0}) {
                    const auto o = to::dense_trace(a, b, th.beta, t);
                    CHECK(std::abs(pair.plain(t) - o.plain) < 1e-12);
                    CHECK(std::abs(pair.weighted(t) - o.weighted) < 1e-11);
                    CHECK(std::abs(generic_trace(g, 0, 1, t, th) - o.plain) < 1e-12);
                    const double h = 1e-6;
                    const cplx fd = cplx(0.0, 1.0) * (pair.plain(t + h) - pair.plain(t - h)) / (2.0 * h);
                    CHECK(std::abs(pair.weighted(t) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
                }
            }
        }
        SUBCASE("truncated oscillator reproduces the harmonic formula")
        {
            const double w = 0.9, dd = 1.0;
            const ThermalSpec t2{2.0 / w, false};
            const auto g = fock_generic(w, dd, 40);
            const GenericPairTrace pair(g.v[0], g.v[1], t2);
            const auto m = displaced(w, 0.0, dd);
            for (int k = 0; k <= 40; ++k) {
                const double t = 20.0 / w * k / 40.0;
                CHECK(std::abs(pair.plain(t) - ho_trace(m, 0, 1, t, t2)) < 1e-8);
            }
        }
        SUBCASE("dimension cap")
        {
            const auto g = fock_generic(1.0, 0.5, 20);
            CHECK_THROWS_AS(GenericPairTrace(g.v[0], g.v[1], th, 10), DimensionCapError);
        }
    }

    TEST_CASE("plain traces are bounded by one")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 200; ++k) {
            const ThermalSpec th{0.1 + 5.0 * u(rng), false};
            const double t = 50.0 * u(rng);
            CHECK(std::abs(ho_trace(displaced(0.1 + 3.0 * u(rng), u(rng), 3.0 * u(rng)), 0, 1, t, th)) <= 1.0 + 1e-12);
            CHECK(std::abs(spin_trace(SpinMode{3.0 * u(rng), 2.0 * u(rng)}, SpinDirection::plus_to_minus, t, th)) <=
                  1.0 + 1e-12);
        }
        const auto g = fock_generic(1.0, 1.2, 12);
        const GenericPairTrace pair(g.v[0], g.v[1], ThermalSpec{0.5, false});
        for (int k = 0; k < 100; ++k) CHECK(std::abs(pair.plain(0.37 * k)) <= 1.0 + 1e-12);
    }

    TEST_CASE("full trace assembly")
    {
        SubsystemSpec s{{"A", "B"}, {0.3, 0.3}, {{0, 1, 0.1}}};
        const ThermalSpec th{1.0, false};
        SUBCASE("no modes")
        {
            Model m{s, HarmonicBath{}, th};
            CHECK(assemble_full_trace(m, 0, 1, 4.0) == cplx(1.0, 0.0));
            m.subsystem.energies = {0.0, 1.5};
            const cplx v = assemble_full_trace(m, 0, 1, 2.0);
            CHECK(std::abs(std::abs(v) - 1.0) < 1e-15);
            CHECK(std::abs(v - std::exp(cplx(0.0, -3.0))) < 1e-15);
        }
        SUBCASE("product of mode traces")
        {
            s.energies = {1.0, 0.2};
            HarmonicBath b{{displaced(0.5, 0.0, 1.0), displaced(1.2, 0.3, -0.4), displaced(2.0, 0.0, 0.25)}};
            const Model m{s, b, th};
            const TraceEngine engine(m);
            for (double t : {0.0, 0.9, 7.5}) {
                cplx ref = std::exp(cplx(0.0, -t * (0.2 - 1.0)));
                for (const auto& mode : b.modes) ref *= ho_trace(mode, 0, 1, t, th);
                CHECK(std::abs(assemble_full_trace(m, 0, 1, t) - ref) < 1e-14);
                CHECK(std::abs(engine.full_trace(0, 1, t) - ref) < 1e-14);
                const cplx w1 = engine.full_trace_weighted(1, 0, 1, t);
                const cplx ref1 = ref / ho_trace(b.modes[1], 0, 1, t, th) * ho_weighted_trace(b.modes[1], 0, 1, t, th);
                CHECK(std::abs(w1 - ref1) < 1e-14);
            }
        }
    }

    TEST_CASE("line broadening and the harmonic trace")
    {
        const double w = 0.7, dd = 1.3;
        const ThermalSpec th{1.4, false};
        const std::vector<HarmonicMode> modes{displaced(w, 0.0, dd)};
        const LineBroadening lb(modes, 2, th);
        const double lambda = 0.5 * w * w * dd * dd;
        CHECK(lb.reorganization(1, 1) == doctest::Approx(lambda).epsilon(1e-15));
        CHECK(lb.g(1, 1, 0.0) == cplx(0.0, 0.0));
        CHECK(std::abs(lb.g_dot(1, 1, 0.0)) < 1e-15);
        for (double t : {0.3, 2.0, 11.0, 60.0}) {
            // ho_trace = exp(-g_BB(t) - i t lambda) for a mode displaced only on B
            const cplx via_g = std::exp(-lb.g(1, 1, t) - cplx(0.0, lambda * t));
            CHECK(std::abs(via_g - ho_trace(modes[0], 0, 1, t, th)) < 1e-12);
            CHECK(lb.g(1, 1, t).real() >= 0.0);
            const double h = 1e-6;
            const cplx fd = (lb.g(1, 1, t + h) - lb.g(1, 1, t - h)) / (2.0 * h);
            CHECK(std::abs(lb.g_dot(1, 1, t) - fd) < 1e-7);
        }
        CHECK(std::abs(line_broadening(HarmonicBath{modes}, 2, 1, 1, 2.0, th) - lb.g(1, 1, 2.0)) < 1e-15);
    }

    TEST_CASE("continuous line broadening matches a fine discretization")
    {
        SpectralDensityTable t;
        for (int k = 0; k <= 400; ++k) {
            const double w = 0.02 + 0.02 * k;
            t.omega.push_back(w);
            t.values.push_back(0.2 * w * std::exp(-w));
        }
        const ThermalSpec th{1.0, false};
        const auto modes = discretize_spectral_density(t, 4000, 1);
        const LineBroadening lb(modes, 1, th);
        for (double time : {0.5, 2.0}) {
            const cplx g = line_broadening(t, time, th);
            CHECK(std::abs(g - lb.g(0, 0, time)) < 1e-3 * std::abs(g));
        }
    }

    TEST_CASE("optical time profiles")
    {
        SubsystemSpec s{{"A", "B"}, {0.8, 0.0}, {{0, 1, 0.1}}};
        const ThermalSpec th{1.0, false};
        const Model m{s, LocalHarmonicBath{{LocalHarmonicMode{0, 0.6, 1.1}, LocalHarmonicMode{0, 1.4, 0.5}}}, th};
        const auto p0 = spectral_profiles(m, 0, 0.0);
        CHECK(std::abs(p0.fluorescence - 1.0) < 1e-15);
        CHECK(std::abs(p0.absorption - 1.0) < 1e-15);
        const LineBroadening lb(harmonic_modes(m.bath, 2), 2, th);
        for (double t : {0.4, 3.0, 17.0}) {
            const auto p = spectral_profiles(m, 0, t);
            const double env = std::exp(-lb.g(0, 0, t).real());
            CHECK(std::abs(std::abs(p.fluorescence) - env) < 1e-13);
            CHECK(std::abs(std::abs(p.absorption) - env) < 1e-13);
            // B owns no mode: both profiles are the bare phase
            const auto pb = spectral_profiles(m, 1, t);
            CHECK(std::abs(pb.fluorescence - 1.0) < 1e-15);
            CHECK(std::abs(pb.absorption - 1.0) < 1e-15);
        }
        CHECK_THROWS_AS(spectral_profiles(Model{s, HarmonicBath{}, th}, 0, 1.0), UnsupportedBathError);
    }

    TEST_CASE("spin bath profiles")
    {
        const ThermalSpec th{1.5, false};
        const SpinBathProfile none(SpinBath{{SpinMode{1.0, 0.0}, SpinMode{2.0, 0.0}}}, th);
        CHECK(none.total_lambda() == 0.0);
        CHECK(none.g(3.0) == cplx(0.0, 0.0));
        const SpinBathProfile p(SpinBath{{SpinMode{1.0, 0.1}, SpinMode{2.0, 0.05}}}, th);
        CHECK(p.g(0.0) == cplx(0.0, 0.0));
        CHECK(p.lambda()[0] == doctest::Approx(0.01 * std::tanh(0.75)).epsilon(1e-14));
        const SpinBathProfile cold(SpinBath{{SpinMode{2.0, 0.1}}}, ThermalSpec::at_zero_temperature());
        CHECK(cold.lambda()[0] == doctest::Approx(0.01 / 2.0).epsilon(1e-15));
        const SpinBathProfile zero(SpinBath{{SpinMode{0.0, 0.1}}}, th);
        CHECK(zero.used_zero_frequency_limit());
        CHECK(zero.lambda()[0] == doctest::Approx(0.01 * 1.5 / 2.0).epsilon(1e-15));
    }
}
