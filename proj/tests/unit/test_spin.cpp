#include <doctest.h>

#include <cmath>

#include "mqmed/errors.hpp"
#include "mqmed/rates.hpp"

using namespace mqmed;

namespace {

Model spin_model(double ratio, double beta = 1.0)
{
    SpinBath b;
    for (double w : {0.6, 0.9, 1.3, 1.7, 2.2}) b.modes.push_back(SpinMode{w, ratio * w});
    return Model{SubsystemSpec{{"plus", "minus"}, {1.0, 0.0}, {{0, 1, 0.05}}}, b, ThermalSpec{beta, false}};
}

QuadratureSettings damped()
{
    QuadratureSettings q;
    q.rel_tol = 1e-11;
    q.abs_tol = 1e-16;
    q.tail_eps = 1e-12;
    q.damping_eta = 0.05;
    return q;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

}  // namespace

TEST_SUITE("spin")
{
    TEST_CASE("weak-coupling rates approach the exact spin rates")
    {
        const Model m = spin_model(0.01);
        const RateSet exact = spin_rates_exact(m, damped());
        const RateSet weak = spin_rates_weak(m, damped());
        for (auto [a, b] : {std::pair<Eigen::Index, Eigen::Index>{0, 1}, {1, 0}}) {
            CHECK(rel(weak.K(b, a), exact.K(b, a)) < 1e-2);
            for (std::size_t j = 0; j < 5; ++j) CHECK(rel(weak.Kdiss[j](b, a), exact.Kdiss[j](b, a)) < 1e-2);
        }
    }

    TEST_CASE("surrogate harmonic bath reproduces weak spin baths")
    {
        const Model m = spin_model(0.01, 0.7);
        const RateSet exact = spin_rates_exact(m, damped());
        const Model h{m.subsystem, surrogate_harmonic_bath(std::get<SpinBath>(m.bath), m.thermal), m.thermal};
        const RateSet sur = compute_rate_set(h, damped());
        for (auto [a, b] : {std::pair<Eigen::Index, Eigen::Index>{0, 1}, {1, 0}}) {
            CHECK(rel(sur.K(b, a), exact.K(b, a)) < 1e-2);
            for (std::size_t j = 0; j < 5; ++j) CHECK(rel(sur.Kdiss[j](b, a), exact.Kdiss[j](b, a)) < 1e-2);
        }
    }

    TEST_CASE("surrogate displacement follows the tanh-scaled density")
    {
        const SpinBath b{{SpinMode{1.5, 0.2}}};
        const ThermalSpec th{0.8, false};
        const HarmonicBath h = surrogate_harmonic_bath(b, th);
        const auto& mode = h.modes.front();
        CHECK(mode.d(0) == doctest::Approx(-mode.d(1)));
        // J_AA(omega) = omega^3 d^2 / 2
        CHECK(0.5 * std::pow(1.5, 3) * mode.d(0) * mode.d(0) == doctest::Approx(0.04 * std::tanh(0.6)).epsilon(1e-14));
        CHECK_THROWS_AS(surrogate_harmonic_bath(SpinBath{{SpinMode{0.0, 0.1}}}, th), ModelError);
    }

    TEST_CASE("weak-coupling guard")
    {
        const Model m = spin_model(0.3);
        CHECK_THROWS_AS(spin_rates_weak(m, damped()), ModelError);
        WeakCouplingOptions o;
        o.override_guard = true;
        const RateSet r = spin_rates_weak(m, damped(), o);
        CHECK(r.K(1, 0) > 0.0);
        WeakCouplingOptions loose;
        loose.max_ratio = 0.5;
        CHECK_NOTHROW(spin_rates_weak(m, damped(), loose));
    }

    TEST_CASE("spin rates need a two-state spin model")
    {
        const Model h{SubsystemSpec{{"A", "B"}, {1.0, 0.0}, {{0, 1, 0.1}}}, HarmonicBath{}, ThermalSpec{}};
        CHECK_THROWS_AS(spin_rates_exact(h, damped()), UnsupportedBathError);
        CHECK_THROWS_AS(spin_rates_weak(h, damped()), UnsupportedBathError);
    }
}
