#include <doctest.h>

#include <cmath>
#include <random>

#include "mqmed/dynamics.hpp"
#include "mqmed/errors.hpp"

using namespace mqmed;

namespace {

Model bare_model(std::vector<double> energies, std::size_t n_modes)
{
    SubsystemSpec s;
    for (std::size_t a = 0; a < energies.size(); ++a) s.labels.push_back(std::string(1, static_cast<char>('A' + a)));
    s.energies = std::move(energies);
    HarmonicBath b;
    for (std::size_t j = 0; j < n_modes; ++j) b.modes.push_back(HarmonicMode{1.0 + 0.5 * static_cast<double>(j), {}});
    return Model{s, b, ThermalSpec{1.0, false}};
}

// Rates that obey the sum rule exactly: the released energy of every transfer is split
// across the modes with fixed fractions.
RateSet consistent_rates(const std::vector<double>& energies, const Eigen::MatrixXd& K, const std::vector<double>& fractions)
{
    RateSet r = empty_rate_set(bare_model(energies, fractions.size()));
    r.K = K;
    for (Eigen::Index a = 0; a < K.cols(); ++a)
        for (Eigen::Index b = 0; b < K.rows(); ++b) {
            if (a == b) continue;
            for (std::size_t j = 0; j < fractions.size(); ++j)
                r.Kdiss[j](b, a) = fractions[j] * (energies[static_cast<std::size_t>(a)] - energies[static_cast<std::size_t>(b)]) * K(b, a);
        }
    return r;
}

std::vector<double> grid(double stop, int count)
{
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(stop * k / (count - 1));
    return t;
}

Eigen::MatrixXd two_state_K(double down, double up)
{
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2, 2);
    K(1, 0) = down;  // A -> B
    K(0, 1) = up;
    return K;
}

}  // namespace

TEST_SUITE("dynamics")
{
    TEST_CASE("zero rates keep populations fixed")
    {
        const RateSet r = empty_rate_set(bare_model({1.0, 0.0}, 1));
        const Trajectory tr = propagate(r, Eigen::Vector2d(0.3, 0.7), grid(10.0, 11));
        for (Eigen::Index i = 0; i < tr.P.rows(); ++i) {
            CHECK(tr.P(i, 0) == doctest::Approx(0.3).epsilon(1e-15));
            CHECK(tr.E(i, 0) == 0.0);
        }
        CHECK(slowest_rate(r) == 0.0);
    }

    TEST_CASE("two-state relaxation is a single exponential")
    {
        const double kd = 0.3, ku = 0.1;
        const RateSet r = consistent_rates({1.0, 0.0}, two_state_K(kd, ku), {0.25, 0.75});
        const auto times = grid(30.0, 61);
        const Trajectory tr = propagate(r, Eigen::Vector2d(1.0, 0.0), times);
        const double pinf = ku / (kd + ku);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double expect = pinf + (1.0 - pinf) * std::exp(-(kd + ku) * times[i]);
            CHECK(std::abs(tr.P(static_cast<Eigen::Index>(i), 0) - expect) < 1e-12);
        }
        CHECK(slowest_rate(r) == doctest::Approx(kd + ku).epsilon(1e-12));
    }

    TEST_CASE("energy ledger closes and dissipation totals the released energy")
    {
        const double kd = 0.2, ku = 0.05;
        const double dE = 1.4;
        const RateSet r = consistent_rates({dE, 0.0}, two_state_K(kd, ku), {0.1, 0.6, 0.3});
        const double t_end = 10.0 / slowest_rate(r);
        Trajectory tr = propagate(r, Eigen::Vector2d(1.0, 0.0), grid(t_end, 201));
        CHECK(energy_ledger(tr, Eigen::Vector2d(dE, 0.0)) < 1e-8);
        const Eigen::Index last = tr.P.rows() - 1;
        const double total = tr.E.row(last).sum();
        const double expected = dE * (1.0 - tr.P(last, 0));
        CHECK(std::abs(total - expected) < 1e-6 * expected);
        // mode split follows the fractions
        CHECK(tr.E(last, 1) / total == doctest::Approx(0.6).epsilon(1e-10));
    }

    TEST_CASE("corrupted dissipation rates open the ledger")
    {
        RateSet r = consistent_rates({1.0, 0.0}, two_state_K(0.2, 0.05), {0.5, 0.5});
        Trajectory ok = propagate(r, Eigen::Vector2d(1.0, 0.0), grid(50.0, 51));
        const double base = energy_ledger(ok, Eigen::Vector2d(1.0, 0.0));
        r.Kdiss[0](1, 0) *= 1.1;
        Trajectory bad = propagate(r, Eigen::Vector2d(1.0, 0.0), grid(50.0, 51));
        const double worse = energy_ledger(bad, Eigen::Vector2d(1.0, 0.0));
        CHECK(base < 1e-10);
        CHECK(worse > 1e-2);
    }

    TEST_CASE("steady states")
    {
        const RateSet sym = consistent_rates({0.0, 0.0}, two_state_K(0.3, 0.3), {1.0});
        const Eigen::VectorXd ps = steady_state(sym);
        CHECK(ps(0) == doctest::Approx(0.5).epsilon(1e-14));

        // rates with Boltzmann ratios relax to the Boltzmann distribution
        const double beta = 1.5;
        const std::vector<double> e{0.9, 0.0, 0.4};
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
        const double base[3][3] = {{0, 0.2, 0.05}, {0.2, 0, 0.1}, {0.05, 0.1, 0}};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b) K(b, a) = base[a][b] * std::exp(-0.5 * beta * (e[b] - e[a]));
        const RateSet r = consistent_rates(e, K, {1.0});
        const Eigen::VectorXd p = steady_state(r);
        double z = 0.0;
        for (double x : e) z += std::exp(-beta * x);
        for (int a = 0; a < 3; ++a) CHECK(std::abs(p(a) - std::exp(-beta * e[a]) / z) < 1e-12);
    }

    TEST_CASE("three-state chain: closed form, numeric integration and steady state agree")
    {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
        K(1, 0) = 0.4;
        K(0, 1) = 0.1;
        K(2, 1) = 0.25;
        K(1, 2) = 0.02;
        const RateSet r = consistent_rates({1.0, 0.5, 0.0}, K, {0.3, 0.7});
        const auto times = grid(200.0, 101);
        PropagationOptions eig, num;
        eig.method = PropagationMethod::eigen;
        num.method = PropagationMethod::numeric;
        const Eigen::Vector3d p0(1.0, 0.0, 0.0);
        const Trajectory a = propagate(r, p0, times, eig);
        const Trajectory b = propagate(r, p0, times, num);
        CHECK(b.used_numeric);
        CHECK_FALSE(a.used_numeric);
        CHECK((a.P - b.P).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((a.E - b.E).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index i = 0; i < a.P.rows(); ++i) CHECK(std::abs(a.P.row(i).sum() - 1.0) < 1e-10);
        const Eigen::VectorXd ss = steady_state(r);
        CHECK((a.P.row(a.P.rows() - 1).transpose() - ss).cwiseAbs().maxCoeff() < 1e-8);
    }

    TEST_CASE("random rate matrices conserve population")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(4, 4);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    if (a != b) K(b, a) = u(rng);
            const RateSet r = consistent_rates({0.0, 0.3, 0.6, 0.9}, K, {1.0});
            const Trajectory tr = propagate(r, Eigen::Vector4d(0.25, 0.25, 0.25, 0.25), grid(20.0, 41));
            for (Eigen::Index i = 0; i < tr.P.rows(); ++i) {
                CHECK(std::abs(tr.P.row(i).sum() - 1.0) < 1e-10);
                CHECK(tr.P.row(i).minCoeff() > -1e-12);
            }
        }
    }

    TEST_CASE("reducible rate graphs have no unique steady state")
    {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
        K(1, 0) = 0.2;  // A -> B, and C is isolated
        const RateSet r = consistent_rates({1.0, 0.0, 0.5}, K, {1.0});
        CHECK_THROWS_AS(steady_state(r), ReducibleRateGraphError);
        const auto comps = rate_graph_components(r);
        CHECK(comps.size() == 3);
    }

    TEST_CASE("rate matrix layout")
    {
        const RateSet r = consistent_rates({1.0, 0.0}, two_state_K(0.3, 0.1), {1.0});
        const Eigen::MatrixXd M = rate_matrix(r);
        CHECK(M(0, 0) == doctest::Approx(-0.3));
        CHECK(M(1, 0) == doctest::Approx(0.3));
        CHECK(M.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);
        const Eigen::MatrixXd w = dissipation_weights(r);
        CHECK(w(0, 0) == doctest::Approx(0.3));
        CHECK(w(0, 1) == doctest::Approx(-0.1));
    }

    TEST_CASE("bad inputs")
    {
        const RateSet r = consistent_rates({1.0, 0.0}, two_state_K(0.3, 0.1), {1.0});
        CHECK_THROWS_AS(propagate(r, Eigen::Vector2d(0.6, 0.6), {0.0, 1.0}), ModelError);
        CHECK_THROWS_AS(propagate(r, Eigen::Vector2d(1.0, 0.0), {1.0, 0.5}), ModelError);
        RateSet neg = r;
        neg.K(1, 0) = -0.1;
        CHECK_THROWS_AS(propagate(neg, Eigen::Vector2d(1.0, 0.0), {0.0, 1.0}), ModelError);
    }
}
