#include <doctest.h>

#include <cmath>

#include "mqmed/correlation.hpp"
#include "mqmed/errors.hpp"
#include "mqmed/oracle.hpp"

using namespace mqmed;

namespace {

Model weak_harmonic(double v)
{
    HarmonicBath b{{HarmonicMode{0.8, {0.0, 0.25}}, HarmonicMode{1.3, {0.0, 0.15}}}};
    return Model{SubsystemSpec{{"A", "B"}, {1.0, 0.0}, {{0, 1, v}}}, b, ThermalSpec{2.0, false}};
}

TruncationSpec levels(std::size_t n)
{
    TruncationSpec s;
    s.harmonic_levels = n;
    return s;
}

std::vector<double> grid(double stop, int count)
{
    std::vector<double> t;
    for (int k = 0; k < count; ++k) t.push_back(stop * k / (count - 1));
    return t;
}

}  // namespace

TEST_SUITE("oracle")
{
    TEST_CASE("a spin mode doubles the dimension")
    {
        const Model m{SubsystemSpec{{"p", "m"}, {1.0, 0.0}, {{0, 1, 0.1}}}, SpinBath{{SpinMode{1.0, 0.05}}}, ThermalSpec{}};
        const TruncatedSystem ts = build_truncated(m);
        CHECK(ts.dim == 4);
        CHECK(ts.local_dims == std::vector<std::size_t>{2});
        CHECK_FALSE(ts.fock[0]);
    }

    TEST_CASE("truncated ladder operators keep the canonical commutator below the top level")
    {
        const std::size_t n = 60;
        const Eigen::MatrixXcd x = position_operator(n, 1.7), p = momentum_operator(n, 1.7);
        const Eigen::MatrixXcd c = x * p - p * x;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            CHECK(std::abs(c(i, i) - cplx(0.0, 1.0)) < 1e-12);
        }
        Eigen::MatrixXcd off = c;
        off.diagonal().setZero();
        CHECK(off.cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("truncated oscillator is x^2 + p^2 form")
    {
        const std::size_t n = 30;
        const double w = 0.9, d = 0.7;
        const Eigen::MatrixXcd x = position_operator(n, w), p = momentum_operator(n, w);
        Eigen::MatrixXcd h = truncated_oscillator(n, w, d);
        Eigen::MatrixXcd ref = 0.5 * p * p + 0.5 * w * w * x * x - w * w * d * x +
                               0.5 * w * w * d * d * Eigen::MatrixXcd::Identity(n, n);
        // x^2 and p^2 differ from the exact operators only on the top level
        h.conservativeResize(n - 1, n - 1);
        ref.conservativeResize(n - 1, n - 1);
        CHECK((h - ref).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("Hamiltonian assembly is the sum of its parts")
    {
        const TruncatedSystem ts = build_truncated(weak_harmonic(0.05), levels(8));
        CHECK(ts.dim == 2 * 8 * 8);
        Eigen::MatrixXcd sum = Eigen::MatrixXcd(ts.H_sub);
        for (const auto& h : ts.h) sum += Eigen::MatrixXcd(h);
        CHECK((sum - ts.H).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ts.H - ts.H.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("uncoupled subsystem keeps its populations")
    {
        const TruncatedSystem ts = build_truncated(weak_harmonic(0.0), levels(14));
        const ExactResult r = exact_propagation(ts, 0, ThermalSpec{2.0, false}, grid(50.0, 11));
        for (Eigen::Index i = 0; i < r.P.rows(); ++i) {
            CHECK(std::abs(r.P(i, 0) - 1.0) < 1e-10);
            CHECK(std::abs(r.E(i, 0)) < 1e-10);
        }
    }

    TEST_CASE("total energy and trace are conserved")
    {
        const TruncatedSystem ts = build_truncated(weak_harmonic(0.08), levels(16));
        const ExactResult r = exact_propagation(ts, 0, ThermalSpec{2.0, false}, grid(200.0, 41));
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            CHECK(std::abs(r.total_energy[k] - r.total_energy[0]) < 1e-10);
            CHECK(std::abs(r.trace[k] - 1.0) < 1e-10);
            const auto i = static_cast<Eigen::Index>(k);
            CHECK(std::abs(r.P.row(i).sum() - 1.0) < 1e-10);
        }
    }

    TEST_CASE("hot baths on too few levels are refused")
    {
        const TruncatedSystem ts = build_truncated(weak_harmonic(0.05), levels(4));
        CHECK_THROWS_AS(ExactPropagator(ts, 0, ThermalSpec{0.2, false}), ModelError);
    }

    TEST_CASE("automatic level count reaches the tail target")
    {
        const HarmonicMode mode{0.8, {0.0, 0.25}};
        const ThermalSpec th{2.0, false};
        const std::size_t n = auto_harmonic_levels(mode, 2, th, 1e-10);
        CHECK(thermal_tail(mode, 2, n, th) <= 1e-10);
        CHECK(thermal_tail(mode, 2, n - 1, th) > 1e-10);
    }

    TEST_CASE("dimension cap")
    {
        TruncationSpec s = levels(40);
        s.dim_cap = 1000;
        CHECK_THROWS_AS(build_truncated(weak_harmonic(0.05), s), DimensionCapError);
    }

    TEST_CASE("oracle mode traces match the analytic harmonic trace")
    {
        HarmonicBath b{{HarmonicMode{1.1, {0.3, -0.5}}}};
        const Model m{SubsystemSpec{{"A", "B"}, {1.0, 0.0}, {{0, 1, 0.1}}}, b, ThermalSpec{1.5, false}};
        const TruncatedSystem ts = build_truncated(m, levels(60));
        const auto& mode = b.modes[0];
        for (double t : {0.0, 0.4, 1.7, 3.2}) {
            const cplx ref = ho_trace(mode, 0, 1, t, m.thermal);
            CHECK(std::abs(oracle_mode_trace(ts, 0, 0, 1, t, m.thermal) - ref) < 1e-8);
            const cplx wref = ho_weighted_trace(mode, 0, 1, t, m.thermal);
            CHECK(std::abs(oracle_mode_weighted_trace(ts, 0, 0, 1, t, m.thermal) - wref) < 1e-7);
        }
        // the generic machinery on the oracle's own matrices
        GenericMode g;
        g.v = ts.local_v[0];
        for (double t : {0.3, 2.0}) {
            const cplx a = oracle_mode_trace(ts, 0, 0, 1, t, m.thermal);
            const cplx c = generic_trace(g, 0, 1, t, m.thermal);
            CHECK(std::abs(a - c) < 1e-13);
        }
    }

    TEST_CASE("comparison of identical trajectories")
    {
        const Model m = weak_harmonic(0.05);
        const TruncatedSystem ts = build_truncated(m, levels(14));
        const ExactResult ex = exact_propagation(ts, 0, m.thermal, grid(20.0, 11));
        Trajectory tr;
        tr.state_labels = ex.state_labels;
        tr.mode_labels = ex.mode_labels;
        tr.times = ex.times;
        tr.P = ex.P;
        tr.E = ex.E;
        const ComparisonReport rep = compare_report(ex, tr, m);
        CHECK(rep.pass);
        for (const auto& q : rep.quantities) CHECK(q.max_abs == 0.0);
        CHECK(rep.regime_flags.empty());
    }

    TEST_CASE("strong subsystem coupling is flagged")
    {
        const Model m = weak_harmonic(0.5);
        const RegimeDiagnostics d = regime_diagnostics(m);
        CHECK(d.coupling_ratio == doctest::Approx(0.5));
        const TruncatedSystem ts = build_truncated(m, levels(14));
        const ExactResult ex = exact_propagation(ts, 0, m.thermal, grid(5.0, 6));
        Trajectory tr;
        tr.times = ex.times;
        tr.P = ex.P;
        tr.E = ex.E;
        tr.mode_labels = ex.mode_labels;
        const ComparisonReport rep = compare_report(ex, tr, m);
        REQUIRE(rep.regime_flags.size() == 1);
        CHECK(rep.regime_flags[0].find("perturbative") != std::string::npos);
    }

    TEST_CASE("Laplace slopes vanish without coupling")
    {
        const TruncatedSystem ts = build_truncated(weak_harmonic(0.0), levels(14));
        const ExactPropagator prop(ts, 0, ThermalSpec{2.0, false});
        for (double s : prop.laplace_slopes(0.1)) CHECK(std::abs(s) < 1e-12);
    }
}
