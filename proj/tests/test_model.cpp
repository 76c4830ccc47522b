#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qle/model.hpp"
#include "qle/quadrature.hpp"

using namespace qle;
using namespace qle::model;
using Catch::Approx;

namespace {

// Independent root bracketing for coth(w/Omega) = f; the library solves the
// same equation through a different route.
double bisect_omega(double w, double f) {
    auto g = [&](double om) { return 1.0 / std::tanh(w / om) - f; };
    double lo = 1e-8, hi = 1e8;
    REQUIRE(g(lo) < 0.0);
    REQUIRE(g(hi) > 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("Thermal occupation at w = ln 2 equals one") {
    const auto occ = OccupationModel::thermal(1.0);
    REQUIRE(occ.occupation(std::log(2.0)) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Zero squeezing reduces to the thermal occupation") {
    const auto sq = OccupationModel::squeezed_thermal(0.7, 0.0);
    const auto th = OccupationModel::thermal(0.7);
    for (double w : {0.1, 0.5, 1.0, 3.0, 10.0})
        REQUIRE(sq.occupation(w) == Approx(th.occupation(w)).epsilon(1e-14));
}

TEST_CASE("Squeezed occupation matches the frozen high-precision value") {
    // (cosh(1) coth(1/2) - 1) / 2 evaluated with 40-digit arithmetic
    const auto sq = OccupationModel::squeezed_thermal(1.0, 0.5);
    REQUIRE(sq.occupation(1.0) == Approx(1.1695773036912271528).epsilon(1e-14));
}

TEST_CASE("Occupation domain errors") {
    const auto th = OccupationModel::thermal(1.0);
    REQUIRE_THROWS_AS(th.occupation(0.0), std::domain_error);
    REQUIRE_THROWS_AS(th.occupation(-1.0), std::domain_error);
    const auto tab = OccupationModel::tabulated({1.0, 2.0, 3.0}, {0.5, 0.3, 0.1});
    REQUIRE_THROWS_AS(tab.occupation(0.5), std::out_of_range);
    REQUIRE_THROWS_AS(tab.occupation(3.5), std::out_of_range);
    REQUIRE(tab.occupation(2.0) == Approx(0.3));
}

TEST_CASE("Occupations are strictly decreasing for thermal kinds") {
    const auto th = OccupationModel::thermal(2.0);
    const auto sq = OccupationModel::squeezed_thermal(2.0, 0.8);
    double w_prev = 0.05;
    for (double w = 0.1; w < 20.0; w += 0.1) {
        REQUIRE(th.occupation(w) < th.occupation(w_prev));
        REQUIRE(sq.occupation(w) < sq.occupation(w_prev));
        w_prev = w;
    }
    REQUIRE(th.strictly_decreasing());
    REQUIRE(sq.strictly_decreasing());
    const auto inverted =
        OccupationModel::tabulated({1.0, 2.0, 3.0}, {0.2, 0.6, 0.1});
    REQUIRE_FALSE(inverted.strictly_decreasing());
}

TEST_CASE("Characteristic frequency of a thermal reservoir is 2T exactly") {
    const auto th = OccupationModel::thermal(3.0);
    for (double w : {0.2, 1.0, 5.0}) REQUIRE(th.characteristic_frequency(w) == 6.0);
}

TEST_CASE("Characteristic frequency solves its defining equation") {
    const auto sq = OccupationModel::squeezed_thermal(1.0, 0.3);
    for (double w : {0.3, 1.0, 2.0, 4.0}) {
        const double om = sq.characteristic_frequency(w);
        const double residual = 1.0 / std::tanh(w / om) - sq.symmetrized(w);
        REQUIRE(std::abs(residual) < 1e-10 * sq.symmetrized(w));
    }
}

TEST_CASE("Characteristic frequency matches frozen value and bisection oracle") {
    const auto sq = OccupationModel::squeezed_thermal(1.0, 0.3);
    const double om = sq.characteristic_frequency(2.0);
    REQUIRE(om == Approx(2.6235595034963050319).epsilon(1e-13));
    REQUIRE(om == Approx(bisect_omega(2.0, sq.symmetrized(2.0))).epsilon(1e-10));
}

TEST_CASE("High-temperature squeezed limit approaches 2 T cosh(2r)") {
    const double t_h = 1e4, r = 0.6;
    const auto sq = OccupationModel::squeezed_thermal(t_h, r);
    const double om = sq.characteristic_frequency(0.5);
    REQUIRE(om == Approx(2.0 * t_h * std::cosh(2.0 * r)).epsilon(1e-6));
}

TEST_CASE("Thermal Omega ratios are frequency independent") {
    const auto a = OccupationModel::thermal(1.7);
    const auto b = OccupationModel::thermal(0.4);
    const double r1 =
        a.characteristic_frequency(0.3) / b.characteristic_frequency(2.1);
    const double r2 =
        a.characteristic_frequency(5.0) / b.characteristic_frequency(0.02);
    REQUIRE(r1 == r2);
    REQUIRE(r1 == Approx(1.7 / 0.4));
}

TEST_CASE("Degenerate occupation is signaled") {
    const auto tab = OccupationModel::tabulated({1.0, 2.0}, {0.0, 0.0});
    REQUIRE_THROWS_AS(tab.characteristic_frequency(1.5), DegenerateOccupationError);
}

TEST_CASE("Spectral density values") {
    SpectralDensity d;
    d.coupling = 1.0;
    d.cutoff = 1.0;
    d.projector = Eigen::Vector2d(1.0, 0.0);

    REQUIRE(d.value(0.0).norm() == 0.0);
    const Eigen::MatrixXd at1 = d.value(1.0);
    REQUIRE(at1(0, 0) == Approx(std::exp(-1.0)).epsilon(1e-14));
    REQUIRE(at1(0, 1) == 0.0);
    REQUIRE(at1(1, 1) == 0.0);
    REQUIRE_THROWS_AS(d.value(-0.1), std::domain_error);
    REQUIRE(at1.isApprox(at1.transpose()));
}

TEST_CASE("Trace of the spectral density integrates to coupling * cutoff^2") {
    SpectralDensity d;
    d.coupling = 0.8;
    d.cutoff = 1.7;
    d.projector = Eigen::Vector2d(0.6, -0.5);
    // int_0^inf J(w) dw = coupling * cutoff^2, times ||u||^2 for the trace
    const auto grid = quad::grid_from_breakpoints(
        quad::refined_breakpoints(0.0, 40.0 * d.cutoff, 160, {}, 0), 16);
    double tr = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        tr += grid.weights[i] * d.value(grid.nodes[i]).trace();
    const double exact =
        d.coupling * d.cutoff * d.cutoff * d.projector.squaredNorm();
    REQUIRE(tr == Approx(exact).epsilon(1e-10));
}

TEST_CASE("Spectral density is positive semidefinite on a grid") {
    SpectralDensity d;
    d.coupling = 0.3;
    d.cutoff = 2.0;
    d.projector = Eigen::Vector3d(0.5, -1.0, 0.25);
    for (double w = 0.0; w < 15.0; w += 0.37) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.value(w));
        REQUIRE(eig.eigenvalues().minCoeff() >= -1e-15);
    }
}

TEST_CASE("Network validation enforces the Fourier symmetry") {
    NetworkModel net;
    net.mass = Eigen::MatrixXd::Identity(1, 1);
    net.v0 = Eigen::MatrixXd::Identity(1, 1);
    net.drive_freq = 1.0;
    net.v_fourier[1] = 0.1 * Eigen::MatrixXd::Identity(1, 1);
    net.v_fourier[-1] = 0.2 * Eigen::MatrixXd::Identity(1, 1);
    REQUIRE_THROWS_AS(net.validate(), std::invalid_argument);
    net.v_fourier[-1] = net.v_fourier[1];
    REQUIRE_NOTHROW(net.validate());

    // V(t) is even and real
    REQUIRE(net.potential(0.3).isApprox(net.potential(-0.3)));
}

TEST_CASE("Engine config validation") {
    EngineConfig cfg;
    cfg.network.mass = Eigen::MatrixXd::Identity(1, 1);
    cfg.network.v0 = Eigen::MatrixXd::Identity(1, 1);
    cfg.network.drive_freq = 1.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument); // no reservoirs

    ReservoirSpec res{"bath",
                      {SpectralProfile::OhmicExponential, 0.1, 1.0,
                       Eigen::VectorXd::Ones(1)},
                      OccupationModel::thermal(1.0)};
    cfg.reservoirs = {res, res};
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument); // duplicate label
    cfg.reservoirs[1].label = "bath2";
    REQUIRE_NOTHROW(cfg.validate());

    cfg.reservoirs[1].density.projector = Eigen::VectorXd::Ones(2);
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument); // projector length
}
