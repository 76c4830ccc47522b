#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qle/pchip.hpp"
#include "qle/quadrature.hpp"

using namespace qle;
using Catch::Approx;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    for (int n : {2, 4, 8, 12, 16}) {
        const auto& rule = quad::gauss_legendre(n);
        // exact for degree 2n-1
        const int deg = 2 * n - 1;
        double val = 0.0;
        for (int i = 0; i < n; ++i) val += rule.w[i] * std::pow(rule.x[i], deg - 1);
        // integral of x^(deg-1) over [-1,1]; deg-1 even
        const double exact = 2.0 / deg;
        REQUIRE(val == Approx(exact).epsilon(1e-13));
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) wsum += rule.w[i];
        REQUIRE(wsum == Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("Composite panel grid integrates a smooth function") {
    const auto grid = quad::grid_from_breakpoints({0.0, 0.5, 1.0, 2.0}, 12);
    double val = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        val += grid.weights[i] * std::exp(-grid.nodes[i]);
    REQUIRE(val == Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("Refined breakpoints are sorted, unique, and symmetric about centers") {
    const auto breaks =
        quad::refined_breakpoints(0.0, 10.0, 8, {{3.0, 0.5}, {7.0, 0.25}}, 6);
    REQUIRE(std::is_sorted(breaks.begin(), breaks.end()));
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        REQUIRE(breaks[i] < breaks[i + 1]);
    // symmetric companions of the first refinement site exist
    REQUIRE(std::count_if(breaks.begin(), breaks.end(), [](double b) {
                return std::abs(b - 2.5) < 1e-12 || std::abs(b - 3.5) < 1e-12;
            }) == 2);
}

TEST_CASE("Adaptive Gauss-Kronrod handles a sharp Lorentzian") {
    const double eps = 1e-6;
    const auto f = [&](double x) {
        return std::complex<double>(eps / (eps * eps + (x - 0.3) * (x - 0.3)), 0.0);
    };
    // seed panels around the peak the way the kernel quadrature does
    const auto breaks = quad::refined_breakpoints(0.0, 1.0, 4, {{0.3, 0.1}}, 20);
    const auto res = quad::integrate_adaptive(f, breaks, 0.0, 1e-10);
    const double exact = std::atan(0.7 / eps) + std::atan(0.3 / eps);
    REQUIRE(res.value.real() == Approx(exact).epsilon(1e-9));
}

TEST_CASE("Adaptive quadrature reports non-convergence with a residual") {
    // integrable but endpoint-singular; starved iteration budget
    const auto f = [](double x) {
        return std::complex<double>(1.0 / std::sqrt(x), 0.0);
    };
    REQUIRE_THROWS_AS(
        quad::integrate_adaptive(f, {1e-300, 1.0}, 0.0, 1e-14, 4),
        QuadratureError);
}

TEST_CASE("Monotone cubic interpolation stays within data and errors out of range") {
    Pchip p({1.0, 2.0, 3.0, 4.0}, {10.0, 6.0, 5.5, 1.0});
    for (double x = 1.0; x <= 4.0; x += 0.01) {
        REQUIRE(p(x) <= 10.0 + 1e-12);
        REQUIRE(p(x) >= 1.0 - 1e-12);
    }
    // decreasing data stays decreasing
    double prev = p(1.0);
    for (double x = 1.01; x <= 4.0; x += 0.01) {
        const double v = p(x);
        REQUIRE(v <= prev + 1e-12);
        prev = v;
    }
    REQUIRE(p(2.0) == Approx(6.0));
    REQUIRE_THROWS_AS(p(0.99), std::out_of_range);
    REQUIRE_THROWS_AS(p(4.01), std::out_of_range);
}
