#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qle/floquet.hpp"
#include "qle/quadrature.hpp"
#include "test_support.hpp"

using namespace qle;
using namespace qle::floquet;
using Catch::Approx;
using qle::testing::single_oscillator;

namespace {

model::EngineConfig reference_config(double drive_amp = 0.15) {
    auto cfg = single_oscillator(1.3, drive_amp, 0.4, 1.0,
                                 model::OccupationModel::thermal(1.0));
    qle::testing::quick_numerics(cfg, 6, 6);
    return cfg;
}

} // namespace

TEST_CASE("Static kernel weight gamma(0)") {
    auto cfg = reference_config();
    const Eigen::MatrixXd g0 = gamma_static(cfg);
    REQUIRE(g0(0, 0) == Approx(0.4 * 1.0).epsilon(1e-14));
}

TEST_CASE("Dissipation kernel matches frozen high-precision values") {
    auto cfg = single_oscillator(1.0, 0.0, 1.0, 1.0,
                                 model::OccupationModel::thermal(1.0));
    // real s = 1
    const auto g1 = dissipation_kernel_laplace(cfg, Complex(1.0, 0.0));
    REQUIRE(g1(0, 0).real() == Approx(0.62144962423581335764).epsilon(1e-10));
    REQUIRE(std::abs(g1(0, 0).imag()) < 1e-12);
    // complex s = 0.5 + 2i, pole neighborhood inside the domain
    const auto g2 = dissipation_kernel_laplace(cfg, Complex(0.5, 2.0));
    REQUIRE(g2(0, 0).real() == Approx(0.2657176737469548296).epsilon(1e-10));
    REQUIRE(g2(0, 0).imag() == Approx(-0.411410294550954401).epsilon(1e-10));
}

TEST_CASE("Dissipation kernel vanishes for large real s") {
    auto cfg = reference_config();
    const auto g = dissipation_kernel_laplace(cfg, Complex(1e6, 0.0));
    REQUIRE(g.norm() < 1e-5);
}

TEST_CASE("Dissipation kernel agrees with a dense composite reference rule") {
    auto cfg = single_oscillator(1.0, 0.0, 1.0, 1.0,
                                 model::OccupationModel::thermal(1.0));
    const Complex s(1e-4, 0.9);
    const auto impl = dissipation_kernel_laplace(cfg, s)(0, 0);
    // independent route: fixed composite Gauss-Legendre at ~10x the density
    const auto breaks = quad::refined_breakpoints(
        0.0, 45.0, 400, {{0.9, 0.45}}, 28);
    const auto grid = quad::grid_from_breakpoints(breaks, 16);
    Complex ref(0.0, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.nodes[i];
        ref += grid.weights[i] * std::exp(-w) * s / (s * s + w * w);
    }
    REQUIRE(std::abs(impl - ref) <= 1e-8 * std::abs(ref));
}

TEST_CASE("Near-axis kernel approaches the delta plus principal value form") {
    auto cfg = single_oscillator(1.0, 0.0, 1.0, 1.0,
                                 model::OccupationModel::thermal(1.0));
    // frozen sigma -> 0+ limits at w0 = 1: Re -> (pi/2) e^{-1}, Im -> PV value
    const auto g = dissipation_kernel_laplace(cfg, Complex(1e-7, 1.0));
    REQUIRE(g(0, 0).real() == Approx(0.57786367489546086).epsilon(1e-5));
    REQUIRE(g(0, 0).imag() == Approx(-0.64676112272394).epsilon(1e-5));
}

TEST_CASE("Kernel is consistent under sigma halving") {
    auto cfg = reference_config();
    const double w = 1.7;
    const auto a = dissipation_kernel_laplace(cfg, Complex(2e-6, w))(0, 0);
    const auto b = dissipation_kernel_laplace(cfg, Complex(1e-6, w))(0, 0);
    REQUIRE(std::abs(a - b) < 1e-6 * std::abs(b));
}

TEST_CASE("Static Green inverse in the decoupled limit") {
    auto cfg = single_oscillator(1.3, 0.0, 0.0, 1.0,
                                 model::OccupationModel::thermal(1.0));
    const double w0sq = cfg.network.v0(0, 0);
    const auto ginv = static_green_inverse(cfg, Complex(0.0, 0.7));
    REQUIRE(ginv(0, 0).real() == Approx(w0sq - 0.49).epsilon(1e-12));
    REQUIRE(std::abs(ginv(0, 0).imag()) < 1e-14);
    // zero at resonance
    const auto at_res =
        static_green_inverse(cfg, Complex(0.0, std::sqrt(w0sq)));
    REQUIRE(std::abs(at_res(0, 0)) < 1e-10);
}

TEST_CASE("Static Green inverse is symmetric") {
    model::EngineConfig cfg;
    cfg.network.mass = (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 2.0).finished();
    cfg.network.v0 = (Eigen::MatrixXd(2, 2) << 2.0, 0.3, 0.3, 3.0).finished();
    cfg.network.drive_freq = 1.0;
    model::ReservoirSpec res;
    res.label = "bath";
    res.density.coupling = 0.2;
    res.density.cutoff = 1.5;
    res.density.projector = (Eigen::VectorXd(2) << 1.0, -0.5).finished();
    res.occupation = model::OccupationModel::thermal(1.0);
    cfg.reservoirs.push_back(res);
    for (Complex s : {Complex(1e-6, 0.8), Complex(0.3, 2.0), Complex(2.0, 0.0)}) {
        const auto g = static_green_inverse(cfg, s);
        REQUIRE((g - g.transpose()).norm() < 1e-12 * g.norm());
    }
}

TEST_CASE("Undriven Floquet solve collapses to the static Green function") {
    auto cfg = reference_config(0.0);
    FloquetSolver solver(cfg);
    const auto p = solver.solve_fixed(0.9, 4);
    const Complex s(cfg.sigma(), 0.9);
    const auto ginv = static_green_inverse(cfg, s);
    const Eigen::MatrixXcd g = ginv.inverse();
    REQUIRE((p.coeff(0) - g).norm() < 1e-12 * g.norm());
    for (int n = 1; n <= 4; ++n) {
        REQUIRE(p.coeff(n).norm() == 0.0);
        REQUIRE(p.coeff(-n).norm() == 0.0);
    }
}

TEST_CASE("Weak drive matches first-order perturbation theory") {
    const double w = 0.9;
    double prev_dev = 0.0;
    for (int step = 0; step < 2; ++step) {
        const double amp = step == 0 ? 0.05 : 0.025;
        auto cfg = reference_config(amp);
        FloquetSolver solver(cfg);
        const auto p = solver.solve_fixed(w, 6);
        const Complex s(cfg.sigma(), w);
        const double wd = cfg.network.drive_freq;
        for (int sign : {+1, -1}) {
            const Eigen::MatrixXcd g_shift =
                static_green_inverse(cfg, s + Complex(0.0, sign * wd)).inverse();
            const Eigen::MatrixXcd g0 = static_green_inverse(cfg, s).inverse();
            const Eigen::MatrixXcd first = -g_shift * amp * g0;
            const double dev = (p.coeff(sign) - first).norm() / first.norm();
            if (step == 0)
                prev_dev = std::max(prev_dev, dev);
            else
                REQUIRE(dev < 0.6 * prev_dev); // second-order residual shrinks
            REQUIRE(dev < 0.05);
        }
    }
}

TEST_CASE("Conjugation symmetry across independently solved signs") {
    auto cfg = reference_config();
    FloquetSolver solver(cfg);
    for (double w : {0.45, 1.3, 2.6}) {
        const auto plus = solver.solve_fixed(w, 6);
        const auto minus = solver.solve_fixed(-w, 6);
        for (int n = -6; n <= 6; ++n) {
            const Eigen::MatrixXcd conj_m = minus.coeff(-n).conjugate();
            REQUIRE((plus.coeff(n) - conj_m).norm() <=
                    1e-10 * std::max(plus.coeff(n).norm(), 1e-300));
        }
    }
}

TEST_CASE("Translation symmetry across independently solved frequencies") {
    auto cfg = reference_config();
    cfg.numerics.n_max = 10;
    FloquetSolver solver(cfg);
    const double wd = cfg.network.drive_freq;
    const double w = 0.7;
    const auto base = solver.solve_fixed(w, 10);
    for (int n : {1, 2, -1}) {
        const auto shifted = solver.solve_fixed(w + n * wd, 10);
        const Eigen::MatrixXcd expect = shifted.coeff(-n).transpose();
        const double rel = (base.coeff(n) - expect).norm() /
                           std::max(base.coeff(n).norm(), 1e-300);
        REQUIRE(rel < 1e-8);
    }
}

TEST_CASE("Stability check behaves monotonically in the drive strength") {
    auto cfg = reference_config(0.0);
    const auto rep0 = check_stability(cfg);
    REQUIRE(rep0.pass);
    REQUIRE(rep0.drive_norm == 0.0);
    REQUIRE(rep0.margin() > 0.0);

    auto strong = reference_config(10.0 * rep0.dissipation_floor);
    const auto rep1 = check_stability(strong);
    REQUIRE_FALSE(rep1.pass);

    // extra dissipation strengthens the floor
    auto weak = reference_config(0.1);
    auto more_damped = weak;
    more_damped.reservoirs[0].density.coupling *= 1.5;
    more_damped.network.v0 = weak.network.v0 +
                             (0.5 * 0.4 * 1.0) * Eigen::MatrixXd::Identity(1, 1);
    const auto rep_a = check_stability(weak);
    const auto rep_b = check_stability(more_damped);
    REQUIRE(rep_b.dissipation_floor > rep_a.dissipation_floor);
}

TEST_CASE("Solver escalates the truncation until the tail converges") {
    auto cfg = reference_config(0.3);
    cfg.numerics.n_max = 2;
    cfg.numerics.tail_tol = 1e-10;
    FloquetSolver solver(cfg);
    const auto p = solver.solve(0.8);
    REQUIRE(p.converged);
    REQUIRE(p.n_max > 2);
    REQUIRE(p.tail_norm <= 1e-10);
}

TEST_CASE("Singular block system raises a solver error with its condition") {
    // undamped resonant oscillator: g^{-1}(i nu) = 0 exactly at sigma -> 0
    auto cfg = single_oscillator(1.0, 0.0, 0.0, 1.0,
                                 model::OccupationModel::thermal(1.0));
    cfg.numerics.sigma = 1e-300;
    FloquetSolver solver(cfg);
    try {
        (void)solver.solve_fixed(1.0, 1);
        FAIL("expected SolverError");
    } catch (const SolverError& err) {
        REQUIRE(err.rcond() <= 1e-14);
    }
}
