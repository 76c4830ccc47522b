// floquet.hpp — Laplace-domain Floquet coefficients of the dressed Green's
// function: dissipation kernel, block system assembly and solve, stability.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qle/common.hpp"
#include "qle/model.hpp"
#include "qle/quadrature.hpp"

namespace qle::floquet {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using model::EngineConfig;

// --------------------------- Dissipation kernel -----------------------------

// gamma(0) = sum_a int dw I_a(w)/w; closed form for the Ohmic profile.
inline MatrixXd gamma_static(const EngineConfig& cfg) {
    const int n = cfg.network.size();
    MatrixXd g = MatrixXd::Zero(n, n);
    for (const auto& r : cfg.reservoirs)
        g += r.density.static_weight() *
             (r.density.projector * r.density.projector.transpose());
    return g;
}

namespace detail {

// Scalar Laplace kernel int_0^inf dw exp(-w/cutoff) * s / (s^2 + w^2) for one
// Ohmic-exponential reservoir (coupling factored out). The integrand has a
// near-pole at w = |Im s| of width Re s; the seed breakpoints place symmetric
// panels around it so the principal-value-like cancellation is explicit.
inline Complex kernel_scalar(double cutoff, Complex s, double rel_tol) {
    const double w0 = std::abs(s.imag());
    const double sr = std::max(s.real(), 1e-300);
    const double tail = 45.0 * cutoff;
    const double upper = w0 + tail;

    std::vector<quad::RefineSite> sites;
    int levels = 0;
    if (w0 > 0.0) {
        const double width = std::max(0.5 * std::min(w0, cutoff), 32.0 * sr);
        sites.push_back({w0, width});
        levels = static_cast<int>(std::ceil(std::log2(width / sr))) + 1;
        levels = std::clamp(levels, 1, 60);
    }
    const auto breaks = quad::refined_breakpoints(0.0, upper, 12, sites, levels);
    const auto f = [&](double w) { return std::exp(-w / cutoff) * s / (s * s + w * w); };
    return quad::integrate_adaptive(f, breaks, 0.0, rel_tol).value;
}

} // namespace detail

// gamma_tilde(s) = int_0^inf dw [sum_a I_a(w)/w] s/(s^2+w^2); symmetric.
inline MatrixXcd dissipation_kernel_laplace(const EngineConfig& cfg, Complex s) {
    if (!(s.real() > 0.0) && s.imag() == 0.0)
        throw std::domain_error("dissipation kernel: need Re s > 0 or Im s != 0");
    const int n = cfg.network.size();
    MatrixXcd g = MatrixXcd::Zero(n, n);
    // reservoirs sharing a profile reuse the same scalar integral
    std::map<std::pair<double, double>, Complex> cache;
    for (const auto& r : cfg.reservoirs) {
        if (r.density.coupling == 0.0) continue;
        const std::pair<double, double> key{r.density.coupling, r.density.cutoff};
        auto it = cache.find(key);
        if (it == cache.end()) {
            const Complex val = r.density.coupling *
                                detail::kernel_scalar(r.density.cutoff, s,
                                                      cfg.numerics.quad_tol);
            it = cache.emplace(key, val).first;
        }
        g += it->second *
             (r.density.projector * r.density.projector.transpose()).cast<Complex>();
    }
    return g;
}

// g^{-1}(s) = M s^2 + (V_0 - gamma(0)) + s gamma_tilde(s)
inline MatrixXcd static_green_inverse(const EngineConfig& cfg, Complex s) {
    const MatrixXd omega_r2 = cfg.network.v0 - gamma_static(cfg);
    return cfg.network.mass.cast<Complex>() * (s * s) +
           omega_r2.cast<Complex>() +
           s * dissipation_kernel_laplace(cfg, s);
}

// ------------------------------- Stability ----------------------------------

// Block diagonal dominance of the Floquet matrix at s = 0: compares the
// dissipation floor min_n ||g(i n w_d)||^{-1} with the total drive strength
// sum_{m != 0} ||V_m|| in spectral norm.
struct StabilityReport {
    double dissipation_floor = 0.0;
    double drive_norm = 0.0;
    bool pass = false;
    double margin() const { return dissipation_floor - drive_norm; }
};

inline StabilityReport check_stability(const EngineConfig& cfg) {
    StabilityReport rep;
    const double sigma = cfg.sigma();
    const double wd = cfg.network.drive_freq;
    double floor = std::numeric_limits<double>::infinity();
    for (int n = -cfg.numerics.n_max; n <= cfg.numerics.n_max; ++n) {
        const MatrixXcd ginv =
            static_green_inverse(cfg, Complex(sigma, n * wd));
        // ||g||^{-1} equals the smallest singular value of g^{-1}
        Eigen::JacobiSVD<MatrixXcd> svd(ginv);
        floor = std::min(floor, svd.singularValues().minCoeff());
    }
    double drive = 0.0;
    for (const auto& [m, vm] : cfg.network.v_fourier) {
        (void)m;
        Eigen::JacobiSVD<MatrixXd> svd(vm);
        drive += svd.singularValues().maxCoeff();
    }
    rep.dissipation_floor = floor;
    rep.drive_norm = drive;
    rep.pass = floor > drive;
    return rep;
}

// ----------------------------- Floquet solve --------------------------------

// Coefficients A_n(i w) for n in [-n_max, n_max] at one frequency, solved at
// s = sigma + i w.
struct FloquetPoint {
    double omega = 0.0;
    double sigma = 0.0;
    int n_max = 0;
    std::vector<MatrixXcd> coeffs; // index n + n_max
    double tail_norm = 0.0;        // max ||A_{+-n_max}|| / ||A_0||
    bool converged = false;
    double rcond = 0.0;

    const MatrixXcd& coeff(int n) const {
        if (std::abs(n) > n_max)
            throw std::out_of_range("FloquetPoint: harmonic index beyond truncation");
        return coeffs[static_cast<std::size_t>(n + n_max)];
    }
};

class FloquetSolver {
public:
    explicit FloquetSolver(EngineConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
    }

    const EngineConfig& config() const { return cfg_; }

    // One banded block solve at fixed truncation; no escalation.
    FloquetPoint solve_fixed(double omega, int n_max) const {
        const int nb = 2 * n_max + 1;
        const int nos = cfg_.network.size();
        const double sigma = cfg_.sigma();
        const double wd = cfg_.network.drive_freq;
        const Complex s(sigma, omega);

        MatrixXcd block = MatrixXcd::Zero(nb * nos, nb * nos);
        for (int m = -n_max; m <= n_max; ++m) {
            const int row = (m + n_max) * nos;
            block.block(row, row, nos, nos) =
                static_green_inverse(cfg_, s + Complex(0.0, m * wd));
            for (int n = -n_max; n <= n_max; ++n) {
                if (n == m) continue;
                if (const MatrixXd* vm = cfg_.network.fourier(m - n))
                    block.block(row, (n + n_max) * nos, nos, nos) =
                        vm->cast<Complex>();
            }
        }
        MatrixXcd rhs = MatrixXcd::Zero(nb * nos, nos);
        rhs.block(n_max * nos, 0, nos, nos) = MatrixXcd::Identity(nos, nos);

        Eigen::PartialPivLU<MatrixXcd> lu(block);
        // pivot-ratio condition proxy; Eigen's rcond() misbehaves on
        // subnormal pivots
        const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
        const double rcond = pivots.minCoeff() / std::max(pivots.maxCoeff(), 1e-300);
        if (!(rcond > 1e-14))
            throw SolverError("floquet solve: block system is numerically singular",
                              rcond);
        const MatrixXcd sol = lu.solve(rhs);
        if (!sol.allFinite())
            throw SolverError("floquet solve: non-finite solution", rcond);

        FloquetPoint p;
        p.omega = omega;
        p.sigma = sigma;
        p.n_max = n_max;
        p.rcond = rcond;
        p.coeffs.reserve(nb);
        for (int n = -n_max; n <= n_max; ++n)
            p.coeffs.push_back(sol.block((n + n_max) * nos, 0, nos, nos));
        const double a0 = std::max(p.coeff(0).norm(), 1e-300);
        p.tail_norm =
            std::max(p.coeff(n_max).norm(), p.coeff(-n_max).norm()) / a0;
        p.converged = p.tail_norm <= cfg_.numerics.tail_tol;
        return p;
    }

    // Solve with truncation escalation: double n_max until the tail norm meets
    // the tolerance or the hard cap is reached. An unconverged point is still
    // returned, flagged.
    FloquetPoint solve(double omega) const {
        int n = std::max(cfg_.numerics.n_max, cfg_.k_max());
        for (;;) {
            FloquetPoint p = solve_fixed(omega, n);
            if (p.converged || n >= cfg_.numerics.n_max_cap) return p;
            n = std::min(2 * n, cfg_.numerics.n_max_cap);
        }
    }

private:
    EngineConfig cfg_;
};

// Solved points over a frequency grid.
struct FloquetSolution {
    std::vector<double> omega_grid;
    std::vector<FloquetPoint> points;

    bool all_converged() const {
        for (const auto& p : points)
            if (!p.converged) return false;
        return true;
    }
    double max_tail() const {
        double t = 0.0;
        for (const auto& p : points) t = std::max(t, p.tail_norm);
        return t;
    }
};

inline FloquetSolution solve_on_grid(const FloquetSolver& solver,
                                     const std::vector<double>& grid,
                                     int threads = 1) {
    FloquetSolution sol;
    sol.omega_grid = grid;
    sol.points.resize(grid.size());
    parallel_for(grid.size(), threads,
                 [&](std::size_t i) { sol.points[i] = solver.solve(grid[i]); });
    return sol;
}

} // namespace qle::floquet
