// oracle.hpp — brute-force validator: exact Gaussian covariance evolution of
// the network coupled to finitely-discretized baths, with per-bath energy
// tracking and stationary current fits. No Floquet machinery involved.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qle/common.hpp"
#include "qle/floquet.hpp"
#include "qle/model.hpp"

namespace qle::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using model::EngineConfig;

// ------------------------------- Parameters ---------------------------------

struct OracleParams {
    int n_modes = 300;          // modes per bath
    double span_min = 0.0;      // 0 -> cutoff / 100
    double span_max = 0.0;      // 0 -> 6 * cutoff
    double dt = 0.0;            // 0 -> 0.05 * 2 pi / w_top
    int fit_periods = 50;       // stationary fit window, in drive periods
    double transient_frac = 0.3; // fraction of the total run discarded
    double squeeze_angle = 0.0; // squeezing angle of nonthermal initial states
    int samples_per_period = 4;
    bool step_check = true;     // probe one period at dt and dt/2
    double step_tol = 1e-6;
};

// ---------------------------- Discretized baths ------------------------------

// Equally spaced modes with couplings c_j = u sqrt(J(w_j) w_j dw), so that
// sum_j c_j c_j^T / w_j approximates I(w) dw in the dense limit.
struct DiscretizedBath {
    std::string label;
    std::vector<double> freq;
    VectorXd coupling_scalar; // s_j = sqrt(J(w_j) w_j dw); coupling col j = u s_j
    VectorXd projector;
    double d_omega = 0.0;
    double recurrence_horizon = 0.0; // 2 pi / d_omega
    bool covers_band = true;         // span covers the drive-resonant band
};

inline constexpr double kNoBand = std::numeric_limits<double>::quiet_NaN();

inline DiscretizedBath build_bath(const model::ReservoirSpec& spec, int n_modes,
                                  double w_min, double w_max,
                                  double band_lo = kNoBand,
                                  double band_hi = kNoBand) {
    if (n_modes < 2)
        throw std::invalid_argument("build_bath: need at least two modes");
    if (!(0.0 <= w_min && w_min < w_max))
        throw std::invalid_argument("build_bath: invalid span");
    DiscretizedBath bath;
    bath.label = spec.label;
    bath.projector = spec.density.projector;
    bath.d_omega = (w_max - w_min) / n_modes;
    bath.recurrence_horizon = 2.0 * pi / bath.d_omega;
    bath.freq.resize(static_cast<std::size_t>(n_modes));
    bath.coupling_scalar.resize(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        const double w = w_min + (j + 0.5) * bath.d_omega; // midpoint sampling
        bath.freq[static_cast<std::size_t>(j)] = w;
        bath.coupling_scalar(j) =
            std::sqrt(spec.density.profile_value(w) * w * bath.d_omega);
    }
    if (std::isfinite(band_lo) && std::isfinite(band_hi))
        bath.covers_band = (w_min <= band_lo && band_hi <= w_max);
    return bath;
}

// ------------------------------ Assembled system -----------------------------

// Phase-space ordering: z = (X, q_1.., q_B..; P, p_1.., p_B..).
class GaussianSystem {
public:
    GaussianSystem(EngineConfig cfg, const OracleParams& params)
        : cfg_(std::move(cfg)) {
        cfg_.validate();
        const int n = cfg_.network.size();
        mass_inv_ = cfg_.network.mass.inverse();

        // drive-resonant band from the renormalized static modes
        const MatrixXd vr = cfg_.network.v0 - floquet::gamma_static(cfg_);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(vr, cfg_.network.mass);
        double nu_min = std::numeric_limits<double>::infinity(), nu_max = 0.0;
        for (int i = 0; i < eig.eigenvalues().size(); ++i)
            if (eig.eigenvalues()(i) > 0.0) {
                const double nu = std::sqrt(eig.eigenvalues()(i));
                nu_min = std::min(nu_min, nu);
                nu_max = std::max(nu_max, nu);
            }
        const double wd = cfg_.network.drive_freq;
        const double band_lo = std::max(0.0, nu_min - wd);
        const double band_hi = nu_max + wd;

        int offset = n;
        for (const auto& r : cfg_.reservoirs) {
            const double lo =
                params.span_min > 0.0 ? params.span_min : r.density.cutoff / 100.0;
            const double hi =
                params.span_max > 0.0 ? params.span_max : 6.0 * r.density.cutoff;
            baths_.push_back(
                build_bath(r, params.n_modes, lo, hi, band_lo, band_hi));
            offsets_.push_back(offset);
            offset += params.n_modes;
        }
        dim_ = offset;
        w2_.resize(dim_ - n);
        int idx = 0;
        for (const auto& b : baths_)
            for (double w : b.freq) w2_(idx++) = w * w;
    }

    const EngineConfig& config() const { return cfg_; }
    int dim() const { return dim_; }
    int n_baths() const { return static_cast<int>(baths_.size()); }
    const DiscretizedBath& bath(int b) const {
        return baths_[static_cast<std::size_t>(b)];
    }
    int bath_offset(int b) const { return offsets_[static_cast<std::size_t>(b)]; }

    double top_frequency() const {
        double w = 0.0;
        for (const auto& b : baths_) w = std::max(w, b.freq.back());
        return w;
    }
    double recommended_dt() const { return 0.05 * 2.0 * pi / top_frequency(); }
    double recurrence_horizon() const {
        double h = std::numeric_limits<double>::infinity();
        for (const auto& b : baths_) h = std::min(h, b.recurrence_horizon);
        return h;
    }

    // out = A(t) m for a 2D x 2D phase-space matrix m (columns are vectors).
    void apply_generator(double t, const MatrixXd& m, MatrixXd& out) const {
        const int D = dim_;
        const int n = cfg_.network.size();
        out.resize(2 * D, m.cols());
        // position rows: T^{-1} * momentum rows
        out.topRows(D) = m.bottomRows(D);
        out.topRows(n) = mass_inv_ * m.middleRows(D, n);
        // momentum rows: -K(t) * position rows
        const MatrixXd vt = cfg_.network.potential(t);
        out.middleRows(D, n).noalias() = -(vt * m.topRows(n));
        for (int b = 0; b < n_baths(); ++b) {
            const auto& bath = baths_[static_cast<std::size_t>(b)];
            const int nb = static_cast<int>(bath.freq.size());
            const int off = offsets_[static_cast<std::size_t>(b)];
            // coupling C_b = u s^T is rank one
            const Eigen::RowVectorXd sq =
                bath.coupling_scalar.transpose() * m.middleRows(off, nb);
            out.middleRows(D, n).noalias() -= bath.projector * sq;
            const Eigen::RowVectorXd ux = bath.projector.transpose() * m.topRows(n);
            out.middleRows(D + off, nb).noalias() = -(bath.coupling_scalar * ux);
            out.middleRows(D + off, nb).noalias() -=
                w2_.segment(off - n, nb).asDiagonal() * m.middleRows(off, nb);
        }
    }

    // out = A(t) sigma + sigma A(t)^T for symmetric sigma
    void covariance_derivative(double t, const MatrixXd& sigma, MatrixXd& out,
                               MatrixXd& scratch) const {
        apply_generator(t, sigma, scratch);
        out = scratch + scratch.transpose();
    }

    struct EnergyBreakdown {
        std::vector<double> bath;
        double system = 0.0;
        double interaction = 0.0;
        double total = 0.0;
    };

    EnergyBreakdown energies(double t, const MatrixXd& sigma) const {
        const int D = dim_;
        const int n = cfg_.network.size();
        EnergyBreakdown e;
        e.system = 0.5 * (mass_inv_ * sigma.block(D, D, n, n)).trace() +
                   0.5 * (cfg_.network.potential(t) * sigma.block(0, 0, n, n)).trace();
        e.bath.resize(static_cast<std::size_t>(n_baths()));
        for (int b = 0; b < n_baths(); ++b) {
            const auto& bath = baths_[static_cast<std::size_t>(b)];
            const int nb = static_cast<int>(bath.freq.size());
            const int off = offsets_[static_cast<std::size_t>(b)];
            double eb = 0.0;
            for (int j = 0; j < nb; ++j)
                eb += 0.5 * (sigma(D + off + j, D + off + j) +
                             w2_(off - n + j) * sigma(off + j, off + j));
            e.bath[static_cast<std::size_t>(b)] = eb;
            // <X^T C q> couples system positions to bath positions
            const VectorXd uxq =
                sigma.block(0, off, n, nb) * bath.coupling_scalar;
            e.interaction += bath.projector.dot(uxq);
        }
        e.total = e.system + e.interaction;
        for (double eb : e.bath) e.total += eb;
        return e;
    }

private:
    EngineConfig cfg_;
    std::vector<DiscretizedBath> baths_;
    std::vector<int> offsets_;
    MatrixXd mass_inv_;
    VectorXd w2_;
    int dim_ = 0;
};

// ------------------------------ Initial state --------------------------------

struct CovarianceState {
    double t = 0.0;
    MatrixXd sigma; // symmetric, dimension 2D
};

// Thermal / squeezed-thermal / tabulated initial covariance per bath mode, and
// the ground state of the renormalized static Hamiltonian for the network.
inline CovarianceState initial_covariance(const GaussianSystem& sys,
                                          double squeeze_angle) {
    const EngineConfig& cfg = sys.config();
    const int D = sys.dim();
    const int n = cfg.network.size();
    CovarianceState state;
    state.t = 0.0;
    state.sigma = MatrixXd::Zero(2 * D, 2 * D);

    // network ground state of (M, V_0 - gamma(0))
    const MatrixXd vr = cfg.network.v0 - floquet::gamma_static(cfg);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(vr, cfg.network.mass);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw std::domain_error(
            "initial covariance: renormalized static potential not positive definite");
    const MatrixXd phi = eig.eigenvectors(); // M-orthonormal columns
    MatrixXd sxx = MatrixXd::Zero(n, n), spp = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double nu = std::sqrt(eig.eigenvalues()(i));
        sxx += phi.col(i) * phi.col(i).transpose() / (2.0 * nu);
        // momentum block uses the M-weighted dual vectors
        const VectorXd mphi = cfg.network.mass * phi.col(i);
        spp += mphi * mphi.transpose() * (nu / 2.0);
    }
    state.sigma.block(0, 0, n, n) = sxx;
    state.sigma.block(D, D, n, n) = spp;

    for (int b = 0; b < sys.n_baths(); ++b) {
        const auto& bath = sys.bath(b);
        const auto& occ = cfg.reservoirs[static_cast<std::size_t>(b)].occupation;
        const int off = sys.bath_offset(b);
        double r = 0.0, angle = 0.0;
        const bool squeezed =
            occ.kind() == model::OccupationModel::Kind::SqueezedThermal;
        if (squeezed) {
            r = occ.squeezing();
            angle = squeeze_angle;
        }
        for (std::size_t j = 0; j < bath.freq.size(); ++j) {
            const double w = bath.freq[j];
            double n_mode;
            switch (occ.kind()) {
                case model::OccupationModel::Kind::Thermal:
                case model::OccupationModel::Kind::SqueezedThermal:
                    n_mode = 1.0 / std::expm1(w / occ.temperature());
                    break;
                default:
                    n_mode = occ.occupation(w);
            }
            if (!(n_mode >= 0.0))
                throw std::domain_error("initial covariance: negative occupation");
            const double v = n_mode + 0.5;
            // squeezed variances in dimensionless quadratures, rotated
            const double c = std::cos(angle), s = std::sin(angle);
            const double em = std::exp(-2.0 * r), ep = std::exp(2.0 * r);
            const double sq_xx = v * (c * c * em + s * s * ep);
            const double sq_pp = v * (s * s * em + c * c * ep);
            const double sq_xp = v * c * s * (em - ep);
            const int i = off + static_cast<int>(j);
            state.sigma(i, i) = sq_xx / w;
            state.sigma(D + i, D + i) = sq_pp * w;
            state.sigma(i, D + i) = sq_xp;
            state.sigma(D + i, i) = sq_xp;
        }
    }
    return state;
}

// ----------------------------- Time integration ------------------------------

namespace detail {

struct Rk4Workspace {
    MatrixXd k1, k2, k3, k4, tmp, scratch;
};

inline void rk4_step(const GaussianSystem& sys, double t, double dt,
                     MatrixXd& sigma, Rk4Workspace& ws) {
    sys.covariance_derivative(t, sigma, ws.k1, ws.scratch);
    ws.tmp = sigma + (0.5 * dt) * ws.k1;
    sys.covariance_derivative(t + 0.5 * dt, ws.tmp, ws.k2, ws.scratch);
    ws.tmp = sigma + (0.5 * dt) * ws.k2;
    sys.covariance_derivative(t + 0.5 * dt, ws.tmp, ws.k3, ws.scratch);
    ws.tmp = sigma + dt * ws.k3;
    sys.covariance_derivative(t + dt, ws.tmp, ws.k4, ws.scratch);
    sigma += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

} // namespace detail

struct EnergySample {
    double t = 0.0;
    std::vector<double> bath;
    double system = 0.0;
    double interaction = 0.0;
    double total = 0.0;
};

struct Trajectory {
    std::vector<EnergySample> samples;
    CovarianceState final_state;
    double recurrence_horizon = 0.0;
    double dt = 0.0;
};

// Fixed-step RK4 on the covariance; samples energies every `sample_interval`.
// The step is shrunk to divide the sample interval exactly.
inline Trajectory evolve(const GaussianSystem& sys, CovarianceState state,
                         double t_final, double dt, double sample_interval) {
    if (!(dt > 0.0) || !(sample_interval > 0.0) || !(t_final > state.t))
        throw std::invalid_argument("evolve: invalid step or time window");
    if (dt > sys.recommended_dt() * (1.0 + 1e-12))
        throw std::invalid_argument(
            "evolve: dt does not resolve the top bath frequency");
    if (t_final - state.t >= sys.recurrence_horizon())
        throw StaleWindowError(
            "evolve: window reaches the recurrence horizon of the discretized bath");

    const int sub = std::max(1, static_cast<int>(std::ceil(sample_interval / dt)));
    const double h = sample_interval / sub;
    const long n_samples = std::lround((t_final - state.t) / sample_interval);

    Trajectory traj;
    traj.recurrence_horizon = sys.recurrence_horizon();
    traj.dt = h;
    traj.samples.reserve(static_cast<std::size_t>(n_samples) + 1);

    detail::Rk4Workspace ws;
    auto record = [&](double t, const MatrixXd& sigma) {
        const auto e = sys.energies(t, sigma);
        EnergySample s;
        s.t = t;
        s.bath = e.bath;
        s.system = e.system;
        s.interaction = e.interaction;
        s.total = e.total;
        traj.samples.push_back(std::move(s));
    };
    record(state.t, state.sigma);
    const double t0 = state.t;
    double t = t0;
    for (long i = 0; i < n_samples; ++i) {
        for (int k = 0; k < sub; ++k) {
            detail::rk4_step(sys, t, h, state.sigma, ws);
            t += h;
        }
        // re-anchor to the exact sample time so roundoff cannot drift the grid
        t = t0 + (i + 1) * sample_interval;
        record(t, state.sigma);
    }
    state.t = t;
    traj.final_state = std::move(state);
    return traj;
}

// ------------------------------- Current fits --------------------------------

struct CurrentFit {
    std::vector<double> q_dot; // per-bath stationary heat current
    double power = 0.0;        // injected power from total-energy bookkeeping
    std::vector<double> residual_rms;
    double power_residual_rms = 0.0;
    bool stationary = true;
    double half_slope_deviation = 0.0; // diagnostic for recurrence onset
    double window_start = 0.0, window_end = 0.0;
    int points = 0;
};

namespace detail {

inline std::pair<double, double> least_squares_slope(const std::vector<double>& t,
                                                     const std::vector<double>& y) {
    const std::size_t n = t.size();
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= n;
    ym /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (t[i] - tm) * (y[i] - ym);
        den += (t[i] - tm) * (t[i] - tm);
    }
    const double slope = num / den;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - ym - slope * (t[i] - tm);
        ss += r * r;
    }
    return {slope, std::sqrt(ss / n)};
}

} // namespace detail

// Least-squares slopes of the per-bath energies and of the total energy over
// the last `fit_periods` drive periods, using stroboscopic samples only.
inline CurrentFit fit_currents(const Trajectory& traj, const EngineConfig& cfg,
                               const OracleParams& params) {
    const double tau = cfg.network.period();
    const double t_end = traj.samples.back().t;
    const double t_start = t_end - params.fit_periods * tau;
    const std::size_t n_baths = traj.samples.front().bath.size();

    std::vector<double> ts;
    std::vector<std::vector<double>> eb(n_baths);
    std::vector<double> etot;
    for (const auto& s : traj.samples) {
        if (s.t < t_start - 1e-9 * tau) continue;
        // stroboscopic: keep samples on the period grid
        const double phase = std::fmod((s.t - t_end) / tau, 1.0);
        if (std::abs(phase) > 1e-6 && std::abs(std::abs(phase) - 1.0) > 1e-6)
            continue;
        ts.push_back(s.t);
        for (std::size_t b = 0; b < n_baths; ++b) eb[b].push_back(s.bath[b]);
        etot.push_back(s.total);
    }
    if (ts.size() < 4)
        throw StaleWindowError("fit_currents: too few stroboscopic samples in window");

    CurrentFit fit;
    fit.window_start = ts.front();
    fit.window_end = ts.back();
    fit.points = static_cast<int>(ts.size());
    fit.q_dot.resize(n_baths);
    fit.residual_rms.resize(n_baths);
    double scale = 0.0;
    for (std::size_t b = 0; b < n_baths; ++b) {
        const auto [slope, rms] = detail::least_squares_slope(ts, eb[b]);
        fit.q_dot[b] = slope;
        fit.residual_rms[b] = rms;
        scale = std::max(scale, std::abs(slope));
    }
    const auto [pslope, prms] = detail::least_squares_slope(ts, etot);
    fit.power = pslope;
    fit.power_residual_rms = prms;
    scale = std::max(scale, std::abs(pslope));

    // stationarity: compare half-window slopes of the total energy
    const std::size_t half = ts.size() / 2;
    std::vector<double> t1(ts.begin(), ts.begin() + half),
        t2(ts.begin() + half, ts.end());
    std::vector<double> y1(etot.begin(), etot.begin() + half),
        y2(etot.begin() + half, etot.end());
    const double s1 = detail::least_squares_slope(t1, y1).first;
    const double s2 = detail::least_squares_slope(t2, y2).first;
    fit.half_slope_deviation = std::abs(s2 - s1);
    fit.stationary = fit.half_slope_deviation <= 0.5 * std::max(scale, 1e-300);
    return fit;
}

// ------------------------------ Orchestration --------------------------------

struct OracleRun {
    OracleParams params;
    Trajectory trajectory;
    CurrentFit fit;
    double dt = 0.0;
    double t_final = 0.0;
};

inline OracleRun run_oracle(const EngineConfig& cfg, const OracleParams& params) {
    GaussianSystem sys(cfg, params);
    const double tau = cfg.network.period();
    const double dt = params.dt > 0.0 ? params.dt : sys.recommended_dt();

    const int total_periods = static_cast<int>(
        std::ceil(params.fit_periods / (1.0 - params.transient_frac)));
    const double t_final = total_periods * tau;
    if (t_final >= sys.recurrence_horizon())
        throw StaleWindowError(
            "run_oracle: fit window exceeds the recurrence horizon; increase "
            "n_modes or shrink the window");

    CovarianceState init = initial_covariance(sys, params.squeeze_angle);

    if (params.step_check) {
        // one-period probe at dt and dt/2
        CovarianceState probe_a = init, probe_b = init;
        detail::Rk4Workspace ws;
        const int steps = std::max(1, static_cast<int>(std::ceil(tau / dt)));
        const double h = tau / steps;
        double t = 0.0;
        for (int i = 0; i < steps; ++i, t += h)
            detail::rk4_step(sys, t, h, probe_a.sigma, ws);
        t = 0.0;
        for (int i = 0; i < 2 * steps; ++i, t += 0.5 * h)
            detail::rk4_step(sys, t, 0.5 * h, probe_b.sigma, ws);
        const double diff = (probe_a.sigma - probe_b.sigma).norm() /
                            std::max(probe_b.sigma.norm(), 1e-300);
        if (diff > params.step_tol)
            throw AccuracyError("run_oracle: step-halving discrepancy " +
                                std::to_string(diff) + " exceeds tolerance");
    }

    OracleRun run;
    run.params = params;
    run.dt = dt;
    run.t_final = t_final;
    run.trajectory =
        evolve(sys, std::move(init), t_final, dt,
               tau / std::max(1, params.samples_per_period));
    run.fit = fit_currents(run.trajectory, cfg, params);
    return run;
}

// ------------------------------ Phase-space aids -----------------------------

inline MatrixXd symplectic_form(int dim) {
    MatrixXd j = MatrixXd::Zero(2 * dim, 2 * dim);
    j.block(0, dim, dim, dim) = MatrixXd::Identity(dim, dim);
    j.block(dim, 0, dim, dim) = -MatrixXd::Identity(dim, dim);
    return j;
}

// Smallest eigenvalue of sigma + (i/2) J; physical states are >= 0 up to
// roundoff.
inline double physicality_min_eig(const MatrixXd& sigma) {
    const int dim2 = static_cast<int>(sigma.rows());
    Eigen::MatrixXcd h = sigma.cast<Complex>();
    const MatrixXd j = symplectic_form(dim2 / 2);
    h += Complex(0.0, 0.5) * j.cast<Complex>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    return eig.eigenvalues().minCoeff();
}

// Fundamental solution Phi(t1 <- t0) of zdot = A(t) z by RK4 on the matrix
// ODE; companion route used to cross-check the covariance evolution and the
// preservation of the commutation relations.
inline MatrixXd propagate_fundamental(const GaussianSystem& sys, double t0,
                                      double t1, double dt) {
    const int D = sys.dim();
    MatrixXd phi = MatrixXd::Identity(2 * D, 2 * D);
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt)));
    const double h = (t1 - t0) / steps;
    MatrixXd k1, k2, k3, k4, tmp;
    double t = t0;
    for (int i = 0; i < steps; ++i, t += h) {
        sys.apply_generator(t, phi, k1);
        tmp = phi + (0.5 * h) * k1;
        sys.apply_generator(t + 0.5 * h, tmp, k2);
        tmp = phi + (0.5 * h) * k2;
        sys.apply_generator(t + 0.5 * h, tmp, k3);
        tmp = phi + h * k3;
        sys.apply_generator(t + h, tmp, k4);
        phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return phi;
}

} // namespace qle::oracle
