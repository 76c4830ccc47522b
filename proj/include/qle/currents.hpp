// currents.hpp — emission/transition rates and the stationary heat bookkeeping:
// nonresonant and resonant heat per cycle, in/out split, per-reservoir currents.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qle/common.hpp"
#include "qle/floquet.hpp"
#include "qle/model.hpp"
#include "qle/quadrature.hpp"

namespace qle::currents {

using Eigen::MatrixXd;
using floquet::FloquetPoint;
using floquet::FloquetSolver;
using model::EngineConfig;

// ------------------------------ Rate kernels --------------------------------

namespace detail {

// (pi/2) tr[I_a(wa) A I_b(wb) A^dagger] with rank-one spectral densities
// I = J(w) u u^T; the congruent structure makes the value nonnegative exactly.
inline double rate_trace(const EngineConfig& cfg, int a, int b, double wa, double wb,
                         const Eigen::MatrixXcd& coeff) {
    const auto& da = cfg.reservoirs[static_cast<std::size_t>(a)].density;
    const auto& db = cfg.reservoirs[static_cast<std::size_t>(b)].density;
    const Complex amp = da.projector.transpose().cast<Complex>() * coeff *
                        db.projector.cast<Complex>();
    return 0.5 * pi * da.profile_value(wa) * db.profile_value(wb) * std::norm(amp);
}

} // namespace detail

// Emission rate per unit frequency of the nonresonant pair creation channel k:
// excitations at k w_d - w in reservoir a and at w in reservoir b.
inline double emission_rate(const EngineConfig& cfg, const FloquetPoint& p, int k,
                            int a, int b) {
    const double wd = cfg.network.drive_freq;
    if (k < 1)
        throw std::domain_error("emission rate: k must be a positive integer");
    if (!(p.omega > 0.0 && p.omega < k * wd))
        throw std::domain_error("emission rate: frequency outside (0, k w_d)");
    return detail::rate_trace(cfg, a, b, k * wd - p.omega, p.omega, p.coeff(-k));
}

// Transition rate per unit frequency between mode w in reservoir b and mode
// w + k w_d in reservoir a (resonant transport channel k, either sign).
inline double transition_rate(const EngineConfig& cfg, const FloquetPoint& p, int k,
                              int a, int b) {
    const double wd = cfg.network.drive_freq;
    if (k == 0) throw std::domain_error("transition rate: k must be nonzero");
    if (!(p.omega + k * wd > 0.0))
        throw std::domain_error("transition rate: w + k w_d must be positive");
    return detail::rate_trace(cfg, a, b, p.omega + k * wd, p.omega, p.coeff(k));
}

// Static (k = 0) rate entering the undriven heat current.
inline double static_rate(const EngineConfig& cfg, const FloquetPoint& p, int a,
                          int b) {
    return detail::rate_trace(cfg, a, b, p.omega, p.omega, p.coeff(0));
}

// ------------------------------- Rate table ---------------------------------

// Quadrature grids refine geometrically around the dressed resonances and all
// of their drive sidebands; widths follow the local damping scale.
inline std::vector<quad::RefineSite> resonance_sites(const EngineConfig& cfg,
                                                     int k_span) {
    const MatrixXd vr = cfg.network.v0 - floquet::gamma_static(cfg);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(vr, cfg.network.mass);
    std::vector<quad::RefineSite> sites;
    const double wd = cfg.network.drive_freq;
    for (int i = 0; i < eig.eigenvalues().size(); ++i) {
        const double lam = eig.eigenvalues()(i);
        if (!(lam > 0.0)) continue;
        const double nu = std::sqrt(lam);
        const Eigen::VectorXd phi = eig.eigenvectors().col(i); // M-orthonormal
        double im = 0.0;
        for (const auto& r : cfg.reservoirs) {
            const double up = phi.dot(r.density.projector);
            im += r.density.profile_value(nu) * up * up;
        }
        const double half_width = std::max(0.25 * pi * im / std::max(nu, 1e-12),
                                           16.0 * cfg.sigma());
        for (int m = -k_span; m <= k_span; ++m) {
            const double c = nu + m * wd;
            if (c > 0.0) sites.push_back({c, std::max(8.0 * half_width, 1e-3 * wd)});
        }
    }
    return sites;
}

struct RateChannel {
    int k = 0;
    quad::PanelGrid grid_nr;         // (0, k w_d)
    std::vector<MatrixXd> p_nr;      // node -> (a, b) emission rates
    std::vector<MatrixXd> p_r;       // node on the shared R grid -> (a, b)
};

struct RateTable {
    double omega_max = 0.0;
    int k_max = 0;
    double tau_d = 0.0;
    quad::PanelGrid grid_r;          // shared grid on (0, omega_max)
    std::vector<MatrixXd> p_static;  // node -> (a, b) static rates
    std::vector<RateChannel> channels;
    double max_tail = 0.0;
    int max_n_used = 0;
    bool converged = false;
};

inline RateTable build_rate_table(const FloquetSolver& solver, int threads = 1) {
    const EngineConfig& cfg = solver.config();
    const auto& num = cfg.numerics;
    const double wd = cfg.network.drive_freq;
    const int kmax = cfg.k_max();
    const int nres = cfg.n_reservoirs();

    RateTable table;
    table.omega_max = cfg.omega_max();
    table.k_max = kmax;
    table.tau_d = cfg.network.period();

    const auto sites = resonance_sites(cfg, kmax + 1);
    table.grid_r = quad::refined_grid(0.0, table.omega_max, num.panels, num.gl_order,
                                      sites, num.refine_levels);

    table.p_static.resize(table.grid_r.size());
    table.channels.resize(static_cast<std::size_t>(kmax));
    for (int k = 1; k <= kmax; ++k) {
        auto& ch = table.channels[static_cast<std::size_t>(k - 1)];
        ch.k = k;
        ch.grid_nr = quad::refined_grid(0.0, k * wd, num.panels, num.gl_order, sites,
                                        num.refine_levels);
        ch.p_nr.resize(ch.grid_nr.size());
        ch.p_r.resize(table.grid_r.size());
    }

    // Solves on the shared R grid feed the static term and every k channel.
    std::vector<double> tails(table.grid_r.size(), 0.0);
    std::vector<int> used(table.grid_r.size(), 0);
    parallel_for(table.grid_r.size(), threads, [&](std::size_t i) {
        const FloquetPoint p = solver.solve(table.grid_r.nodes[i]);
        tails[i] = p.tail_norm;
        used[i] = p.n_max;
        MatrixXd st(nres, nres);
        for (int a = 0; a < nres; ++a)
            for (int b = 0; b < nres; ++b) st(a, b) = static_rate(cfg, p, a, b);
        table.p_static[i] = st;
        for (auto& ch : table.channels) {
            MatrixXd pr(nres, nres);
            for (int a = 0; a < nres; ++a)
                for (int b = 0; b < nres; ++b)
                    pr(a, b) = transition_rate(cfg, p, ch.k, a, b);
            ch.p_r[i] = pr;
        }
    });

    double max_tail = 0.0;
    int max_used = 0;
    for (std::size_t i = 0; i < tails.size(); ++i) {
        max_tail = std::max(max_tail, tails[i]);
        max_used = std::max(max_used, used[i]);
    }

    for (auto& ch : table.channels) {
        std::vector<double> ch_tails(ch.grid_nr.size(), 0.0);
        std::vector<int> ch_used(ch.grid_nr.size(), 0);
        parallel_for(ch.grid_nr.size(), threads, [&](std::size_t i) {
            const FloquetPoint p = solver.solve(ch.grid_nr.nodes[i]);
            ch_tails[i] = p.tail_norm;
            ch_used[i] = p.n_max;
            MatrixXd pn(nres, nres);
            for (int a = 0; a < nres; ++a)
                for (int b = 0; b < nres; ++b)
                    pn(a, b) = emission_rate(cfg, p, ch.k, a, b);
            ch.p_nr[i] = pn;
        });
        for (std::size_t i = 0; i < ch_tails.size(); ++i) {
            max_tail = std::max(max_tail, ch_tails[i]);
            max_used = std::max(max_used, ch_used[i]);
        }
    }

    table.max_tail = max_tail;
    table.max_n_used = max_used;
    table.converged = max_tail <= num.tail_tol;
    return table;
}

// ----------------------------- Heat bookkeeping ------------------------------

struct ReservoirCurrents {
    double st = 0.0; // static heat current
    double nr = 0.0; // nonresonant contribution
    double r = 0.0;  // resonant contribution
    double total() const { return st + nr + r; }
};

struct HeatReport {
    double dq_nr = 0.0;     // >= 0, Eq.-(2)-type nonresonant heat per cycle
    double dq_r = 0.0;      // resonant heat per cycle
    double dq_out = 0.0;    // heat dumped into the environment, >= 0
    double dq_in_mag = 0.0; // |heat flowing from the environment into S|
    double work = 0.0;      // average work per cycle = dq_nr + dq_r
    std::vector<ReservoirCurrents> per_reservoir;
    std::vector<double> channel_weight; // |NR| + |R| contribution per k
    double k_tail_ratio = 0.0;
    bool k_converged = true;
    double tau_d = 0.0;
    int k_max = 0;
};

// Single pass over the table nodes. All reported identities (split/recombine,
// per-reservoir sums) are same-node regroupings of the terms accumulated here.
inline HeatReport integrate_heat(const EngineConfig& cfg, const RateTable& table) {
    const int nres = cfg.n_reservoirs();
    const double wd = cfg.network.drive_freq;
    const double tau = table.tau_d;

    HeatReport rep;
    rep.tau_d = tau;
    rep.k_max = table.k_max;
    rep.per_reservoir.resize(static_cast<std::size_t>(nres));

    // occupations cached on both grids; entries for w + k w_d as needed
    const std::size_t nr_nodes = table.grid_r.size();
    std::vector<std::vector<double>> occ_r(static_cast<std::size_t>(nres));
    for (int a = 0; a < nres; ++a) {
        occ_r[a].resize(nr_nodes);
        for (std::size_t i = 0; i < nr_nodes; ++i)
            occ_r[a][i] =
                cfg.reservoirs[a].occupation.occupation(table.grid_r.nodes[i]);
    }

    KahanSum dq_nr, dq_r, dq_out, dq_in;
    std::vector<KahanSum> res_nr(nres), res_r(nres), res_st(nres);
    rep.channel_weight.assign(static_cast<std::size_t>(table.k_max), 0.0);

    // static (k = 0) heat currents; sum over reservoirs vanishes identically
    for (std::size_t i = 0; i < nr_nodes; ++i) {
        const double w = table.grid_r.nodes[i];
        const double wt = table.grid_r.weights[i];
        for (int a = 0; a < nres; ++a)
            for (int b = 0; b < nres; ++b) {
                const double p0 = table.p_static[i](a, b);
                res_st[a].add(wt * w * p0 * (occ_r[b][i] - occ_r[a][i]));
            }
    }

    for (const auto& ch : table.channels) {
        const double kwd = ch.k * wd;
        KahanSum ch_abs;

        // occupations at w + k w_d on the shared grid
        std::vector<std::vector<double>> occ_shift(static_cast<std::size_t>(nres));
        for (int a = 0; a < nres; ++a) {
            occ_shift[a].resize(nr_nodes);
            for (std::size_t i = 0; i < nr_nodes; ++i)
                occ_shift[a][i] = cfg.reservoirs[a].occupation.occupation(
                    table.grid_r.nodes[i] + kwd);
        }

        // resonant transport, Eq.-(3)-type, with the in/out classification of
        // each node by the sign of n_b(w) - n_a(w + k w_d)
        for (std::size_t i = 0; i < nr_nodes; ++i) {
            const double w = table.grid_r.nodes[i];
            const double wt = table.grid_r.weights[i];
            for (int a = 0; a < nres; ++a)
                for (int b = 0; b < nres; ++b) {
                    const double p = ch.p_r[i](a, b);
                    const double dn = occ_r[b][i] - occ_shift[a][i];
                    const double t = tau * wt * p * dn;
                    dq_r.add(kwd * t);
                    ch_abs.add(std::abs(kwd * t));
                    if (dn > 0.0) { // I+: absorb k w_d from the drive
                        dq_in.add(w * t);
                        dq_out.add((w + kwd) * t);
                    } else if (dn < 0.0) { // I-: emit k w_d into the drive
                        dq_out.add(w * (-t));
                        dq_in.add((w + kwd) * (-t));
                    }
                    res_r[a].add(wt * (w + kwd) * p * dn);
                    res_r[b].add(-wt * w * p * dn);
                }
        }

        // nonresonant pair creation, Eq.-(2)-type
        std::vector<std::vector<double>> occ_nr(static_cast<std::size_t>(nres));
        for (int b = 0; b < nres; ++b) {
            occ_nr[b].resize(ch.grid_nr.size());
            for (std::size_t i = 0; i < ch.grid_nr.size(); ++i)
                occ_nr[b][i] = cfg.reservoirs[b].occupation.occupation(
                    ch.grid_nr.nodes[i]);
        }
        for (std::size_t i = 0; i < ch.grid_nr.size(); ++i) {
            const double w = ch.grid_nr.nodes[i];
            const double wt = ch.grid_nr.weights[i];
            for (int a = 0; a < nres; ++a)
                for (int b = 0; b < nres; ++b) {
                    const double pt = ch.p_nr[i](a, b);
                    const double nb = occ_nr[b][i] + 0.5;
                    const double t = tau * wt * kwd * pt * nb;
                    dq_nr.add(t);
                    ch_abs.add(std::abs(t));
                    res_nr[a].add(wt * (kwd - w) * pt * nb);
                    res_nr[b].add(wt * w * pt * nb);
                }
        }

        rep.channel_weight[static_cast<std::size_t>(ch.k - 1)] = ch_abs.value();
    }

    rep.dq_nr = dq_nr.value();
    rep.dq_r = dq_r.value();
    rep.dq_out = dq_out.value();
    rep.dq_in_mag = dq_in.value();
    rep.work = rep.dq_nr + rep.dq_r;
    for (int a = 0; a < nres; ++a) {
        rep.per_reservoir[a].st = res_st[a].value();
        rep.per_reservoir[a].nr = res_nr[a].value();
        rep.per_reservoir[a].r = res_r[a].value();
    }

    double total_weight = 0.0;
    for (double wgt : rep.channel_weight) total_weight += wgt;
    rep.k_tail_ratio = total_weight > 0.0
                           ? rep.channel_weight.back() / total_weight
                           : 0.0;
    rep.k_converged = rep.k_tail_ratio <= cfg.numerics.k_tail_tol;
    return rep;
}

// Operation-style accessors over a rate table.
inline double delta_q_nr(const EngineConfig& cfg, const RateTable& t) {
    return integrate_heat(cfg, t).dq_nr;
}
inline double delta_q_r(const EngineConfig& cfg, const RateTable& t) {
    return integrate_heat(cfg, t).dq_r;
}
inline std::pair<double, double> split_heat(const EngineConfig& cfg,
                                            const RateTable& t) {
    const HeatReport rep = integrate_heat(cfg, t);
    return {rep.dq_in_mag, rep.dq_out};
}
inline double average_work(const EngineConfig& cfg, const RateTable& t) {
    return integrate_heat(cfg, t).work;
}

} // namespace qle::currents
