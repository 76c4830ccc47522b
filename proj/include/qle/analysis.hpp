// analysis.hpp — thermodynamic bounds and diagnostics: Clausius floor,
// efficiency and its generalized bound, preparation cost of nonthermal
// reservoirs, Planck-proposition verdicts.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qle/common.hpp"
#include "qle/currents.hpp"
#include "qle/model.hpp"

namespace qle::analysis {

using currents::HeatReport;
using currents::RateTable;
using model::EngineConfig;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// --------------------------- Omega ratio extrema -----------------------------

struct OmegaExtrema {
    double m = 1.0;     // min of Omega_a(w) / Omega_b(w + k w_d)
    double big_m = 1.0; // max of the same ratio set
    double clausius_floor() const { return std::min(m, 1.0 / big_m); }
};

// Scan the characteristic-frequency ratios over all ordered reservoir pairs,
// channels k <= K and transport-supported quadrature nodes. Nodes whose rate
// is below `support_threshold x peak` carry no heat and are excluded; both
// orientations of each supported process enter the set, so it is closed under
// reciprocals.
inline OmegaExtrema omega_ratio_extrema(const EngineConfig& cfg,
                                        const RateTable& table) {
    const int nres = cfg.n_reservoirs();
    const double wd = cfg.network.drive_freq;

    double peak = 0.0;
    for (const auto& ch : table.channels)
        for (const auto& pm : ch.p_r) peak = std::max(peak, pm.maxCoeff());
    const double floor_rate = cfg.numerics.support_threshold * peak;

    // characteristic frequencies cached per reservoir on the shared grid and
    // on its k-shifted copies
    OmegaExtrema ext;
    ext.m = std::numeric_limits<double>::infinity();
    ext.big_m = 0.0;
    bool any = false;

    std::vector<std::vector<double>> omega_at(static_cast<std::size_t>(nres));
    for (int a = 0; a < nres; ++a) {
        omega_at[a].resize(table.grid_r.size());
        for (std::size_t i = 0; i < table.grid_r.size(); ++i)
            omega_at[a][i] = cfg.reservoirs[a].occupation.characteristic_frequency(
                table.grid_r.nodes[i]);
    }

    for (const auto& ch : table.channels) {
        const double kwd = ch.k * wd;
        std::vector<std::vector<double>> omega_shift(static_cast<std::size_t>(nres));
        for (int a = 0; a < nres; ++a) {
            omega_shift[a].resize(table.grid_r.size());
            for (std::size_t i = 0; i < table.grid_r.size(); ++i)
                omega_shift[a][i] =
                    cfg.reservoirs[a].occupation.characteristic_frequency(
                        table.grid_r.nodes[i] + kwd);
        }
        for (std::size_t i = 0; i < table.grid_r.size(); ++i)
            for (int a = 0; a < nres; ++a)
                for (int b = 0; b < nres; ++b) {
                    if (!(ch.p_r[i](a, b) > floor_rate)) continue;
                    // process (a at w + k w_d) <-> (b at w); both orientations
                    const double ratio = omega_at[b][i] / omega_shift[a][i];
                    ext.m = std::min({ext.m, ratio, 1.0 / ratio});
                    ext.big_m = std::max({ext.big_m, ratio, 1.0 / ratio});
                    any = true;
                }
    }
    if (!any) {
        ext.m = 1.0;
        ext.big_m = 1.0;
    }
    return ext;
}

// ------------------------------ Clausius check -------------------------------

struct ClausiusVerdict {
    double ratio = 0.0; // dq_out / dq_in_mag
    double floor = 0.0; // min{m, 1/M}
    bool pass = false;
    double margin() const { return ratio - floor; }
    // classic two-temperature form, evaluated when all reservoirs carry a
    // temperature parameter
    bool thermal_form = false;
    double thermal_entropy = kNaN; // -dq_in_mag/T_h + dq_out/T_c
    bool thermal_pass = false;
};

inline ClausiusVerdict clausius_check(const EngineConfig& cfg, const HeatReport& rep,
                                      const OmegaExtrema& ext) {
    ClausiusVerdict v;
    v.floor = ext.clausius_floor();
    v.ratio = rep.dq_in_mag > 0.0
                  ? rep.dq_out / rep.dq_in_mag
                  : std::numeric_limits<double>::infinity();
    v.pass = v.ratio > v.floor;

    bool all_thermal = true;
    double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
    for (const auto& r : cfg.reservoirs) {
        if (!r.occupation.has_temperature()) {
            all_thermal = false;
            break;
        }
        t_min = std::min(t_min, r.occupation.temperature());
        t_max = std::max(t_max, r.occupation.temperature());
    }
    if (all_thermal) {
        v.thermal_form = true;
        v.thermal_entropy = -rep.dq_in_mag / t_max + rep.dq_out / t_min;
        v.thermal_pass = v.thermal_entropy > 0.0;
    }
    return v;
}

// -------------------------------- Efficiency ---------------------------------

inline bool is_engine(const HeatReport& rep) {
    return rep.work < 0.0 && rep.dq_in_mag > 0.0;
}

// Exact efficiency eta = (|dQ_in| - dQ_out - dQ_NR) / |dQ_in|; defined only in
// the work-extraction regime.
inline double efficiency(const HeatReport& rep) {
    if (!is_engine(rep))
        throw NotAnEngineError("efficiency undefined: no work is extracted",
                               rep.work, rep.dq_in_mag, rep.dq_out, rep.dq_nr);
    return (rep.dq_in_mag - rep.dq_out - rep.dq_nr) / rep.dq_in_mag;
}

// ----------------------------- Preparation cost ------------------------------

struct CostReport {
    double eta_c = kNaN;        // Carnot anchor from coldest/hottest T
    double eta_g = kNaN;        // generalized bound
    double cost_ratio = kNaN;   // C / |dQ_in| estimate, (eta_g - eta_c)/eta_c
    double cost_estimate = kNaN;            // cost_ratio * |dQ_in|
    double cost_lower_bound_given_work = kNaN; // |W|(eta_g - eta_c)/(eta_g eta_c)
    double cost_ceiling = kNaN;              // T_c / (T_h - T_c)
    bool low_cost_regime = false;            // T_h > 2 T_c
    double t_cold = kNaN, t_hot = kNaN;
};

// Thermal anchors: coldest and hottest temperature parameters among the
// reservoirs (squeezed reservoirs contribute their T; tabulated ones none).
inline std::optional<std::pair<double, double>> thermal_anchors(
    const EngineConfig& cfg) {
    double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
    bool found = false;
    for (const auto& r : cfg.reservoirs) {
        if (!r.occupation.has_temperature()) continue;
        found = true;
        t_min = std::min(t_min, r.occupation.temperature());
        t_max = std::max(t_max, r.occupation.temperature());
    }
    if (!found) return std::nullopt;
    return std::pair{t_min, t_max};
}

inline CostReport preparation_cost(const EngineConfig& cfg, const OmegaExtrema& ext,
                                   const HeatReport& rep) {
    const auto anchors = thermal_anchors(cfg);
    if (!anchors)
        throw std::domain_error("preparation cost: no thermal anchors available");
    const auto [t_c, t_h] = *anchors;
    if (!(t_c < t_h))
        throw std::domain_error("preparation cost undefined: T_c >= T_h");

    CostReport c;
    c.t_cold = t_c;
    c.t_hot = t_h;
    c.eta_c = 1.0 - t_c / t_h;
    c.eta_g = 1.0 - ext.clausius_floor();
    c.cost_ratio = (c.eta_g - c.eta_c) / c.eta_c;
    c.cost_estimate = c.cost_ratio * rep.dq_in_mag;
    if (c.eta_g > 0.0)
        c.cost_lower_bound_given_work =
            std::abs(rep.work) * (c.eta_g - c.eta_c) / (c.eta_g * c.eta_c);
    c.cost_ceiling = t_c / (t_h - t_c);
    c.low_cost_regime = t_h > 2.0 * t_c;
    return c;
}

// ------------------------------ Planck verdict -------------------------------

struct PlanckVerdict {
    bool applicable = false;    // single-reservoir configuration
    bool decreasing = false;    // n(w) strictly decreasing
    double work = 0.0;
    bool satisfied = true;      // W >= 0 asserted only for decreasing n
    bool extracted_work = false; // informational for population inversion
};

inline PlanckVerdict planck_verdict(const EngineConfig& cfg, const HeatReport& rep) {
    PlanckVerdict v;
    v.applicable = cfg.n_reservoirs() == 1;
    v.work = rep.work;
    if (!v.applicable) return v;
    v.decreasing = cfg.reservoirs.front().occupation.strictly_decreasing();
    if (v.decreasing)
        v.satisfied = rep.work >= -1e-12 * std::max(1.0, std::abs(rep.dq_in_mag));
    v.extracted_work = rep.work < 0.0;
    return v;
}

// ------------------------------ Bounds report --------------------------------

struct BoundsReport {
    double m = 1.0;
    double big_m = 1.0;
    double clausius_floor = 1.0;
    double eta_g = 0.0;
    bool engine = false;
    double eta = kNaN;        // NaN outside the engine regime
    double eta_c = kNaN;      // NaN without thermal anchors
    double cost_ratio = kNaN;
    double cost_lower_bound_given_work = kNaN;
    double cost_ceiling = kNaN;
    bool low_cost_regime = false;
    double t_cold = kNaN, t_hot = kNaN;
};

inline BoundsReport build_bounds(const EngineConfig& cfg, const RateTable& table,
                                 const HeatReport& rep) {
    BoundsReport b;
    const OmegaExtrema ext = omega_ratio_extrema(cfg, table);
    b.m = ext.m;
    b.big_m = ext.big_m;
    b.clausius_floor = ext.clausius_floor();
    b.eta_g = 1.0 - b.clausius_floor;
    b.engine = is_engine(rep);
    if (b.engine) b.eta = efficiency(rep);
    if (const auto anchors = thermal_anchors(cfg)) {
        b.t_cold = anchors->first;
        b.t_hot = anchors->second;
        if (b.t_cold < b.t_hot) {
            const CostReport c = preparation_cost(cfg, ext, rep);
            b.eta_c = c.eta_c;
            b.cost_ratio = c.cost_ratio;
            b.cost_lower_bound_given_work = c.cost_lower_bound_given_work;
            b.cost_ceiling = c.cost_ceiling;
            b.low_cost_regime = c.low_cost_regime;
        } else if (cfg.n_reservoirs() == 1 ||
                   b.t_cold == b.t_hot) {
            b.eta_c = 0.0;
        }
    }
    return b;
}

} // namespace qle::analysis
