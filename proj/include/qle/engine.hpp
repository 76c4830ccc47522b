// engine.hpp — end-to-end pipeline: stability gate, rate table, heat report,
// bounds, and the oracle cross-check.

#pragma once

#include <utility>
#include <vector>

#include "qle/analysis.hpp"
#include "qle/currents.hpp"
#include "qle/floquet.hpp"
#include "qle/model.hpp"
#include "qle/oracle.hpp"

namespace qle {

struct RunResult {
    floquet::StabilityReport stability;
    currents::RateTable table;
    currents::HeatReport heat;
    analysis::BoundsReport bounds;
};

class UnstableDriveError : public std::runtime_error {
public:
    UnstableDriveError(const std::string& what, floquet::StabilityReport rep)
        : std::runtime_error(what), report(rep) {}
    floquet::StabilityReport report;
};

inline RunResult run_engine(const model::EngineConfig& cfg, int threads = 1,
                            bool force = false) {
    RunResult res;
    res.stability = floquet::check_stability(cfg);
    if (!res.stability.pass && !force)
        throw UnstableDriveError("drive too strong for the stability criterion",
                                 res.stability);
    floquet::FloquetSolver solver(cfg);
    res.table = currents::build_rate_table(solver, threads);
    res.heat = currents::integrate_heat(cfg, res.table);
    res.bounds = analysis::build_bounds(cfg, res.table, res.heat);
    return res;
}

// Comparison of the stationary Floquet currents with the time-domain fit.
struct OracleComparison {
    std::vector<double> floquet_q_dot; // per reservoir, ST + NR + R
    std::vector<double> oracle_q_dot;
    double floquet_power = 0.0; // work per period / tau_d
    double oracle_power = 0.0;
    double max_rel_deviation = 0.0;

    static double rel_dev(double a, double b, double scale) {
        return std::abs(a - b) / std::max(scale, 1e-300);
    }
};

inline OracleComparison compare_with_oracle(const model::EngineConfig& cfg,
                                            const currents::HeatReport& heat,
                                            const oracle::CurrentFit& fit) {
    OracleComparison cmp;
    double scale = std::abs(heat.work / heat.tau_d);
    for (const auto& rc : heat.per_reservoir) {
        cmp.floquet_q_dot.push_back(rc.total());
        scale = std::max(scale, std::abs(rc.total()));
    }
    cmp.oracle_q_dot = fit.q_dot;
    cmp.floquet_power = heat.work / heat.tau_d;
    cmp.oracle_power = fit.power;
    for (std::size_t b = 0; b < cmp.floquet_q_dot.size(); ++b)
        cmp.max_rel_deviation =
            std::max(cmp.max_rel_deviation,
                     OracleComparison::rel_dev(cmp.floquet_q_dot[b],
                                               cmp.oracle_q_dot[b], scale));
    cmp.max_rel_deviation = std::max(
        cmp.max_rel_deviation,
        OracleComparison::rel_dev(cmp.floquet_power, cmp.oracle_power, scale));
    return cmp;
}

} // namespace qle
