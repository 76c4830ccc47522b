// test_support.hpp — shared configuration builders for the test suites
#pragma once

#include <Eigen/Dense>

#include "qle/model.hpp"

namespace qle::testing {

// Single driven oscillator (mass 1) with one attached reservoir.
inline model::EngineConfig single_oscillator(double nu, double drive_amp,
                                             double coupling, double cutoff,
                                             model::OccupationModel occupation,
                                             double drive_freq = 1.0) {
    model::EngineConfig cfg;
    cfg.network.mass = Eigen::MatrixXd::Identity(1, 1);
    // choose V_0 so the renormalized frequency is nu
    cfg.network.v0 =
        (nu * nu + coupling * cutoff) * Eigen::MatrixXd::Identity(1, 1);
    cfg.network.drive_freq = drive_freq;
    if (drive_amp != 0.0) {
        cfg.network.v_fourier[1] = drive_amp * Eigen::MatrixXd::Identity(1, 1);
        cfg.network.v_fourier[-1] = cfg.network.v_fourier[1];
    }
    model::ReservoirSpec res;
    res.label = "bath";
    res.density.coupling = coupling;
    res.density.cutoff = cutoff;
    res.density.projector = Eigen::VectorXd::Ones(1);
    res.occupation = std::move(occupation);
    cfg.reservoirs.push_back(std::move(res));
    return cfg;
}

// Single driven oscillator between two reservoirs with independent Ohmic
// profiles; the renormalized frequency is pinned to nu.
inline model::EngineConfig two_bath(double nu, double drive_amp,
                                    double coupling_h, double cutoff_h,
                                    model::OccupationModel occ_h,
                                    double coupling_c, double cutoff_c,
                                    model::OccupationModel occ_c,
                                    double drive_freq = 1.0) {
    model::EngineConfig cfg;
    cfg.network.mass = Eigen::MatrixXd::Identity(1, 1);
    cfg.network.v0 = (nu * nu + coupling_h * cutoff_h + coupling_c * cutoff_c) *
                     Eigen::MatrixXd::Identity(1, 1);
    cfg.network.drive_freq = drive_freq;
    if (drive_amp != 0.0) {
        cfg.network.v_fourier[1] = drive_amp * Eigen::MatrixXd::Identity(1, 1);
        cfg.network.v_fourier[-1] = cfg.network.v_fourier[1];
    }
    model::ReservoirSpec hot;
    hot.label = "hot";
    hot.density.coupling = coupling_h;
    hot.density.cutoff = cutoff_h;
    hot.density.projector = Eigen::VectorXd::Ones(1);
    hot.occupation = std::move(occ_h);
    model::ReservoirSpec cold;
    cold.label = "cold";
    cold.density.coupling = coupling_c;
    cold.density.cutoff = cutoff_c;
    cold.density.projector = Eigen::VectorXd::Ones(1);
    cold.occupation = std::move(occ_c);
    cfg.reservoirs.push_back(std::move(hot));
    cfg.reservoirs.push_back(std::move(cold));
    return cfg;
}

// Reduced-accuracy numerics for fast test sweeps.
inline void quick_numerics(model::EngineConfig& cfg, int n_max = 4, int k_max = 4,
                           int panels = 8, int gl_order = 8) {
    cfg.numerics.n_max = n_max;
    cfg.numerics.k_max = k_max;
    cfg.numerics.panels = panels;
    cfg.numerics.gl_order = gl_order;
    cfg.numerics.refine_levels = 8;
    cfg.numerics.quad_tol = 1e-9;
    cfg.numerics.tail_tol = 1e-7;
}

} // namespace qle::testing
