// model.hpp — working medium, reservoirs, spectral densities and occupations.
// Units: hbar = k_B = 1 throughout.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qle/common.hpp"
#include "qle/pchip.hpp"

namespace qle::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ------------------------------ Working medium ------------------------------

// Oscillator network with mass matrix M and tau_d-periodic potential
// V(t) = V_0 + sum_{m != 0} V_m e^{i m w_d t}. The Fourier map carries both
// signs explicitly and must satisfy V_{-m} = V_m (even, real drive).
struct NetworkModel {
    MatrixXd mass;
    MatrixXd v0;
    std::map<int, MatrixXd> v_fourier;
    double drive_freq = 1.0;

    int size() const { return static_cast<int>(mass.rows()); }
    double period() const { return 2.0 * pi / drive_freq; }

    const MatrixXd* fourier(int m) const {
        const auto it = v_fourier.find(m);
        return it == v_fourier.end() ? nullptr : &it->second;
    }

    // Real-time potential, used by the time-domain evolution.
    MatrixXd potential(double t) const {
        MatrixXd v = v0;
        for (const auto& [m, vm] : v_fourier)
            if (m > 0) v += 2.0 * std::cos(m * drive_freq * t) * vm;
        return v;
    }

    void validate() const {
        const int n = size();
        if (n < 1) throw std::invalid_argument("network: empty oscillator set");
        if (mass.cols() != n || v0.rows() != n || v0.cols() != n)
            throw std::invalid_argument("network: inconsistent matrix shapes");
        if (!mass.isApprox(mass.transpose(), 1e-12))
            throw std::invalid_argument("network: mass matrix must be symmetric");
        Eigen::LLT<MatrixXd> llt(mass);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("network: mass matrix must be positive definite");
        if (!v0.isApprox(v0.transpose(), 1e-12))
            throw std::invalid_argument("network: V_0 must be symmetric");
        if (!(drive_freq > 0.0))
            throw std::invalid_argument("network: drive frequency must be positive");
        for (const auto& [m, vm] : v_fourier) {
            if (m == 0)
                throw std::invalid_argument("network: m = 0 belongs to V_0");
            if (vm.rows() != n || vm.cols() != n)
                throw std::invalid_argument("network: V_m shape mismatch");
            if (!vm.isApprox(vm.transpose(), 1e-12))
                throw std::invalid_argument("network: V_m must be symmetric");
            const MatrixXd* mirror = fourier(-m);
            if (!mirror || !vm.isApprox(*mirror, 1e-12))
                throw std::invalid_argument("network: V_{-m} = V_m violated");
        }
    }
};

// ---------------------------- Spectral densities -----------------------------

enum class SpectralProfile { OhmicExponential };

// Matrix-valued spectral density I(w) = J(w) u u^T with a scalar Ohmic profile
// J(w) = coupling * w * exp(-w / cutoff) and a rank-one coupling projector u
// selecting the bridge oscillators.
struct SpectralDensity {
    SpectralProfile profile = SpectralProfile::OhmicExponential;
    double coupling = 0.0; // gamma_s >= 0
    double cutoff = 1.0;   // Lambda > 0
    VectorXd projector;

    double profile_value(double w) const {
        if (w < 0.0)
            throw std::domain_error("spectral density: negative frequency");
        switch (profile) {
            case SpectralProfile::OhmicExponential:
                return coupling * w * std::exp(-w / cutoff);
        }
        return 0.0;
    }

    MatrixXd value(double w) const {
        return profile_value(w) * (projector * projector.transpose());
    }

    // integral of J(w)/w over (0, inf); enters gamma(0) and the renormalized
    // potential. Closed form for the Ohmic-exponential profile.
    double static_weight() const { return coupling * cutoff; }

    void validate(int n_osc) const {
        if (!(coupling >= 0.0))
            throw std::invalid_argument("spectral density: coupling must be >= 0");
        if (!(cutoff > 0.0))
            throw std::invalid_argument("spectral density: cutoff must be > 0");
        if (projector.size() != n_osc)
            throw std::invalid_argument("spectral density: projector length mismatch");
    }
};

// ------------------------------- Occupations ---------------------------------

// Initial occupation n(w) of a reservoir; the only bath property entering the
// stationary heat currents.
class OccupationModel {
public:
    enum class Kind { Thermal, SqueezedThermal, Tabulated };

    static OccupationModel thermal(double temperature) {
        check_temperature(temperature);
        OccupationModel m;
        m.kind_ = Kind::Thermal;
        m.temperature_ = temperature;
        return m;
    }

    static OccupationModel squeezed_thermal(double temperature, double squeezing) {
        check_temperature(temperature);
        if (!(squeezing >= 0.0))
            throw std::invalid_argument("occupation: squeezing must be >= 0");
        OccupationModel m;
        m.kind_ = Kind::SqueezedThermal;
        m.temperature_ = temperature;
        m.squeezing_ = squeezing;
        return m;
    }

    static OccupationModel tabulated(std::vector<double> w, std::vector<double> n) {
        for (double v : n)
            if (!(v >= 0.0))
                throw std::invalid_argument("occupation: tabulated n(w) must be >= 0");
        for (double v : w)
            if (!(v > 0.0))
                throw std::invalid_argument("occupation: tabulated grid must be > 0");
        OccupationModel m;
        m.kind_ = Kind::Tabulated;
        m.table_ = Pchip(std::move(w), std::move(n));
        return m;
    }

    Kind kind() const { return kind_; }
    double temperature() const { return temperature_; }
    double squeezing() const { return squeezing_; }
    const Pchip& table() const { return *table_; }

    bool has_temperature() const { return kind_ != Kind::Tabulated; }

    // n(w); strictly decreasing in w for the thermal and squeezed kinds.
    double occupation(double w) const {
        if (!(w > 0.0))
            throw std::domain_error("occupation: frequency must be positive");
        switch (kind_) {
            case Kind::Thermal:
                return 1.0 / std::expm1(w / temperature_);
            case Kind::SqueezedThermal: {
                // 2n+1 = cosh(2r) coth(w / 2T), rearranged so r = 0 reduces to
                // the thermal value without cancellation
                const double ch = std::cosh(2.0 * squeezing_);
                const double n_th = 1.0 / std::expm1(w / temperature_);
                return 0.5 * (ch - 1.0) + ch * n_th;
            }
            case Kind::Tabulated:
                return (*table_)(w);
        }
        return 0.0;
    }

    // f(w) = 2 n(w) + 1
    double symmetrized(double w) const { return 2.0 * occupation(w) + 1.0; }

    // Characteristic frequency Omega(w) solving coth(w / Omega) = 2 n(w) + 1.
    // Thermal reservoirs give Omega = 2T identically; only ratios of Omega
    // values enter the Clausius and efficiency bounds.
    double characteristic_frequency(double w) const {
        if (!(w > 0.0))
            throw std::domain_error("characteristic frequency: w must be positive");
        if (kind_ == Kind::Thermal) return 2.0 * temperature_;
        const double f = symmetrized(w);
        if (!(f > 1.0) || !std::isfinite(f))
            throw DegenerateOccupationError(
                "characteristic frequency undefined: occupation vanishes");
        return w / std::atanh(1.0 / f);
    }

    // True when n(w) is strictly decreasing (drives the Planck proposition).
    bool strictly_decreasing() const {
        switch (kind_) {
            case Kind::Thermal:
            case Kind::SqueezedThermal:
                return true;
            case Kind::Tabulated: {
                const auto& y = table_->knots_y();
                for (std::size_t i = 0; i + 1 < y.size(); ++i)
                    if (!(y[i + 1] < y[i])) return false;
                return true;
            }
        }
        return false;
    }

private:
    static void check_temperature(double t) {
        if (!(t > 0.0))
            throw std::invalid_argument("occupation: temperature must be positive");
    }

    Kind kind_ = Kind::Thermal;
    double temperature_ = 1.0;
    double squeezing_ = 0.0;
    std::optional<Pchip> table_;
};

// ------------------------------- Reservoirs ----------------------------------

struct ReservoirSpec {
    std::string label;
    SpectralDensity density;
    OccupationModel occupation;
};

// ------------------------------ Numerics knobs --------------------------------

struct NumericsConfig {
    int n_max = 8;            // Floquet truncation; auto-doubled until the tail
    int n_max_cap = 64;       // converges or this cap is reached
    int k_max = 0;            // heat-current channel cutoff; 0 -> follow n_max
    int panels = 24;          // base quadrature panels per heat integral
    int gl_order = 12;        // Gauss-Legendre nodes per panel
    int refine_levels = 14;   // octaves of panel refinement at response peaks
    double omega_max_mult = 10.0; // upper quadrature limit in units of the cutoff
    double sigma = 0.0;       // Laplace regularization; 0 -> 1e-6 * drive_freq
    double tail_tol = 1e-9;   // relative Floquet tail norm tolerance
    double quad_tol = 1e-10;  // relative tolerance of the kernel quadrature
    double k_tail_tol = 1e-4; // relative tolerance on the last k channel
    double support_threshold = 1e-14; // rate support floor for the bound scan
};

// ------------------------------ Engine config --------------------------------

struct EngineConfig {
    NetworkModel network;
    std::vector<ReservoirSpec> reservoirs;
    NumericsConfig numerics;

    int n_reservoirs() const { return static_cast<int>(reservoirs.size()); }

    double sigma() const {
        return numerics.sigma > 0.0 ? numerics.sigma
                                    : 1e-6 * network.drive_freq;
    }

    int k_max() const { return numerics.k_max > 0 ? numerics.k_max : numerics.n_max; }

    double max_cutoff() const {
        double c = 0.0;
        for (const auto& r : reservoirs) c = std::max(c, r.density.cutoff);
        return c;
    }

    double omega_max() const { return numerics.omega_max_mult * max_cutoff(); }

    void validate() const {
        network.validate();
        if (reservoirs.empty())
            throw std::invalid_argument("config: at least one reservoir required");
        for (std::size_t i = 0; i < reservoirs.size(); ++i) {
            reservoirs[i].density.validate(network.size());
            for (std::size_t j = i + 1; j < reservoirs.size(); ++j)
                if (reservoirs[i].label == reservoirs[j].label)
                    throw std::invalid_argument("config: duplicate reservoir label '" +
                                                reservoirs[i].label + "'");
        }
        if (numerics.n_max < 1 || numerics.n_max_cap < numerics.n_max)
            throw std::invalid_argument("config: invalid Floquet truncation");
        if (numerics.panels < 1 || numerics.gl_order < 2)
            throw std::invalid_argument("config: invalid quadrature settings");
    }
};

// --------------------------- Operation-style API -----------------------------

inline double occupation(const OccupationModel& m, double w) {
    return m.occupation(w);
}

inline double characteristic_frequency(const OccupationModel& m, double w) {
    return m.characteristic_frequency(w);
}

inline MatrixXd spectral_density_value(const SpectralDensity& d, double w) {
    return d.value(w);
}

} // namespace qle::model
