// quadrature.hpp — Gauss-Legendre panel grids and adaptive Gauss-Kronrod
// integration for complex-valued integrands

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <queue>
#include <vector>

#include "qle/common.hpp"

namespace qle::quad {

// ----------------------- Gauss-Legendre base rule ----------------------------

struct Rule {
    std::vector<double> x; // abscissae on (-1, 1)
    std::vector<double> w;
};

// Nodes and weights by Newton iteration on the Legendre polynomial.
inline Rule make_gauss_legendre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

inline const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

// ------------------------------ Panel grids ---------------------------------

// A composite quadrature grid: nodes strictly inside (a, b) with weights.
struct PanelGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline PanelGrid grid_from_breakpoints(const std::vector<double>& breaks, int order) {
    const Rule& rule = gauss_legendre(order);
    PanelGrid g;
    g.nodes.reserve((breaks.size() - 1) * order);
    g.weights.reserve((breaks.size() - 1) * order);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < order; ++i) {
            g.nodes.push_back(c + h * rule.x[i]);
            g.weights.push_back(h * rule.w[i]);
        }
    }
    return g;
}

// A refinement site: geometric panels shrink toward `center` starting from
// half-width `width`, halving `levels` times. Symmetric about the center so
// odd parts of near-pole integrands cancel panel by panel.
struct RefineSite {
    double center;
    double width;
};

// Uniform breakpoints on [a, b] plus geometric refinement around the given
// sites. Used to resolve narrow response peaks sitting on otherwise smooth
// integrands.
inline std::vector<double> refined_breakpoints(double a, double b, int base_panels,
                                               const std::vector<RefineSite>& sites,
                                               int levels) {
    std::vector<double> breaks;
    breaks.push_back(a);
    breaks.push_back(b);
    for (int p = 1; p < base_panels; ++p)
        breaks.push_back(a + (b - a) * p / base_panels);
    for (const auto& site : sites) {
        for (int l = 0; l <= levels; ++l) {
            const double h = site.width * std::pow(2.0, -l);
            for (double s : {site.center - h, site.center + h})
                if (s > a && s < b) breaks.push_back(s);
        }
        if (site.center > a && site.center < b) breaks.push_back(site.center);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [&](double u, double v) {
                                 return std::abs(u - v) < 1e-14 * (b - a);
                             }),
                 breaks.end());
    return breaks;
}

inline PanelGrid refined_grid(double a, double b, int base_panels, int order,
                              const std::vector<RefineSite>& sites, int levels) {
    return grid_from_breakpoints(refined_breakpoints(a, b, base_panels, sites, levels),
                                 order);
}

// --------------------- Adaptive Gauss-Kronrod (7-15) ------------------------

namespace detail {

// Canonical 15-point Kronrod extension of 7-point Gauss on [-1, 1].
inline constexpr double kGK15X[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15W[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kG7W[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class Fn>
inline void gk15(const Fn& f, double a, double b, Complex& value, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Complex k15(0.0, 0.0), g7(0.0, 0.0);
    for (int i = 0; i < 8; ++i) {
        const double x = kGK15X[i];
        Complex fs;
        if (i == 7) {
            fs = f(c);
        } else {
            fs = f(c - h * x) + f(c + h * x);
        }
        k15 += kGK15W[i] * fs;
        if (i % 2 == 1) g7 += kG7W[i / 2] * fs;
    }
    value = h * k15;
    err = std::abs(h * (k15 - g7));
}

struct Interval {
    double a, b, err;
    Complex value;
    bool operator<(const Interval& o) const { return err < o.err; }
};

} // namespace detail

struct AdaptiveResult {
    Complex value;
    double error;
    int evaluations;
};

// Adaptive integration of a complex integrand over the segments defined by
// `breaks` (sorted). Splits the worst interval until the summed error estimate
// drops below max(abs_tol, rel_tol * |I|).
template <class Fn>
inline AdaptiveResult integrate_adaptive(const Fn& f, const std::vector<double>& breaks,
                                         double abs_tol, double rel_tol,
                                         int max_intervals = 4000) {
    std::priority_queue<detail::Interval> queue;
    Complex total(0.0, 0.0);
    double total_err = 0.0;
    int evals = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        detail::Interval iv{breaks[i], breaks[i + 1], 0.0, Complex(0, 0)};
        detail::gk15(f, iv.a, iv.b, iv.value, iv.err);
        evals += 15;
        total += iv.value;
        total_err += iv.err;
        queue.push(iv);
    }
    int n_intervals = static_cast<int>(breaks.size()) - 1;
    auto tol = [&]() { return std::max(abs_tol, rel_tol * std::abs(total)); };
    while (total_err > tol() && n_intervals < max_intervals) {
        detail::Interval worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        for (const auto& [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            detail::Interval iv{lo, hi, 0.0, Complex(0, 0)};
            detail::gk15(f, iv.a, iv.b, iv.value, iv.err);
            evals += 15;
            total += iv.value;
            total_err += iv.err;
            queue.push(iv);
        }
        ++n_intervals;
    }
    if (total_err > tol())
        throw QuadratureError("adaptive quadrature failed to converge", total_err);
    return {total, total_err, evals};
}

} // namespace qle::quad
