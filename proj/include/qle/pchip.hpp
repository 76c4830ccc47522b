// pchip.hpp — monotonicity-preserving piecewise cubic Hermite interpolation

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qle {

// Fritsch-Carlson slopes: the interpolant never overshoots the data, so
// tabulated occupations stay nonnegative and keep their local monotonicity.
class Pchip {
public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("Pchip: need >= 2 points and matching sizes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw std::invalid_argument("Pchip: abscissae must be strictly increasing");

        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        d_.assign(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d_[0] = edge_slope(h[0], n > 2 ? h[1] : h[0], delta[0],
                           n > 2 ? delta[1] : delta[0]);
        d_[n - 1] = edge_slope(h[n - 2], n > 2 ? h[n - 3] : h[n - 2], delta[n - 2],
                               n > 2 ? delta[n - 3] : delta[n - 2]);
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

    // Evaluation outside the grid is a hard error, never extrapolation.
    double operator()(double x) const {
        if (!(x >= x_.front() && x <= x_.back()))
            throw std::out_of_range("Pchip: argument outside tabulated range");
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i =
            std::min<std::size_t>(x_.size() - 2,
                                  static_cast<std::size_t>(
                                      std::max<std::ptrdiff_t>(0, it - x_.begin() - 1)));
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
    }

private:
    static double edge_slope(double h0, double h1, double del0, double del1) {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0)
            d = 0.0;
        else if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0))
            d = 3.0 * del0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

} // namespace qle
