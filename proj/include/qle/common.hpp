// common.hpp — shared error types and small numeric helpers

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qle {

using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// ------------------------------- Errors -------------------------------------

// Quadrature failed to reach its tolerance; carries the residual estimate.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }
private:
    double residual_;
};

// Linear solve hit a singular or near-singular matrix; carries the
// reciprocal condition number estimate.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }
private:
    double rcond_;
};

// Occupation has n(w) <= 0, so the characteristic frequency is undefined.
class DegenerateOccupationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested fit window runs past the recurrence horizon of a discretized bath,
// or the fitted window is visibly non-stationary.
class StaleWindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Time integration accuracy check (step halving) failed.
class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Efficiency requested outside the work-extraction regime; carries the sign
// diagnostics of the heat bookkeeping.
class NotAnEngineError : public std::runtime_error {
public:
    NotAnEngineError(const std::string& what, double work,
                     double dq_in_mag, double dq_out, double dq_nr)
        : std::runtime_error(what), work_(work), dq_in_mag_(dq_in_mag),
          dq_out_(dq_out), dq_nr_(dq_nr) {}
    double work() const noexcept { return work_; }
    double dq_in_mag() const noexcept { return dq_in_mag_; }
    double dq_out() const noexcept { return dq_out_; }
    double dq_nr() const noexcept { return dq_nr_; }
private:
    double work_, dq_in_mag_, dq_out_, dq_nr_;
};

// --------------------------- Compensated sums -------------------------------

// Kahan-Neumaier compensated accumulator. Reductions over quadrature nodes use
// this so that split/recombine identities hold to machine precision and
// results are independent of accumulation grouping.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + comp; }
};

// ------------------------------ Parallel map --------------------------------

// Deterministic parallel loop: results must be written to preassigned slots
// by index. Falls back to serial execution for n_threads <= 1.
template <class Fn>
inline void parallel_for(std::size_t count, int n_threads, Fn&& fn) {
    if (n_threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace qle
