#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner {

// Map-composition reads the right-endpoint value per substep; norm
// estimation and plotting interpolate linearly between samples.
enum class Interp { PiecewiseConstRight, Linear };

// Sampled driving term lambda(t) in half-plane-capacity time.
// times are strictly increasing with times[0] == 0.
struct DrivingFunction {
    std::vector<double> times;
    std::vector<double> values;
    Interp interp = Interp::Linear;

    double duration() const { return times.back(); }
    std::size_t size() const { return times.size(); }

    void validate() const {
        if (times.size() != values.size())
            throw std::invalid_argument("driving: times/values length mismatch");
        if (times.size() < 2)
            throw std::invalid_argument("driving: need at least 2 samples");
        if (times.front() != 0.0)
            throw std::invalid_argument("driving: times must start at 0");
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            if (!(times[i] < times[i + 1]))
                throw std::invalid_argument("driving: times must be strictly increasing");
        for (std::size_t i = 0; i < times.size(); ++i)
            if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
                throw NumericalError("driving: non-finite sample");
    }

    // Evaluate at t, clamping to the domain endpoints.  Piecewise-constant
    // reads the right-endpoint sample: values[i] on (times[i-1], times[i]].
    double operator()(double t) const {
        if (t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        if (interp == Interp::PiecewiseConstRight) {
            auto it = std::lower_bound(times.begin(), times.end(), t);
            return values[static_cast<std::size_t>(it - times.begin())];
        }
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times.begin());
        double t0 = times[i - 1], t1 = times[i];
        double w = (t - t0) / (t1 - t0);
        return values[i - 1] * (1.0 - w) + values[i] * w;
    }
};

inline DrivingFunction make_driver(std::vector<double> times, std::vector<double> values,
                                   Interp interp = Interp::Linear) {
    DrivingFunction d{std::move(times), std::move(values), interp};
    d.validate();
    return d;
}

inline std::vector<double> uniform_grid(double T, int n) {
    if (!(T > 0.0) || n < 1) throw std::invalid_argument("uniform_grid: need T > 0, n >= 1");
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) g[static_cast<std::size_t>(k)] = T * (double(k) / double(n));
    g.back() = T;
    return g;
}

// Uniform grid plus geometric refinement toward each singular time, with
// spacing shrinking by `ratio` down to floor_rel * T.
inline std::vector<double> refined_grid(double T, int n, const std::vector<double>& singular_times,
                                        double ratio = 0.5, double floor_rel = 1e-13) {
    std::vector<double> g = uniform_grid(T, n);
    const double h0 = T / n;
    for (double s : singular_times) {
        if (s < 0.0 || s > T) throw std::invalid_argument("refined_grid: singular time outside [0,T]");
        for (double h = h0 * ratio; h > floor_rel * T; h *= ratio) {
            if (s - h > 0.0) g.push_back(s - h);
            if (s + h < T) g.push_back(s + h);
        }
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(),
                        [T](double a, double b) { return std::abs(a - b) <= 1e-16 * T; }),
            g.end());
    g.front() = 0.0;
    g.back() = T;
    return g;
}

inline DrivingFunction sample_driver(const std::function<double(double)>& f,
                                     const std::vector<double>& grid,
                                     Interp interp = Interp::Linear) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    return make_driver(grid, std::move(v), interp);
}

inline DrivingFunction constant_driver(double c, double T) {
    return make_driver({0.0, T}, {c, c});
}

// Resample onto a uniform capacity grid (linear interpolation).  Raw
// extraction output keeps one sample per absorbed vertex; norm estimation
// works on this resampled form so sub-discretization artifacts do not
// dominate the pair ratios.
inline DrivingFunction resample_uniform(const DrivingFunction& lam, int n) {
    lam.validate();
    if (n < 1) throw std::invalid_argument("resample_uniform: n must be >= 1");
    std::vector<double> ts(static_cast<std::size_t>(n) + 1), vs(static_cast<std::size_t>(n) + 1);
    const double T = lam.duration();
    for (int k = 0; k <= n; ++k) {
        ts[static_cast<std::size_t>(k)] = T * double(k) / double(n);
        vs[static_cast<std::size_t>(k)] = lam(ts[static_cast<std::size_t>(k)]);
    }
    return make_driver(std::move(ts), std::move(vs), lam.interp);
}

// lambda(t) = k * sqrt(t) on [0, T].
inline DrivingFunction sqrt_driver(double k, double T, int samples = 2048) {
    auto g = refined_grid(T, samples, {0.0});
    return sample_driver([k](double t) { return k * std::sqrt(t); }, g);
}

// lambda(t) = C * sqrt(1 - t/T) * sqrt(T): the C*sqrt(T-t) bubble family,
// normalized so the Lip(1/2) norm is C for any T.
inline DrivingFunction bubble_driver(double C, double T = 1.0, int samples = 2048) {
    auto g = refined_grid(T, samples, {T});
    return sample_driver([C, T](double t) { return C * std::sqrt(std::max(0.0, T - t)); }, g);
}

// t -> +-(r * lambda(t / r^2)) + x on [0, r^2 T].
inline DrivingFunction transform_driving(const DrivingFunction& lam, double r, double x,
                                         bool reflect) {
    lam.validate();
    if (!(r > 0.0)) throw std::invalid_argument("transform_driving: r must be > 0");
    DrivingFunction out;
    out.interp = lam.interp;
    out.times.resize(lam.size());
    out.values.resize(lam.size());
    const double sign = reflect ? -1.0 : 1.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        out.times[i] = r * r * lam.times[i];
        out.values[i] = sign * (r * lam.values[i]) + x;
    }
    return out;
}

// Concatenate lambda1 on [0,T1] with lambda2 on [0,T2]; requires
// lambda2(0) == lambda1(T1) within junction_tol.
inline DrivingFunction concat_driving(const DrivingFunction& a, const DrivingFunction& b,
                                      double junction_tol = 1e-9) {
    a.validate();
    b.validate();
    if (std::abs(b.values.front() - a.values.back()) > junction_tol)
        throw std::invalid_argument("concat_driving: discontinuous junction");
    DrivingFunction out;
    out.interp = a.interp;
    out.times = a.times;
    out.values = a.values;
    const double T1 = a.duration();
    for (std::size_t i = 1; i < b.size(); ++i) {
        out.times.push_back(T1 + b.times[i]);
        out.values.push_back(b.values[i]);
    }
    out.validate();
    return out;
}

} // namespace loewner
