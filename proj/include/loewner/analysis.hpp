#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "loewner/driving.hpp"
#include "loewner/slit_map.hpp"
#include "loewner/trace.hpp"

namespace loewner {

struct NormReport {
    double estimate = 0.0;
    double witness_a = 0.0;
    double witness_b = 0.0;
    // (lag in seconds of capacity time, sup ratio at that dyadic lag class)
    std::vector<std::pair<double, double>> scale_profile;
};

// Certified lower bound of the Lip(1/2) norm: sup |l(b)-l(a)| / sqrt(b-a)
// over sample pairs.  Exhaustive when the pair count fits the budget,
// otherwise stratified by dyadic index lag with full coverage per lag.
inline NormReport lip_norm_estimate(const DrivingFunction& lam, std::size_t pair_budget = 4'000'000) {
    lam.validate();
    const std::size_t n = lam.size();
    NormReport rep;

    auto ratio = [&](std::size_t i, std::size_t j) {
        double dt = lam.times[j] - lam.times[i];
        return std::abs(lam.values[j] - lam.values[i]) / std::sqrt(dt);
    };

    const bool exhaustive = n * (n - 1) / 2 <= pair_budget;
    std::size_t max_lag_bits = 0;
    while ((std::size_t{1} << (max_lag_bits + 1)) < n) ++max_lag_bits;

    rep.scale_profile.assign(max_lag_bits + 1, {0.0, 0.0});
    for (std::size_t bit = 0; bit <= max_lag_bits; ++bit) {
        std::size_t lo = std::size_t{1} << bit;
        std::size_t hi = std::min(n - 1, (std::size_t{2} << bit) - 1);
        double sup = 0.0;
        double lag_time = 0.0;
        for (std::size_t lag = lo; lag <= hi; ++lag) {
            if (!exhaustive && lag != lo && lag != hi && lag != (lo + hi) / 2) continue;
            for (std::size_t i = 0; i + lag < n; ++i) {
                double r = ratio(i, i + lag);
                if (r > sup) {
                    sup = r;
                    lag_time = lam.times[i + lag] - lam.times[i];
                }
                if (r > rep.estimate) {
                    rep.estimate = r;
                    rep.witness_a = lam.times[i];
                    rep.witness_b = lam.times[i + lag];
                }
            }
        }
        rep.scale_profile[bit] = {lag_time, sup};
    }
    return rep;
}

// sup over the overlap of |value_factor * lambda(t / time_factor) - lambda(t)|.
inline double self_similarity_residual(const DrivingFunction& lam, double value_factor,
                                       double time_factor) {
    lam.validate();
    if (!(time_factor > 1.0))
        throw std::invalid_argument("self_similarity_residual: time_factor must be > 1");
    const double T = lam.duration();
    std::size_t inner = 0;
    for (double t : lam.times)
        if (t <= T / time_factor) ++inner;
    if (inner < 2) throw std::invalid_argument("self_similarity_residual: insufficient overlap");

    double sup = 0.0;
    for (double t : lam.times)
        sup = std::max(sup, std::abs(value_factor * lam(t / time_factor) - lam(t)));
    // also probe at the rescaled inner sample times
    for (double t : lam.times) {
        double tt = t * time_factor;
        if (tt <= T) sup = std::max(sup, std::abs(value_factor * lam(t) - lam(tt)));
    }
    return sup;
}

inline double oscillation(const DrivingFunction& lam) {
    auto [lo, hi] = std::minmax_element(lam.values.begin(), lam.values.end());
    return *hi - *lo;
}

// Diameter of a point set via convex hull (Andrew monotone chain) plus a
// quadratic pass over hull points.
inline double polyline_diameter(const std::vector<Cpx>& pts) {
    if (pts.size() < 2) return 0.0;
    std::vector<Cpx> p = pts;
    std::sort(p.begin(), p.end(), [](Cpx a, Cpx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 2) return 0.0;
    auto cross = [](Cpx o, Cpx a, Cpx b) {
        return (a.real() - o.real()) * (b.imag() - o.imag()) -
               (a.imag() - o.imag()) * (b.real() - o.real());
    };
    std::vector<Cpx> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    double d = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j)
            d = std::max(d, std::abs(hull[i] - hull[j]));
    return d;
}

struct CapacityReport {
    double im_ratio = 0.0;    // max Im over trace / (2 sqrt(T))
    double diam_ratio = 0.0;  // |l(T) - l(0)| / (4 diam(trace))
    bool within(double tol) const { return im_ratio <= 1.0 + tol && diam_ratio <= 1.0 + tol; }
};

// Both growth bounds: max Im(K_T) <= 2 sqrt(T) and |l(T)-l(0)| <= 4 diam(K_T).
inline CapacityReport check_capacity_bounds(const DrivingFunction& lam, const Trace& tr) {
    CapacityReport rep;
    const double T = tr.times.back();
    double max_im = 0.0;
    for (const Cpx& v : tr.vertices) max_im = std::max(max_im, v.imag());
    rep.im_ratio = max_im / (2.0 * std::sqrt(T));
    double diam = polyline_diameter(tr.vertices);
    double dl = std::abs(lam(T) - lam(0.0));
    rep.diam_ratio = (diam > 0.0) ? dl / (4.0 * diam) : 0.0;
    return rep;
}

// Random Lip(1/2) test driver: midpoint displacement on a dyadic grid with
// increments bounded by sqrt(scale), rescaled so the sampled norm estimate
// hits target_norm.
inline DrivingFunction make_random_lip_driver(std::uint64_t seed, double target_norm,
                                              double T = 1.0, int levels = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t n = (std::size_t{1} << levels) + 1;
    std::vector<double> v(n, 0.0);
    v.back() = u(rng) * std::sqrt(T);
    for (int lev = 0; lev < levels; ++lev) {
        std::size_t stride = (n - 1) >> lev;
        double bump = std::sqrt(double(stride) / double(n - 1) * T);
        for (std::size_t i = 0; i + stride < n; i += stride) {
            std::size_t mid = i + stride / 2;
            v[mid] = 0.5 * (v[i] + v[i + stride]) + 0.6 * bump * u(rng);
        }
    }
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = T * double(i) / double(n - 1);
    auto lam = make_driver(std::move(times), std::move(v));
    double est = lip_norm_estimate(lam).estimate;
    if (est > 0.0) {
        for (double& val : lam.values) val *= target_norm / est;
    }
    return lam;
}

} // namespace loewner
