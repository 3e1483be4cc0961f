#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "loewner/driving.hpp"
#include "loewner/errors.hpp"
#include "loewner/evolve.hpp"
#include "loewner/ode.hpp"

namespace loewner {

// Time-changed coordinates: s = -ln(1-t), x_s = G_s(x), sigma(s) = e^{s/2} lambda(1-e^{-s}).
struct FlowState {
    double s = 0.0;
    double x = 0.0;
    double sigma = 0.0;
};

struct FixedPoints {
    double A = 2.0;
    double B = 2.0;
};

// A_s = (sigma + sqrt(sigma^2-16))/2, B_s = (sigma - sqrt(sigma^2-16))/2;
// both collapse to 2 when sigma < 4.
inline FixedPoints fixed_points(double sigma_val) {
    if (sigma_val >= 4.0) {
        const double r = std::sqrt(sigma_val * sigma_val - 16.0);
        return {(sigma_val + r) / 2.0, (sigma_val - r) / 2.0};
    }
    return {2.0, 2.0};
}

// u -> (lambda(T u) - lambda(T)) / sqrt(T) on [0,1]; Lip(1/2) norm preserved.
inline DrivingFunction normalize_at_capture(const DrivingFunction& lam, double T) {
    lam.validate();
    if (!(T > 0.0) || T > lam.duration() * (1.0 + 1e-12))
        throw std::invalid_argument("normalize_at_capture: T outside (0, duration]");
    const double lT = lam(T);
    const double rt = std::sqrt(T);
    std::vector<double> ts, vs;
    ts.reserve(lam.size());
    vs.reserve(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (lam.times[i] >= T) break;
        ts.push_back(lam.times[i] / T);
        vs.push_back((lam.values[i] - lT) / rt);
    }
    ts.push_back(1.0);
    vs.push_back(0.0);
    return make_driver(std::move(ts), std::move(vs), lam.interp);
}

// sigma(s) = e^{s/2} lambda(1 - e^{-s}) for a driver normalized to [0,1].
inline double sigma_of(const DrivingFunction& lam_norm, double s) {
    if (s < 0.0) throw std::invalid_argument("sigma_of: s must be >= 0");
    const double t = -std::expm1(-s);  // 1 - e^{-s} without cancellation
    return std::exp(s / 2.0) * lam_norm(t);
}

struct FlowOptions {
    double tol = 1e-10;
    double s_step_max = 5e-3;
    double hit_eps = 1e-10;
    std::size_t max_samples = 2'000'000;
};

struct FlowPath {
    std::vector<double> s;
    std::vector<double> x;
    bool hit = false;  // |x_s - sigma(s)| underflowed
    double hit_s = std::numeric_limits<double>::quiet_NaN();
    // maximal runs of one sign of dx/ds: (s_begin, s_end, direction in {-1,0,+1})
    std::vector<std::tuple<double, double, int>> monotone_segments;
};

// Integrate dx/ds = -(x^2 - sigma x + 4) / (2 (sigma - x)) from x0 to s_max.
inline FlowPath flow_x(const std::function<double(double)>& sigma, double x0, double s_max,
                       FlowOptions opt = {}) {
    if (!(s_max > 0.0)) throw std::invalid_argument("flow_x: s_max must be > 0");
    if (x0 == sigma(0.0)) throw std::invalid_argument("flow_x: x0 coincides with sigma(0)");
    FlowPath path;
    auto rhs = [&](double s, double x) {
        const double sg = sigma(s);
        return -(x * x - sg * x + 4.0) / (2.0 * (sg - x));
    };
    double s = 0.0, x = x0, h = opt.s_step_max;
    path.s.push_back(s);
    path.x.push_back(x);
    while (s < s_max) {
        const double gap = std::abs(sigma(s) - x);
        if (gap <= opt.hit_eps * std::max(1.0, std::abs(x))) {
            path.hit = true;
            path.hit_s = s;
            break;
        }
        h = std::min({h, opt.s_step_max, s_max - s, 0.2 * gap * gap + 1e-12});
        double err;
        double xn = rk45_step(rhs, s, x, h, err);
        const double tolerance = opt.tol * std::max(1.0, std::abs(x));
        if (err <= tolerance) {
            s += h;
            x = xn;
            path.s.push_back(s);
            path.x.push_back(x);
            if (path.s.size() > opt.max_samples)
                throw StepUnderflowError("flow_x: sample budget exhausted");
        }
        h *= rk45_step_factor(err, tolerance);
        if (!(h > 0.0) || s + h == s) {
            path.hit = true;
            path.hit_s = s;
            break;
        }
    }
    // classify monotone runs
    const double flat_eps = 1e-12 * std::max(1.0, std::abs(x0));
    int dir = 0;
    double seg_start = path.s.empty() ? 0.0 : path.s.front();
    for (std::size_t i = 1; i < path.s.size(); ++i) {
        double dx = path.x[i] - path.x[i - 1];
        int d = (dx > flat_eps) ? 1 : (dx < -flat_eps ? -1 : 0);
        if (i == 1) {
            dir = d;
        } else if (d != dir) {
            path.monotone_segments.emplace_back(seg_start, path.s[i - 1], dir);
            seg_start = path.s[i - 1];
            dir = d;
        }
    }
    if (path.s.size() > 1) path.monotone_segments.emplace_back(seg_start, path.s.back(), dir);
    return path;
}

// Lemma constants: L = 2 + eps - sqrt(eps(eps+4)), I = [L, L + 5 sqrt(eps)],
// Delta = 10 sqrt(eps) / (4 - M).
struct LemmaConstants {
    double epsilon = 0.0;
    double M = 0.0;
    double L = 0.0;
    double I_lo = 0.0;
    double I_hi = 0.0;
    double S0 = std::numeric_limits<double>::quiet_NaN();  // observed, not closed-form
    double Delta = std::numeric_limits<double>::quiet_NaN();
};

inline LemmaConstants lemma_interval_constants(double eps) {
    if (!(eps > 0.0) || !(eps < 0.5))
        throw std::invalid_argument("lemma_interval_constants: need 0 < eps < 1/2");
    LemmaConstants c;
    c.epsilon = eps;
    c.L = 2.0 + eps - std::sqrt(eps * (eps + 4.0));
    c.I_lo = c.L;
    c.I_hi = c.L + 5.0 * std::sqrt(eps);
    return c;
}

inline double lemma_tail_delta(double eps, double M) {
    if (!(eps > 0.0) || !(eps < 0.5)) throw std::invalid_argument("lemma_tail_delta: need 0 < eps < 1/2");
    if (!(M > 0.0) || !(M < 4.0)) throw std::invalid_argument("lemma_tail_delta: need 0 < M < 4");
    return 10.0 * std::sqrt(eps) / (4.0 - M);
}

// Minimum of -dx/ds over x for sigma == M, attained at x = M - 2.
inline double lemma_drift_bound(double M) { return (4.0 - M) / 2.0; }

struct LemmaIntervalReport {
    bool precondition_ok = false;  // x captured at t = 1
    double S0_observed = std::numeric_limits<double>::quiet_NaN();
    bool containment = false;
    FlowPath path;
};

// Run the transformed flow for a captured point and report the first entry
// time into I and whether it stays afterwards (up to s_max).
inline LemmaIntervalReport verify_lemma_interval(const DrivingFunction& lam_norm, double x,
                                                 double eps, double s_max) {
    LemmaIntervalReport rep;
    EvolveOptions eo;
    eo.tol = 1e-9;
    auto verdict = evolve_point(lam_norm, Cpx(x, 0.0), 0.0, 1.0, eo);
    rep.precondition_ok = (verdict.fate == Fate::Captured);
    if (!rep.precondition_ok) return rep;

    auto consts = lemma_interval_constants(eps);
    auto sig = [&](double s) { return sigma_of(lam_norm, s); };
    rep.path = flow_x(sig, x, s_max);
    const double margin = 1e-6 * std::max(1.0, std::abs(x));
    bool inside_seen = false;
    bool stayed = true;
    for (std::size_t i = 0; i < rep.path.s.size(); ++i) {
        const bool inside =
            rep.path.x[i] >= consts.I_lo - margin && rep.path.x[i] <= consts.I_hi + margin;
        if (!inside_seen && inside) {
            inside_seen = true;
            rep.S0_observed = rep.path.s[i];
        } else if (inside_seen && !inside) {
            stayed = false;
        }
    }
    rep.containment = inside_seen && stayed;
    return rep;
}

// Worst-case coefficient of sqrt(e^{-s} T2) in Eq. (8) with t1 at the right
// endpoint of I1 and the proof's bounds on T2-t1, Ti-ti, |t2-T1|:
//   F(M,eps) = (4+2e) sqrt(2 e^{-D} + (1-e^{-D})/2) - M e^{-D/2}
//            + (4+2e) sqrt((1-e^{-D})/2)            - M e^{-D/2}
// with D = 10 sqrt(eps)/(4-M).  Every term of the bound scales as
// sqrt(e^{-s} T2), so the margin is s-independent.
inline double phase_inequality_margin(double M, double eps) {
    if (!(M > 0.0) || !(M < 4.0)) throw std::invalid_argument("phase_inequality_margin: need 0 < M < 4");
    if (!(eps > 0.0)) throw std::invalid_argument("phase_inequality_margin: need eps > 0");
    const double D = 10.0 * std::sqrt(eps) / (4.0 - M);
    const double ed = std::exp(-D);
    const double eh = std::exp(-D / 2.0);
    const double c = 4.0 + 2.0 * eps;
    return c * std::sqrt(2.0 * ed + (1.0 - ed) / 2.0) - M * eh + c * std::sqrt((1.0 - ed) / 2.0) -
           M * eh;
}

// The unfactored left-hand side of Eq. (8) at explicit s and T2, with the
// same worst-case substitutions; equals sqrt(e^{-s} T2) * margin.
inline double phase_inequality_unfactored(double M, double eps, double s, double T2) {
    const double D = 10.0 * std::sqrt(eps) / (4.0 - M);
    const double es = std::exp(-s), esd = std::exp(-(s + D));
    const double c = 4.0 + 2.0 * eps;
    const double T2_t1 = (2.0 * esd + 0.5 * (es - esd)) * T2;
    const double Ti_ti = esd * T2;
    const double t2_T1 = 0.5 * (es - esd) * T2;
    return c * std::sqrt(T2_t1) - M * std::sqrt(Ti_ti) + c * std::sqrt(t2_T1) - M * std::sqrt(Ti_ti);
}

struct CaptureRecord {
    double x = 0.0;
    double T_x = 0.0;
    std::vector<std::pair<double, double>> flow_trace;  // optional (s, x_s) samples
};

struct CaptureScanOptions {
    double tol = 1e-9;
    double capture_level = 1e-6;
    bool record_flow = false;
    double flow_s_max = 8.0;
};

struct CaptureScanResult {
    std::vector<CaptureRecord> captured;  // sorted by x
    std::vector<std::pair<double, std::string>> errors;
};

// Evolve n equally spaced real points of [x_lo, x_hi]; captured points are
// reported with their bisected capture times.  Per-point failures are
// recorded and the scan continues.
inline CaptureScanResult capture_scan(const DrivingFunction& lam, double x_lo, double x_hi, int n,
                                      CaptureScanOptions opt = {}) {
    lam.validate();
    if (n < 1 || !(x_lo <= x_hi)) throw std::invalid_argument("capture_scan: bad range");
    CaptureScanResult out;
    const double T = lam.duration();
    for (int j = 0; j < n; ++j) {
        const double x = (n == 1) ? x_lo : x_lo + (x_hi - x_lo) * double(j) / double(n - 1);
        try {
            EvolveOptions eo;
            eo.tol = opt.tol;
            eo.capture_level = opt.capture_level;
            auto res = evolve_point(lam, Cpx(x, 0.0), 0.0, T, eo);
            if (res.fate == Fate::Captured) {
                CaptureRecord rec;
                rec.x = x;
                rec.T_x = res.capture_time;
                if (opt.record_flow) {
                    auto norm = normalize_at_capture(lam, T);
                    auto sig = [&](double s) { return sigma_of(norm, s); };
                    auto path = flow_x(sig, (x - lam(T)) / std::sqrt(T), opt.flow_s_max);
                    rec.flow_trace.reserve(path.s.size());
                    for (std::size_t i = 0; i < path.s.size(); ++i)
                        rec.flow_trace.emplace_back(path.s[i], path.x[i]);
                }
                out.captured.push_back(std::move(rec));
            }
        } catch (const std::exception& e) {
            out.errors.emplace_back(x, e.what());
        }
    }
    return out;
}

} // namespace loewner
