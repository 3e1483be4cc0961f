#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "loewner/driving.hpp"
#include "loewner/errors.hpp"
#include "loewner/ode.hpp"
#include "loewner/slit_map.hpp"

namespace loewner {

enum class Fate { Alive, Captured };

struct EvolveResult {
    Fate fate = Fate::Alive;
    Cpx endpoint{0.0, 0.0};  // valid when Alive
    double capture_time = std::numeric_limits<double>::quiet_NaN();
    long rhs_evals = 0;
};

struct EvolveOptions {
    double tol = 1e-10;           // local error tolerance; also T_x accuracy
    double capture_level = 1e-6;  // capture when gap <= level * sqrt(t1 - t0)
    double lip_hint = 0.0;        // Lip(1/2) modulus bound; 0 = estimate from samples
    long max_steps = 20'000'000;
};

namespace detail {

inline double sampled_lip_modulus(const DrivingFunction& lam, double t0, double t1) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
        double a = lam.times[i], b = lam.times[i + 1];
        if (b < t0 || a > t1) continue;
        double dt = b - a;
        if (dt > 0.0) m = std::max(m, std::abs(lam.values[i + 1] - lam.values[i]) / std::sqrt(dt));
    }
    return m;
}

} // namespace detail

// Evolve a point under dg/dt = 2 / (g - lambda(t)), worked in the squared
// gap u(t) = (g_t - lambda(t))^2, which satisfies the regular equation
//
//     du/dt = 4 - 2 lambda'(t) sqrt(u)
//
// on every sampling interval of lambda.  The gap itself is recovered as the
// branch of sqrt(u) with nonnegative imaginary part, so interior points pass
// through pinches g -> lambda (the point being overrun by the trace) onto
// the boundary continuation consistent with the elementary slit maps; for
// the constant driver this reproduces sqrt(4t + z^2) exactly.
//
// Real starting points keep u real with a fixed side sign.  They are
// captured at the first time the gap crosses capture_level * sqrt(t1 - t0),
// provided the remaining driving budget can still close the gap
// (gap <= K_eff * sqrt(t1 - t)); the crossing is located by bisection,
// refined relative to the distance from t1 so that captures accumulating at
// the final time keep distinct reported times.
inline EvolveResult evolve_point(const DrivingFunction& lam, Cpx z0, double t0, double t1,
                                 EvolveOptions opt = {}) {
    lam.validate();
    if (!(t0 >= 0.0) || !(t0 < t1) || t1 > lam.duration() * (1.0 + 1e-12))
        throw std::invalid_argument("evolve_point: need 0 <= t0 < t1 <= duration");
    if (z0.imag() < 0.0) throw std::invalid_argument("evolve_point: z0 below the real axis");
    const bool on_axis = (z0.imag() == 0.0);
    const Cpx s0 = z0 - Cpx(lam(t0), 0.0);
    if (on_axis && s0.real() == 0.0)
        throw std::invalid_argument("evolve_point: z0 coincides with lambda(t0)");

    const double span = t1 - t0;
    const double level = opt.capture_level * std::sqrt(span);
    const double level2 = level * level;
    const double K = (opt.lip_hint > 0.0) ? opt.lip_hint : detail::sampled_lip_modulus(lam, t0, t1);
    const double K_eff = std::max(8.0, 1.5 * K);
    const double side = (on_axis && s0.real() < 0.0) ? -1.0 : 1.0;

    EvolveResult res;

    auto gap_from_u = [&](Cpx u) -> Cpx {
        if (on_axis) return Cpx(side * std::sqrt(std::max(u.real(), 0.0)), 0.0);
        return upper_sqrt(u);
    };

    // One lambda sampling interval at a time; the slope is constant there.
    const auto& ts = lam.times;
    const auto& vs = lam.values;
    std::size_t j = 0;
    while (j + 2 < ts.size() && ts[j + 1] <= t0) ++j;

    Cpx u = s0 * s0;
    double t = t0;
    double lambda_ref = lam(t0);  // lambda value the current u is measured against
    long steps = 0;
    bool armed = true;

    auto u_scale = [&](Cpx uu) { return std::max({std::abs(uu), 1e-8 * std::abs(s0 * s0), 1e-14}); };

    while (t < t1) {
        const double seg_end = std::min(t1, (j + 1 < ts.size()) ? ts[j + 1] : t1);
        double slope = 0.0;
        if (lam.interp == Interp::Linear && j + 1 < ts.size())
            slope = (vs[j + 1] - vs[j]) / (ts[j + 1] - ts[j]);

        // Effective lambda at segment entry; piecewise-constant drivers jump
        // here and the gap shifts by the jump.
        const double lam_entry = (lam.interp == Interp::PiecewiseConstRight && j + 1 < ts.size())
                                     ? vs[j + 1]
                                     : vs[j] + slope * (t - ts[j]);
        if (lam_entry != lambda_ref) {
            Cpx s = gap_from_u(u) - Cpx(lam_entry - lambda_ref, 0.0);
            u = s * s;
            lambda_ref = lam_entry;
        }

        auto rhs = [&](double, Cpx uu) {
            ++res.rhs_evals;
            return Cpx(4.0, 0.0) - 2.0 * slope * gap_from_u(uu);
        };

        double h = std::max(seg_end - t, 0.0);
        while (t < seg_end) {
            if (++steps > opt.max_steps) throw StepUnderflowError("evolve_point: step budget exhausted");
            h = std::min(h, seg_end - t);
            double err;
            Cpx unew = rk45_step(rhs, t, u, h, err);
            const double tolerance = opt.tol * u_scale(u);
            if (!std::isfinite(unew.real()) || !std::isfinite(unew.imag()))
                throw NumericalError("evolve_point: non-finite state");
            if (err <= tolerance) {
                const double tnew = t + h;
                if (on_axis && armed && unew.real() <= level2) {
                    // Bracketed crossing of the capture level in [t, tnew].
                    double ta = t, tb = tnew;
                    Cpx ua = u;
                    for (int it = 0; it < 240; ++it) {
                        const double width = tb - ta;
                        if (width <= opt.tol && width <= 0.01 * std::max(t1 - tb, 1e-14 * span)) break;
                        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, tb))
                            break;
                        const double tm = 0.5 * (ta + tb);
                        double e2;
                        Cpx um = rk45_step(rhs, ta, ua, tm - ta, e2);
                        if (um.real() <= level2) {
                            tb = tm;
                        } else {
                            ta = tm;
                            ua = um;
                        }
                    }
                    if (level <= K_eff * std::sqrt(std::max(t1 - tb, 0.0)) + 1e-9 * level) {
                        res.fate = Fate::Captured;
                        res.capture_time = tb;
                        return res;
                    }
                    armed = false;  // near miss: remaining budget cannot close the gap
                }
                if (on_axis && !armed && unew.real() > 4.0 * level2) armed = true;
                if (on_axis && unew.real() < 0.0) {
                    // Safety net: transversal pinch without a detected level
                    // crossing (disarmed near-miss that closed after all).
                    res.fate = Fate::Captured;
                    res.capture_time = tnew;
                    return res;
                }
                t = tnew;
                u = unew;
            }
            h *= rk45_step_factor(err, tolerance);
            if (!(h > 0.0) || t + h == t) {
                if (t >= seg_end * (1.0 - 1e-15)) break;
                throw StepUnderflowError("evolve_point: step size underflow");
            }
        }
        lambda_ref = (lam.interp == Interp::PiecewiseConstRight && j + 1 < ts.size())
                         ? vs[j + 1]
                         : vs[j] + slope * (t - ts[j]);
        if (j + 2 < ts.size() && seg_end < t1) {
            ++j;
        } else if (seg_end >= t1) {
            break;
        }
    }

    res.fate = Fate::Alive;
    res.endpoint = Cpx(lambda_ref, 0.0) + gap_from_u(u);
    return res;
}

} // namespace loewner
