#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "loewner/driving.hpp"
#include "loewner/errors.hpp"
#include "loewner/ode.hpp"
#include "loewner/slit_map.hpp"

namespace loewner {

// Discretized trace: ordered polyline with matching capacity times; the
// first vertex is (lambda(0), 0) on the real axis.
struct Trace {
    std::vector<Cpx> vertices;
    std::vector<double> times;
};

struct TracePolicy {
    std::vector<double> singular_times;  // geometric refinement targets
    double refine_ratio = 0.5;
    double refine_floor = 1e-13;  // relative to T
    double max_vertex_gap = std::numeric_limits<double>::infinity();
    std::vector<double> explicit_grid;  // overrides steps when non-empty
};

inline std::vector<double> make_time_grid(double T, int steps, const TracePolicy& policy = {}) {
    if (!policy.explicit_grid.empty()) {
        const auto& g = policy.explicit_grid;
        if (g.size() < 2 || g.front() != 0.0 || std::abs(g.back() - T) > 1e-12 * T)
            throw std::invalid_argument("make_time_grid: explicit grid must span [0, T]");
        for (std::size_t i = 0; i + 1 < g.size(); ++i)
            if (!(g[i] < g[i + 1]))
                throw std::invalid_argument("make_time_grid: explicit grid must increase");
        return g;
    }
    if (policy.singular_times.empty()) return uniform_grid(T, steps);
    return refined_grid(T, steps, policy.singular_times, policy.refine_ratio, policy.refine_floor);
}

namespace detail {

// Square-root tail coefficient: C with lambda(t) ~ lambda(T) + C sqrt(T - t)
// near T, or 0 when the samples do not follow that shape.
inline double sqrt_tail_coefficient(const DrivingFunction& lam) {
    const double T = lam.duration();
    const double lT = lam(T);
    double c_ref = 0.0;
    for (int k = 2; k <= 6; ++k) {
        double rem = T / double(1 << k);
        double c = (lam(T - rem) - lT) / std::sqrt(rem);
        if (k == 2) {
            c_ref = c;
        } else if (std::abs(c - c_ref) > 0.02 * std::max(1.0, std::abs(c_ref))) {
            return 0.0;
        }
    }
    return c_ref;
}

} // namespace detail

// First-order vertical-slit composition of the backward equation: substep k
// grows a slit of capacity dt_k at the right-endpoint driving value x_k, and
// trace vertex k is (h_1^{-1} o ... o h_k^{-1})(x_k).
//
// When T is declared singular and the driver ends in a square-root tail
// lambda(T) + C sqrt(T - t) with |C| >= 4 (a trace landing back on R), the
// final vertex is computed through the scaling property instead of the raw
// tip: the remainder on [T - rem, T] is the C-bubble scaled by sqrt(rem),
// whose landing sits at lambda(T) +- B sqrt(rem) with B = (|C| - sqrt(C^2-16))/2,
// so gamma(T) = g_{T-rem}^{-1}(lambda(T) +- B sqrt(rem)) exactly.  The raw
// tip stalls at the landing (the approach is logarithmic in T - t); the
// pulled-back anchor converges at the chain's ordinary first-order rate.
inline Trace solve_trace(const DrivingFunction& lam, int steps, const TracePolicy& policy = {}) {
    lam.validate();
    if (steps < 1) throw std::invalid_argument("solve_trace: steps must be >= 1");
    const double T = lam.duration();
    std::vector<double> grid = make_time_grid(T, steps, policy);
    const std::size_t n = grid.size() - 1;

    std::vector<double> xs(n), ys(n);
    Trace tr;
    tr.vertices.reserve(n + 1);
    tr.times.reserve(n + 1);
    tr.vertices.push_back(Cpx(lam(0.0), 0.0));
    tr.times.push_back(0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const double dt = grid[k + 1] - grid[k];
        const double xk = lam(grid[k + 1]);
        xs[k] = xk;
        ys[k] = 2.0 * std::sqrt(dt);
        Cpx w(xk, ys[k]);  // tip of the new slit
        for (std::size_t j = k; j-- > 0;) w = inverse_vertical_slit_map(w, xs[j], ys[j]);
        tr.vertices.push_back(w);
        tr.times.push_back(grid[k + 1]);
    }

    bool end_singular = false;
    for (double s : policy.singular_times)
        if (std::abs(s - T) <= 1e-12 * T) end_singular = true;
    if (end_singular) {
        const double C = detail::sqrt_tail_coefficient(lam);
        if (std::abs(C) >= 4.0) {
            const double B = (std::abs(C) - std::sqrt(C * C - 16.0)) / 2.0;
            const double sign = (C >= 0.0) ? 1.0 : -1.0;
            const double rem_target = T / 4.0;
            std::size_t cut = 0;
            for (std::size_t k = 0; k + 1 < grid.size(); ++k)
                if (grid[k] <= T - rem_target) cut = k;
            const double rem = T - grid[cut];
            Cpx w(lam(T) + sign * B * std::sqrt(rem), 0.0);
            for (std::size_t j = cut; j-- > 0;) w = inverse_vertical_slit_map(w, xs[j], ys[j]);
            tr.vertices.back() = w;
        }
    }

    if (std::isfinite(policy.max_vertex_gap)) {
        for (std::size_t k = 1; k < tr.vertices.size(); ++k)
            if (std::abs(tr.vertices[k] - tr.vertices[k - 1]) > policy.max_vertex_gap)
                throw RefinementError("solve_trace: vertex spacing exceeds policy; increase steps");
    }
    return tr;
}

// Independent route to a single trace point: gamma(t) = f_t(xi(0)) via the
// backward equation df/du = -2/(f - xi(u)) with xi(u) = lambda(t - u), using
// the square-root start f(h) ~ xi(0) + 2i sqrt(h).  Useful as a cross-check
// of the slit-map composition.
inline Cpx backward_tip(const DrivingFunction& lam, double t_eval, double tol = 1e-10) {
    lam.validate();
    if (!(t_eval > 0.0) || t_eval > lam.duration() * (1.0 + 1e-12))
        throw std::invalid_argument("backward_tip: t_eval outside (0, duration]");
    auto xi = [&](double u) { return lam(t_eval - u); };
    const double h0 = 1e-16 * t_eval;
    Cpx f(xi(0.0), 2.0 * std::sqrt(h0));
    double u = h0;
    double h = h0;
    auto rhs = [&](double uu, Cpx ff) { return -2.0 / (ff - Cpx(xi(uu), 0.0)); };
    long guard = 0;
    while (u < t_eval) {
        double gap = std::abs(f - Cpx(xi(u), 0.0));
        h = std::min({h, 0.1 * gap * gap, t_eval - u});
        double err;
        Cpx fn = rk45_step(rhs, u, f, h, err);
        double tolerance = tol * std::max(1.0, std::abs(f));
        if (err <= tolerance) {
            u += h;
            f = fn;
        }
        h *= rk45_step_factor(err, tolerance);
        if (!(h > 0.0) || u + h == u) break;
        if (++guard > 50'000'000) throw StepUnderflowError("backward_tip: step budget exhausted");
    }
    return f;
}

} // namespace loewner
