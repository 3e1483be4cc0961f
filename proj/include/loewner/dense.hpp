#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "loewner/analysis.hpp"
#include "loewner/driving.hpp"
#include "loewner/slit_map.hpp"
#include "loewner/trace.hpp"
#include "loewner/welding.hpp"

namespace loewner {

// Radius and passage time of the unique intersection of the ray
// {r e^{i theta}} with the base trace, tabulated over the angle window
// (0, pi/3].  Includes the synthetic node theta = 0 -> (r = 2, tau = 1),
// the landing point of the base curve.
struct RayTable {
    std::vector<double> theta;   // increasing, theta[0] == 0
    std::vector<double> radius;  // r_theta
    std::vector<double> tau;     // capacity time at which the trace passes
    double theta_max = 0.0;
    double r_min = 0.0;

    std::pair<double, double> lookup(double th) const {
        if (!(th >= 0.0) || th > theta_max * (1.0 + 1e-12))
            throw std::invalid_argument("RayTable: angle outside window");
        auto it = std::lower_bound(theta.begin(), theta.end(), th);
        std::size_t i = static_cast<std::size_t>(it - theta.begin());
        if (i == 0) return {radius.front(), tau.front()};
        if (i >= theta.size()) return {radius.back(), tau.back()};
        double w = (th - theta[i - 1]) / (theta[i] - theta[i - 1]);
        return {radius[i - 1] * (1.0 - w) + radius[i] * w, tau[i - 1] * (1.0 - w) + tau[i] * w};
    }
};

// The scaling family of Section 3.1: the trace of t -> 4 - 4 sqrt(1-t), a
// simple curve from 0 to 2 swept once by every ray from the origin with
// angle in (0, pi/2); scaled copies of it join x to z.
struct BaseFamily {
    DrivingFunction driver;  // 4 - 4 sqrt(1-t) on [0,1]
    Trace base_trace;
    RayTable rays;
};

namespace detail {

inline double folded_angle(Cpx d) { return std::atan2(d.imag(), std::abs(d.real())); }

} // namespace detail

// Tabulate the base trace and its ray table.  The unreliable stalled tail of
// the slit composition is replaced by backward-equation tip samples before
// walking angles, so radii near the landing are trustworthy.
inline BaseFamily build_base_family(int resolution = 4096, int table_size = 512) {
    BaseFamily fam;
    auto grid = refined_grid(1.0, resolution, {1.0});
    fam.driver =
        sample_driver([](double t) { return 4.0 - 4.0 * std::sqrt(std::max(0.0, 1.0 - t)); }, grid);
    TracePolicy pol;
    pol.singular_times = {1.0};
    Trace tr = solve_trace(fam.driver, resolution, pol);
    const Cpx landing = tr.vertices.back();

    // keep the well-resolved part, then append backward-ODE tail samples
    Trace rebuilt;
    for (std::size_t i = 0; i + 1 < tr.vertices.size(); ++i) {
        if (tr.times[i] <= 0.75) {
            rebuilt.vertices.push_back(tr.vertices[i]);
            rebuilt.times.push_back(tr.times[i]);
        }
    }
    for (double rem = 0.25; rem > 1e-10; rem *= 0.80) {
        rebuilt.vertices.push_back(backward_tip(fam.driver, 1.0 - rem));
        rebuilt.times.push_back(1.0 - rem);
    }
    rebuilt.vertices.push_back(landing);
    rebuilt.times.push_back(1.0);
    fam.base_trace = std::move(rebuilt);

    const auto& v = fam.base_trace.vertices;
    const auto& times = fam.base_trace.times;
    fam.rays.theta_max = M_PI / 3.0;
    fam.rays.theta.push_back(0.0);
    fam.rays.radius.push_back(2.0);
    fam.rays.tau.push_back(1.0);

    for (int i = 1; i <= table_size; ++i) {
        const double th = fam.rays.theta_max * double(i) / double(table_size);
        const Cpx dir(std::cos(th), std::sin(th));
        // first sign change of cross(dir, vertex) along the curve
        int hits = 0;
        double r_hit = 0.0, tau_hit = 0.0;
        for (std::size_t k = 1; k + 1 < v.size(); ++k) {
            double c0 = dir.real() * v[k].imag() - dir.imag() * v[k].real();
            double c1 = dir.real() * v[k + 1].imag() - dir.imag() * v[k + 1].real();
            if ((c0 > 0.0 && c1 <= 0.0) || (c0 < 0.0 && c1 >= 0.0)) {
                double w = c0 / (c0 - c1);
                Cpx p = v[k] + (v[k + 1] - v[k]) * w;
                double r = std::abs(p);
                if (r > 1e-6) {
                    ++hits;
                    r_hit = r;
                    tau_hit = times[k] + (times[k + 1] - times[k]) * w;
                }
            }
        }
        if (hits != 1)
            throw NumericalError("build_base_family: ray intersection not unique; raise resolution");
        fam.rays.theta.push_back(th);
        fam.rays.radius.push_back(r_hit);
        fam.rays.tau.push_back(tau_hit);
    }
    fam.rays.r_min = *std::min_element(fam.rays.radius.begin() + 1, fam.rays.radius.end());
    if (!(fam.rays.r_min > 0.0))
        throw NumericalError("build_base_family: vanishing ray radius in window");
    return fam;
}

struct SegmentDriver {
    DrivingFunction driver;  // on [0, sigma]
    double sigma = 0.0;      // capacity at which the trace reaches z
    bool mirrored = false;
};

// Driver of a simple curve from x to z with Lip(1/2) norm at most 4:
// constant when z is straight above x, otherwise the reflected/translated
// bubble family scaled so the ray through z meets the base trace, truncated
// at the passage time.  The target angle must lie in the table window;
// callers wait first otherwise.
inline SegmentDriver segment_driver(const BaseFamily& fam, double x, Cpx z, int samples = 384) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("segment_driver: need Im z > 0");
    const Cpx d = z - Cpx(x, 0.0);
    SegmentDriver out;
    if (std::abs(d.real()) <= 1e-12 * std::abs(d)) {
        out.sigma = d.imag() * d.imag() / 4.0;
        out.driver = constant_driver(x, out.sigma);
        return out;
    }
    out.mirrored = d.real() < 0.0;
    const double th = detail::folded_angle(d);
    if (th > fam.rays.theta_max * (1.0 + 1e-9))
        throw std::invalid_argument("segment_driver: angle above window; wait first");
    auto [r, tau] = fam.rays.lookup(th);
    const double a = std::abs(d) / r;
    out.sigma = a * a * tau;
    // lambda(t) = x +- a (4 - 4 sqrt(1 - t/a^2)) on [0, sigma]; sampled
    // uniformly in phi = sqrt(1 - t/a^2), where lambda is linear in phi
    const double phi_end = std::sqrt(std::max(0.0, 1.0 - tau));
    std::vector<double> ts(static_cast<std::size_t>(samples) + 1),
        vs(static_cast<std::size_t>(samples) + 1);
    const double sgn = out.mirrored ? -1.0 : 1.0;
    for (int i = 0; i <= samples; ++i) {
        const double phi = 1.0 + (phi_end - 1.0) * double(i) / double(samples);
        double t = a * a * (1.0 - phi * phi);
        if (i == samples) t = out.sigma;
        ts[static_cast<std::size_t>(i)] = t;
        vs[static_cast<std::size_t>(i)] = x + sgn * (4.0 * a - 4.0 * a * phi);
    }
    ts.front() = 0.0;
    out.driver = make_driver(std::move(ts), std::move(vs));
    return out;
}

// Image of a point after waiting for capacity tau under constant driving x:
// w = x + sqrt(4 tau + (w0 - x)^2).
inline Cpx waited_image(Cpx w0, double x, double tau) {
    Cpx c = w0 - Cpx(x, 0.0);
    return Cpx(x, 0.0) + upper_sqrt(Cpx(4.0 * tau, 0.0) + c * c);
}

// Smallest waiting time (times safety 1.1) such that (a) the image angle
// of the next target enters the segment window and (b) the norm-preserving
// inequality 4 T_n sigma_n <= tau_n^2 holds, with sigma_n estimated by the
// conservative full-bubble duration (|w - x|/r_theta)^2.
inline double waiting_time(const BaseFamily& fam, double T_n, double x_n, Cpx transported) {
    if (!(transported.imag() > 0.0))
        throw std::invalid_argument("waiting_time: transported point must be interior");
    const double window = fam.rays.theta_max / 1.05;  // margin inside the table window

    auto angle_at = [&](double tau) { return detail::folded_angle(waited_image(transported, x_n, tau) - Cpx(x_n, 0.0)); };
    auto sigma_hat = [&](double tau) {
        Cpx w = waited_image(transported, x_n, tau);
        double th = detail::folded_angle(w - Cpx(x_n, 0.0));
        auto [r, t_pass] = fam.rays.lookup(std::min(th, fam.rays.theta_max));
        (void)t_pass;
        double dd = std::abs(w - Cpx(x_n, 0.0));
        return dd * dd / (r * r);
    };

    // (a) angle decays monotonically under waiting
    double tau_a = 0.0;
    if (angle_at(0.0) > window) {
        double hi = std::max(1e-8, std::norm(transported - Cpx(x_n, 0.0)));
        int guard = 0;
        while (angle_at(hi) > window) {
            hi *= 2.0;
            if (++guard > 200) throw NumericalError("waiting_time: angle does not decay");
        }
        double lo = 0.0;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (angle_at(mid) > window ? lo : hi) = mid;
        }
        tau_a = hi;
    }
    if (T_n <= 0.0) return 1.1 * tau_a;

    // (b) tau^2 >= 4 T_n sigma_hat(tau); the left side wins for large tau
    auto ok_b = [&](double tau) { return tau * tau >= 4.0 * T_n * sigma_hat(tau); };
    if (ok_b(tau_a) && tau_a > 0.0) return 1.1 * tau_a;
    double hi = std::max(tau_a, 1e-8);
    int guard = 0;
    while (!ok_b(hi)) {
        hi *= 2.0;
        if (++guard > 300) throw NumericalError("waiting_time: norm constraint not satisfiable");
    }
    double lo = tau_a;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (ok_b(mid) ? hi : lo) = mid;
    }
    return 1.1 * hi;
}

struct DenseBuildResult {
    DrivingFunction driver;
    SlitMapChain chain;
    double norm_estimate = 0.0;
    std::vector<double> visit_times;     // capacity time each point is reached; -1 when skipped
    std::vector<double> suggested_grid;  // solve_trace grid matching the build pieces
};

struct DenseBuildOptions {
    int chain_substeps = 600;   // slit steps per appended segment
    int driver_samples = 384;   // driving samples per appended segment
    double skip_fraction = 0.5; // skip when estimated distance <= skip_fraction * tol
};

namespace detail {

// Estimated distance from z to the current trace: the image height scaled by
// the local inverse-map derivative.
inline double trace_distance_estimate(const SlitMapChain& chain, Cpx image, Cpx z) {
    if (image.imag() <= 0.0) return 0.0;
    const double h = 0.5 * image.imag();
    Cpx up = chain.pull_back(image + Cpx(0.0, h));
    Cpx at = chain.pull_back(image);
    (void)z;
    double deriv = std::abs(up - at) / h;
    return image.imag() * deriv;
}

} // namespace detail

// The induction of Section 3.1: wait under constant driving until the next
// point's image enters the segment window and the waiting inequality holds,
// then append the transported segment driver.  The result visits every
// input point (within tol) with Lip(1/2) norm estimate at most 4 + tolerance.
inline DenseBuildResult build_dense_driver(const std::vector<Cpx>& points, double tol,
                                           const BaseFamily& fam, DenseBuildOptions opt = {}) {
    if (points.empty()) throw std::invalid_argument("build_dense_driver: no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].imag() > 0.0))
            throw std::invalid_argument("build_dense_driver: points must lie in H");
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw std::invalid_argument("build_dense_driver: points must be distinct");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("build_dense_driver: tol must be > 0");

    DenseBuildResult res;
    std::vector<double> times{0.0};
    std::vector<double> values{0.0};
    double T_n = 0.0;
    double x_n = 0.0;
    double scale = 1.0;
    for (const Cpx& p : points) scale = std::max(scale, std::abs(p));

    for (const Cpx& z : points) {
        Cpx w0 = map_through_chain(res.chain, {z}, scale).front();
        if (w0.imag() <= 1e-13 * scale ||
            detail::trace_distance_estimate(res.chain, w0, z) <= opt.skip_fraction * tol) {
            res.visit_times.push_back(-1.0);
            continue;
        }

        const double tau = waiting_time(fam, T_n, x_n, w0);
        Cpx w = w0;
        if (tau > 0.0) {
            res.chain.push(x_n, tau);  // constant driving is one exact slit
            T_n += tau;
            times.push_back(T_n);
            values.push_back(x_n);
            w = waited_image(w0, x_n, tau);
        }

        auto seg = segment_driver(fam, x_n, w, opt.driver_samples);
        for (std::size_t i = 1; i < seg.driver.size(); ++i) {
            times.push_back(T_n + seg.driver.times[i]);
            values.push_back(seg.driver.values[i]);
        }
        // right-endpoint slit discretization of the appended segment
        double prev = 0.0;
        for (int k = 1; k <= opt.chain_substeps; ++k) {
            double t = seg.sigma * double(k) / double(opt.chain_substeps);
            res.chain.push(seg.driver(t), t - prev);
            prev = t;
        }
        T_n += seg.sigma;
        x_n = seg.driver(seg.sigma);
        res.visit_times.push_back(T_n);
    }

    if (times.size() < 2) {
        // every point was already on the trace of the empty hull: degenerate
        throw std::invalid_argument("build_dense_driver: nothing to build");
    }
    res.driver = make_driver(std::move(times), std::move(values));
    res.norm_estimate = lip_norm_estimate(res.driver).estimate;
    return res;
}

} // namespace loewner
