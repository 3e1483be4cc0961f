#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "loewner/analysis.hpp"
#include "loewner/driving.hpp"
#include "loewner/errors.hpp"
#include "loewner/geometry.hpp"
#include "loewner/slit_map.hpp"
#include "loewner/trace.hpp"

namespace loewner {

// Insert vertices so that every edge has length <= delta; the output vertex
// set is a superset of the input's.
inline std::vector<Cpx> refine_polyline(const std::vector<Cpx>& curve, double delta) {
    if (curve.size() < 2) throw std::invalid_argument("refine_polyline: need at least 2 vertices");
    if (!(delta > 0.0)) throw std::invalid_argument("refine_polyline: delta must be > 0");
    std::vector<Cpx> out;
    out.reserve(curve.size());
    out.push_back(curve.front());
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const Cpx a = curve[i], b = curve[i + 1];
        const double len = std::abs(b - a);
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / delta)));
        for (int k = 1; k <= pieces; ++k)
            out.push_back(a + (b - a) * (double(k) / double(pieces)));
    }
    return out;
}

// Drop trailing vertices lying on the real axis (fractal generators end
// their approximants on R, which carries no capacity).
inline std::vector<Cpx> trim_real_tail(std::vector<Cpx> curve, double eps = 1e-12) {
    while (curve.size() > 2 && std::abs(curve.back().imag()) <= eps) curve.pop_back();
    return curve;
}

// A pending curve vertex: its image under the chain built so far, plus the
// slit side it committed to if it ever landed on the real axis.
struct WeldPoint {
    Cpx w;
    std::int8_t side = 0;  // -1 left, +1 right, 0 undecided
};

// Zipper state while unwelding a curve.
struct WeldState {
    SlitMapChain chain;
    std::vector<WeldPoint> pending;  // images of the not-yet-absorbed vertices
    std::size_t next = 0;            // index into pending of the next vertex
    double elapsed = 0.0;            // equals chain.total_capacity()
    double scale = 1.0;              // curve diameter, for tolerances
    double base_x = 0.0;             // current driving position
};

struct ExtractOptions {
    double delta = 0.0;            // informational; refinement is the caller's job
    double neg_im_tol_rel = 1e-9;  // reject images below -tol * scale
    double slide_tol_rel = 0.05;   // max Re jump of a zero-capacity slide, rel. to scale
    double on_axis_eps_rel = 1e-13;
};

struct WeldResult {
    DrivingFunction driver;
    SlitMapChain chain;
};

namespace detail {

// Forward slit map with side bookkeeping for points on or near the axis.
inline WeldPoint weld_map(WeldPoint p, double x, double y, double axis_eps) {
    if (std::abs(p.w.imag()) <= axis_eps) {
        const double u = p.w.real();
        std::int8_t s;
        if (u > x + axis_eps) {
            s = 1;
        } else if (u < x - axis_eps) {
            s = -1;
        } else {
            s = (p.side != 0) ? p.side : std::int8_t{1};
        }
        return {Cpx(x + double(s) * std::hypot(u - x, y), 0.0), s};
    }
    Cpx d = p.w - Cpx(x, 0.0);
    Cpx w = Cpx(x, 0.0) + upper_sqrt(d * d + Cpx(y * y, 0.0));
    std::int8_t side = p.side;
    if (std::abs(w.imag()) <= axis_eps) side = (w.real() >= x) ? std::int8_t{1} : std::int8_t{-1};
    return {w, side};
}

} // namespace detail

inline WeldState weld_begin(const std::vector<Cpx>& curve, const ExtractOptions& opt = {}) {
    if (curve.size() < 2) throw std::invalid_argument("extract_driving: need at least 2 vertices");
    double scale = 0.0;
    for (const Cpx& v : curve) scale = std::max(scale, std::abs(v - curve.front()));
    if (scale <= 0.0) throw std::invalid_argument("extract_driving: degenerate curve");
    const double neg_tol = opt.neg_im_tol_rel * scale;
    if (std::abs(curve.front().imag()) > neg_tol)
        throw std::invalid_argument("extract_driving: curve must start on the real axis");

    WeldState st;
    st.scale = scale;
    st.base_x = curve.front().real();
    st.pending.reserve(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        Cpx w = curve[i];
        if (w.imag() < -neg_tol)
            throw ExtractionError("extract_driving: vertex below the real axis", i);
        if (w.imag() < 0.0) w = Cpx(w.real(), 0.0);
        st.pending.push_back({w, 0});
    }
    st.next = 1;
    return st;
}

// Absorb the next vertex.  Returns true when a slit step was appended,
// false for a zero-capacity slide along the axis.
inline bool weld_step(WeldState& st, const ExtractOptions& opt = {}) {
    const double axis_eps = opt.on_axis_eps_rel * st.scale;
    const std::size_t i = st.next++;
    const WeldPoint zeta = st.pending[i];
    if (zeta.w.imag() < -opt.neg_im_tol_rel * st.scale)
        throw ExtractionError("extract_driving: image with negative imaginary part", i);
    const double y = std::max(zeta.w.imag(), 0.0);
    if (y <= axis_eps) {
        // the curve runs along R: capacity-free slide of the base point
        if (std::abs(zeta.w.real() - st.base_x) > opt.slide_tol_rel * st.scale)
            throw ExtractionError("extract_driving: non-positive capacity jump (touch-back or too coarse)",
                                  i);
        st.base_x = zeta.w.real();
        return false;
    }
    const double x = zeta.w.real();
    const double dt = y * y / 4.0;
    st.chain.push(x, dt);
    st.elapsed += dt;
    st.base_x = x;
    for (std::size_t j = st.next; j < st.pending.size(); ++j)
        st.pending[j] = detail::weld_map(st.pending[j], x, y, axis_eps);
    return true;
}

// Compute the driving function of a polyline in the closed upper half-plane
// starting on R, refined to edge length <= delta, by absorbing one vertex
// per elementary vertical-slit map.
inline WeldResult extract_weld(const std::vector<Cpx>& curve, double delta,
                               ExtractOptions opt = {}) {
    opt.delta = delta;
    WeldState st = weld_begin(curve, opt);
    std::vector<double> times{0.0};
    std::vector<double> values;
    while (st.next < st.pending.size()) {
        if (weld_step(st, opt)) {
            if (st.elapsed > times.back()) {
                times.push_back(st.elapsed);
                values.push_back(st.chain.steps.back().x);
            } else if (!values.empty()) {
                // capacity increment below time resolution; fold into the
                // previous sample
                values.back() = st.chain.steps.back().x;
            }
        }
    }
    if (values.empty())
        throw ExtractionError("extract_driving: curve carries no capacity", curve.size() - 1);
    values.insert(values.begin(), values.front());  // anchor lambda(0)
    WeldResult res;
    res.driver = make_driver(std::move(times), std::move(values));
    res.chain = std::move(st.chain);
    return res;
}

inline DrivingFunction extract_driving(const std::vector<Cpx>& curve, double delta,
                                       const ExtractOptions& opt = {}) {
    return extract_weld(curve, delta, opt).driver;
}

// Push points forward through a chain with the same side bookkeeping the
// zipper uses (two-stage extraction, dense-builder transport).
inline std::vector<Cpx> map_through_chain(const SlitMapChain& chain, const std::vector<Cpx>& pts,
                                          double scale_hint = 1.0) {
    const double axis_eps = 1e-13 * scale_hint;
    std::vector<Cpx> out;
    out.reserve(pts.size());
    for (const Cpx& p : pts) {
        WeldPoint wp{p, 0};
        for (const auto& s : chain.steps)
            wp = detail::weld_map(wp, s.x, SlitMapChain::height(s), axis_eps);
        out.push_back(wp.w);
    }
    return out;
}

// sup over a common capacity grid of |extract(trace(lambda)) - lambda| after
// aligning total capacities, restricted to [0, compare_upto].
inline double round_trip_residual(const DrivingFunction& lam, int steps, double delta,
                                  double compare_upto = -1.0, const TracePolicy& policy = {}) {
    lam.validate();
    const double T = lam.duration();
    const double upto = (compare_upto > 0.0) ? std::min(compare_upto, T) : T;
    Trace tr = solve_trace(lam, steps, policy);
    std::vector<Cpx> verts;
    double t_kept = 0.0;
    for (std::size_t i = 0; i < tr.vertices.size(); ++i) {
        if (tr.times[i] <= upto * (1.0 + 1e-12)) {
            verts.push_back(tr.vertices[i]);
            t_kept = tr.times[i];
        }
    }
    if (verts.size() < 2) throw std::invalid_argument("round_trip_residual: window too small");
    auto poly = refine_polyline(verts, delta);
    DrivingFunction ex = extract_driving(poly, delta);
    const double ratio = ex.duration() / t_kept;  // capacity alignment
    double sup = 0.0;
    auto probe = [&](double t) {
        if (t < 0.0 || t > t_kept) return;
        sup = std::max(sup, std::abs(ex(t * ratio) - lam(t)));
    };
    for (double t : lam.times) probe(t);
    for (double te : ex.times) probe(te / ratio);
    return sup;
}

} // namespace loewner
