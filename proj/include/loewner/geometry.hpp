#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "loewner/slit_map.hpp"

namespace loewner {

inline double point_segment_distance(Cpx p, Cpx a, Cpx b) {
    const Cpx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline double point_polyline_distance(Cpx p, const std::vector<Cpx>& poly) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[i + 1]));
    return d;
}

// max over points of min distance to the polyline
inline double directed_hausdorff(const std::vector<Cpx>& pts, const std::vector<Cpx>& poly) {
    double h = 0.0;
    for (const Cpx& p : pts) h = std::max(h, point_polyline_distance(p, poly));
    return h;
}

namespace detail {

inline double cross2(Cpx o, Cpx a, Cpx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}

inline bool segments_intersect(Cpx a, Cpx b, Cpx c, Cpx d, double eps) {
    auto on_seg = [eps](Cpx p, Cpx q, Cpx r) {
        return std::min(p.real(), r.real()) - eps <= q.real() &&
               q.real() <= std::max(p.real(), r.real()) + eps &&
               std::min(p.imag(), r.imag()) - eps <= q.imag() &&
               q.imag() <= std::max(p.imag(), r.imag()) + eps;
    };
    double d1 = cross2(c, d, a), d2 = cross2(c, d, b), d3 = cross2(a, b, c), d4 = cross2(a, b, d);
    if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
        ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
        return true;
    if (std::abs(d1) <= eps && on_seg(c, a, d)) return true;
    if (std::abs(d2) <= eps && on_seg(c, b, d)) return true;
    if (std::abs(d3) <= eps && on_seg(a, c, b)) return true;
    if (std::abs(d4) <= eps && on_seg(a, d, b)) return true;
    return false;
}

} // namespace detail

// Segment-intersection sweep over non-adjacent edges, bucketed on a uniform
// grid so fractal approximants with thousands of edges stay fast.
inline bool polyline_is_simple(const std::vector<Cpx>& v, double eps_rel = 1e-12) {
    if (v.size() < 3) return true;
    double max_edge = 0.0, scale = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        max_edge = std::max(max_edge, std::abs(v[i + 1] - v[i]));
        scale = std::max({scale, std::abs(v[i]), std::abs(v[i + 1])});
    }
    if (max_edge == 0.0) return false;
    const double eps = eps_rel * std::max(scale, 1.0) * std::max(scale, 1.0);
    const double cell = 1.25 * max_edge;

    auto key = [cell](double x, double y) {
        auto qx = static_cast<std::int64_t>(std::floor(x / cell));
        auto qy = static_cast<std::int64_t>(std::floor(y / cell));
        return (static_cast<std::uint64_t>(qx) << 32) ^ static_cast<std::uint64_t>(qy & 0xffffffff);
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    buckets.reserve(v.size() * 2);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        Cpx m = 0.5 * (v[i] + v[i + 1]);
        buckets[key(m.real(), m.imag())].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        Cpx m = 0.5 * (v[i] + v[i + 1]);
        auto cx = static_cast<std::int64_t>(std::floor(m.real() / cell));
        auto cy = static_cast<std::int64_t>(std::floor(m.imag() / cell));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = buckets.find((static_cast<std::uint64_t>(cx + dx) << 32) ^
                                       static_cast<std::uint64_t>((cy + dy) & 0xffffffff));
                if (it == buckets.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (j <= i + 1) continue;  // handle each pair once; skip adjacent
                    if (j == i) continue;
                    if (detail::segments_intersect(v[i], v[i + 1], v[j], v[j + 1], eps)) return false;
                }
            }
    }
    return true;
}

} // namespace loewner
