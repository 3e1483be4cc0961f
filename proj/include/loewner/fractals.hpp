#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "loewner/slit_map.hpp"

namespace loewner {

inline constexpr std::size_t kFractalVertexCap = 2'000'000;

namespace detail {

inline void check_vertex_cap(double count, const char* who) {
    if (count > double(kFractalVertexCap))
        throw std::invalid_argument(std::string(who) + ": level exceeds the vertex cap");
}

} // namespace detail

// Level-n van Koch curve over [0,1], bumps up, 4^n + 1 vertices.
inline std::vector<Cpx> koch(int level) {
    if (level < 0) throw std::invalid_argument("koch: level must be >= 0");
    detail::check_vertex_cap(std::pow(4.0, level) + 1.0, "koch");
    std::vector<Cpx> cur{Cpx(0, 0), Cpx(1, 0)};
    const Cpx rot60(0.5, std::sqrt(3.0) / 2.0);
    for (int l = 0; l < level; ++l) {
        std::vector<Cpx> next;
        next.reserve((cur.size() - 1) * 4 + 1);
        next.push_back(cur.front());
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            const Cpx a = cur[i], b = cur[i + 1];
            const Cpx third = (b - a) / 3.0;
            next.push_back(a + third);
            next.push_back(a + third + third * rot60);
            next.push_back(a + 2.0 * third);
            next.push_back(b);
        }
        cur = std::move(next);
    }
    return cur;
}

namespace detail {

// Hilbert index -> cell coordinates on a 2^order grid (Gray-code walk).
inline void hilbert_d2xy(std::uint32_t side, std::uint64_t d, std::uint32_t& x, std::uint32_t& y) {
    x = y = 0;
    std::uint64_t t = d;
    for (std::uint32_t s = 1; s < side; s *= 2) {
        std::uint32_t rx = 1u & static_cast<std::uint32_t>(t / 2);
        std::uint32_t ry = 1u & static_cast<std::uint32_t>(t ^ rx);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
}

} // namespace detail

// Level-n Hilbert approximant: the 4^n subsquare centers of [0,1]^2 in
// Hilbert order, prefixed by a stem from the first center down to R.
// Starts at the lower-left subsquare and moves up; 4^n + 1 vertices.
inline std::vector<Cpx> hilbert(int level) {
    if (level < 1) throw std::invalid_argument("hilbert: level must be >= 1");
    detail::check_vertex_cap(std::pow(4.0, level) + 1.0, "hilbert");
    const std::uint32_t side = 1u << level;
    const double cell = 1.0 / double(side);
    std::vector<Cpx> out;
    out.reserve((std::size_t{1} << (2 * level)) + 1);
    out.push_back(Cpx(0.5 * cell, 0.0));  // stem foot
    const std::uint64_t total = std::uint64_t{1} << (2 * level);
    for (std::uint64_t d = 0; d < total; ++d) {
        std::uint32_t x, y;
        detail::hilbert_d2xy(side, d, x, y);
        out.push_back(Cpx((x + 0.5) * cell, (y + 0.5) * cell));
    }
    return out;
}

namespace detail {

struct Turtle {
    Cpx pos;
    int heading;  // index into the 60-degree direction table
    double step;
    std::vector<Cpx>* out;

    void draw() {
        static const double s3 = std::sqrt(3.0) / 2.0;
        static const Cpx dirs[6] = {{1, 0}, {0.5, s3}, {-0.5, s3}, {-1, 0}, {-0.5, -s3}, {0.5, -s3}};
        pos += step * dirs[((heading % 6) + 6) % 6];
        out->push_back(pos);
    }
};

// Arrowhead rewriting: A -> B-A-B, B -> A+B+A, turns of 60 degrees.
inline void arrowhead_emit(int level, bool rule_a, Turtle& t) {
    if (level == 0) {
        t.draw();
        return;
    }
    if (rule_a) {
        arrowhead_emit(level - 1, false, t);
        t.heading -= 1;
        arrowhead_emit(level - 1, true, t);
        t.heading -= 1;
        arrowhead_emit(level - 1, false, t);
    } else {
        arrowhead_emit(level - 1, true, t);
        t.heading += 1;
        arrowhead_emit(level - 1, false, t);
        t.heading += 1;
        arrowhead_emit(level - 1, true, t);
    }
}

} // namespace detail

// Level-n Sierpinski arrowhead curve from 0 to 1, 3^n segments, contained in
// the closed gasket triangle with unit base.
inline std::vector<Cpx> sierpinski_arrowhead(int level) {
    if (level < 0) throw std::invalid_argument("sierpinski_arrowhead: level must be >= 0");
    detail::check_vertex_cap(std::pow(3.0, level) + 1.0, "sierpinski_arrowhead");
    std::vector<Cpx> out;
    out.reserve(std::size_t(std::pow(3.0, level)) + 1);
    out.push_back(Cpx(0, 0));
    detail::Turtle t{Cpx(0, 0), (level % 2 == 1) ? 1 : 0, std::pow(0.5, level), &out};
    detail::arrowhead_emit(level, true, t);
    // snap lattice roundoff onto the axis
    for (Cpx& v : out)
        if (std::abs(v.imag()) < 1e-12) v = Cpx(v.real(), 0.0);
    return out;
}

// Half of the Sierpinski gasket, hung from its apex at the origin: the
// telescope of full gaskets T_k = 2^{-(k-1)} T_1 linked along the ray to 2i,
// where T_1 has corners i, 2i and (-sqrt(3)+3i)/2.  This is the decomposition
// of the left half (cut along the median through the apex) of the gasket on
// the triangle {0, 2i, -sqrt(3)+i}.  Scaling the curve by 1/2 about 0
// reproduces its own initial piece, so the extracted driving term satisfies
// 2 lambda(t/4) = lambda(t).
//
// Level n traverses pieces k = n..1, piece k drawn as the arrowhead
// approximant of gasket(T_k) at level n-k, entered at 2^{-(k-1)} i and left
// at 2^{-(k-2)} i, after a stub from 0 up to the innermost corner.
inline std::vector<Cpx> half_sierpinski(int level) {
    if (level < 0) throw std::invalid_argument("half_sierpinski: level must be >= 0");
    const Cpx out_corner(0.0, 2.0);
    if (level == 0) return {Cpx(0, 0), out_corner};
    detail::check_vertex_cap(std::pow(3.0, level) / 2.0 + 2.0, "half_sierpinski");

    std::vector<Cpx> verts;
    verts.push_back(Cpx(0, 0));
    const Cpx in_finest = out_corner * std::pow(0.5, level);
    verts.push_back(in_finest);
    for (int k = level; k >= 1; --k) {
        const Cpx a = out_corner * std::pow(0.5, double(k));      // in-corner of T_k
        const Cpx b = out_corner * std::pow(0.5, double(k - 1));  // out-corner
        auto piece = sierpinski_arrowhead(level - k);
        // affine frame [0,1] -> [a,b]; the standard apex lands on the bulge corner
        for (std::size_t i = 1; i < piece.size(); ++i) verts.push_back(a + (b - a) * piece[i]);
    }
    return verts;
}

// Truncated infinite product prod (1 - eps_k); factors in [0,1).
inline double limit_area(const std::vector<double>& epsilons) {
    long double p = 1.0L;
    for (double e : epsilons) {
        if (!(e >= 0.0) || !(e < 1.0)) throw std::invalid_argument("limit_area: eps must be in [0,1)");
        p *= (1.0L - static_cast<long double>(e));
        if (p == 0.0L) break;
    }
    return static_cast<double>(p);
}

// Exact rational arithmetic for the stage-area identity.
struct Fraction {
    long long num = 0;
    long long den = 1;

    Fraction() = default;
    Fraction(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Fraction: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Fraction operator*(Fraction a, Fraction b) {
        __int128 n = static_cast<__int128>(a.num) * b.num;
        __int128 d = static_cast<__int128>(a.den) * b.den;
        // reduce via cross gcds before narrowing
        long long g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
        long long g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
        n = static_cast<__int128>(a.num / g1) * (b.num / g2);
        d = static_cast<__int128>(a.den / g2) * (b.den / g1);
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Fraction: overflow");
        return Fraction(static_cast<long long>(n), static_cast<long long>(d));
    }

    friend Fraction operator-(Fraction a, Fraction b) {
        __int128 n = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
        __int128 d = static_cast<__int128>(a.den) * b.den;
        long long g = std::gcd(a.den, b.den);
        n = static_cast<__int128>(a.num) * (b.den / g) - static_cast<__int128>(b.num) * (a.den / g);
        d = static_cast<__int128>(a.den / g) * b.den;
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Fraction: overflow");
        return Fraction(static_cast<long long>(n), static_cast<long long>(d));
    }

    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.num == b.num && a.den == b.den;
    }

    double value() const { return double(num) / double(den); }
};

// area(S_k) = prod_{j<=k} (1 - eps_j), exactly.
inline Fraction stage_area_exact(const std::vector<Fraction>& epsilons, int k) {
    if (k < 0 || std::size_t(k) > epsilons.size())
        throw std::invalid_argument("stage_area_exact: k out of range");
    Fraction area(1, 1);
    for (int j = 0; j < k; ++j) area = area * (Fraction(1, 1) - epsilons[std::size_t(j)]);
    return area;
}

struct Square {
    Cpx center;
    double side;
};

struct PositiveAreaCurve {
    std::vector<Cpx> polyline;                // stem + stage-level square centers in order
    std::vector<std::vector<Square>> stages;  // stages[k-1] holds the 4^k squares of S_k
};

namespace detail {

// Hilbert-ordered recursion over shrinking subsquares.  (c, u, v) is the
// current square: center c, half-side axes u and v (orientation carried by
// the frame).  Each stage keeps 4 children of relative area (1 - eps)/4,
// centered in their quadrants, so the margins are symmetric.
inline void positive_area_rec(int depth, int max_depth, Cpx c, Cpx u, Cpx v,
                              const std::vector<double>& eps, PositiveAreaCurve& out) {
    if (depth == max_depth) {
        out.polyline.push_back(c);
        return;
    }
    const double g = std::sqrt(1.0 - eps[std::size_t(depth)]) / 2.0;
    const Cpx q[4] = {c - u / 2.0 - v / 2.0, c - u / 2.0 + v / 2.0, c + u / 2.0 + v / 2.0,
                      c + u / 2.0 - v / 2.0};
    const Cpx cu[4] = {v * g, u * g, u * g, -v * g};
    const Cpx cv[4] = {u * g, v * g, v * g, -u * g};
    for (int i = 0; i < 4; ++i)
        out.stages[std::size_t(depth)].push_back({q[i], 2.0 * std::abs(cu[i])});
    for (int i = 0; i < 4; ++i)
        positive_area_rec(depth + 1, max_depth, q[i], cu[i], cv[i], eps, out);
}

} // namespace detail

// Stage-level approximation of the positive-area curve: each square of
// S_{k-1} is replaced by 4 subsquares of total relative area 1 - eps_k,
// visited in Hilbert order; eps_k = 0 for all k reproduces the Hilbert
// construction.
inline PositiveAreaCurve positive_area_curve(int level, const std::vector<double>& epsilons) {
    if (level < 1) throw std::invalid_argument("positive_area_curve: level must be >= 1");
    if (epsilons.size() < std::size_t(level))
        throw std::invalid_argument("positive_area_curve: need at least `level` epsilons");
    for (double e : epsilons)
        if (!(e >= 0.0) || !(e >= 0.0 && e < 1.0))
            throw std::invalid_argument("positive_area_curve: eps must be in [0,1)");
    detail::check_vertex_cap(std::pow(4.0, level) + 1.0, "positive_area_curve");

    PositiveAreaCurve out;
    out.stages.resize(std::size_t(level));
    detail::positive_area_rec(0, level, Cpx(0.5, 0.5), Cpx(0.5, 0.0), Cpx(0.0, 0.5), epsilons, out);
    out.polyline.insert(out.polyline.begin(), Cpx(out.polyline.front().real(), 0.0));
    return out;
}

enum class FractalKind { Koch, Hilbert, Arrowhead, HalfSierpinski, PositiveArea };

struct FractalSpec {
    FractalKind kind;
    int level = 1;
    std::vector<double> epsilons;  // positive_area only
};

inline std::vector<Cpx> generate_fractal(const FractalSpec& spec) {
    switch (spec.kind) {
        case FractalKind::Koch: return koch(spec.level);
        case FractalKind::Hilbert: return hilbert(spec.level);
        case FractalKind::Arrowhead: return sierpinski_arrowhead(spec.level);
        case FractalKind::HalfSierpinski: return half_sierpinski(spec.level);
        case FractalKind::PositiveArea: {
            std::vector<double> eps = spec.epsilons;
            if (eps.size() < std::size_t(spec.level)) eps.resize(std::size_t(spec.level), 0.0);
            return positive_area_curve(spec.level, eps).polyline;
        }
    }
    throw std::invalid_argument("generate_fractal: unknown kind");
}

} // namespace loewner
