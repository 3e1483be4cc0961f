#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner {

using Cpx = std::complex<double>;

// Square root with nonnegative imaginary part.
inline Cpx upper_sqrt(Cpx w) {
    Cpx s = std::sqrt(w);
    return (s.imag() < 0.0) ? -s : s;
}

// z -> x + sqrt((z-x)^2 + y^2): removes the vertical slit {x + i*tau, 0 <= tau <= y}
// and maps H \ slit conformally onto H.  Half-plane capacity of the slit is y^2/4.
// Real inputs stay real, with the side of the slit resolved by sign(Re z - x).
// Points on the slit itself (Re z == x, Im z <= y) take the right-side prime
// end, the continuation of the formula's principal branch: sqrt(i^2 + 4) = sqrt(3).
// The welding module carries explicit side tags where the left side is needed.
inline Cpx vertical_slit_map(Cpx z, double x, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("vertical_slit_map: slit height must be > 0");
    if (z.imag() < 0.0) throw std::invalid_argument("vertical_slit_map: point below the real axis");
    const double u = z.real() - x;
    if (z.imag() == 0.0) {
        double s = (u < 0.0) ? -1.0 : 1.0;
        return Cpx(x + s * std::hypot(u, y), 0.0);
    }
    Cpx w = z - Cpx(x, 0.0);
    return Cpx(x, 0.0) + upper_sqrt(w * w + Cpx(y * y, 0.0));
}

// w -> x + sqrt((w-x)^2 - y^2), branch in the closed upper half-plane.
// Real w with |w - x| < y land on the slit {x + i*tau, 0 <= tau <= y}.
inline Cpx inverse_vertical_slit_map(Cpx w, double x, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("inverse_vertical_slit_map: slit height must be > 0");
    const double u = w.real() - x;
    if (w.imag() == 0.0) {
        const double au = std::abs(u);
        if (au < y) return Cpx(x, std::sqrt((y - au) * (y + au)));
        double s = (u < 0.0) ? -1.0 : 1.0;
        return Cpx(x + s * std::sqrt((au - y) * (au + y)), 0.0);
    }
    Cpx v = w - Cpx(x, 0.0);
    return Cpx(x, 0.0) + upper_sqrt(v * v - Cpx(y * y, 0.0));
}

// One elementary step: slit at x with capacity dt (height 2*sqrt(dt)).
struct SlitStep {
    double x;
    double dt;
};

// Chronological composition of elementary vertical-slit maps; discretizes
// g_t (forward) and g_t^{-1} (pull_back).
struct SlitMapChain {
    std::vector<SlitStep> steps;

    double total_capacity() const {
        double s = 0.0;
        for (const auto& st : steps) s += st.dt;
        return s;
    }

    void push(double x, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("SlitMapChain: capacity must be > 0");
        steps.push_back({x, dt});
    }

    static double height(const SlitStep& s) { return 2.0 * std::sqrt(s.dt); }

    // Forward map h_n o ... o h_1 applied to z.
    Cpx apply(Cpx z) const {
        for (const auto& s : steps) z = vertical_slit_map(z, s.x, height(s));
        return z;
    }

    // Inverse of the first k steps: h_1^{-1} o ... o h_k^{-1}.
    Cpx pull_back(Cpx w, std::size_t k) const {
        for (std::size_t j = k; j-- > 0;) w = inverse_vertical_slit_map(w, steps[j].x, height(steps[j]));
        return w;
    }

    Cpx pull_back(Cpx w) const { return pull_back(w, steps.size()); }
};

} // namespace loewner
