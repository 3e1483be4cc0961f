#pragma once

#include <cmath>
#include <complex>

namespace loewner {

// One Dormand-Prince 5(4) step.  State is double or std::complex<double>.
// Returns the 5th-order solution and writes the embedded error estimate.
template <class State, class F>
State rk45_step(const F& f, double t, State y, double h, double& err_out) {
    const State k1 = f(t, y);
    const State k2 = f(t + h * (1.0 / 5), y + h * (1.0 / 5) * k1);
    const State k3 = f(t + h * (3.0 / 10), y + h * ((3.0 / 40) * k1 + (9.0 / 40) * k2));
    const State k4 = f(t + h * (4.0 / 5), y + h * ((44.0 / 45) * k1 - (56.0 / 15) * k2 + (32.0 / 9) * k3));
    const State k5 = f(t + h * (8.0 / 9),
                       y + h * ((19372.0 / 6561) * k1 - (25360.0 / 2187) * k2 + (64448.0 / 6561) * k3 -
                                (212.0 / 729) * k4));
    const State k6 = f(t + h,
                       y + h * ((9017.0 / 3168) * k1 - (355.0 / 33) * k2 + (46732.0 / 5247) * k3 +
                                (49.0 / 176) * k4 - (5103.0 / 18656) * k5));
    const State y5 = y + h * ((35.0 / 384) * k1 + (500.0 / 1113) * k3 + (125.0 / 192) * k4 -
                              (2187.0 / 6784) * k5 + (11.0 / 84) * k6);
    const State k7 = f(t + h, y5);
    const State y4 = y + h * ((5179.0 / 57600) * k1 + (7571.0 / 16695) * k3 + (393.0 / 640) * k4 -
                              (92097.0 / 339200) * k5 + (187.0 / 2100) * k6 + (1.0 / 40) * k7);
    err_out = std::abs(y5 - y4);
    return y5;
}

// Accept/reject controller: next step factor from the error ratio.
inline double rk45_step_factor(double err, double tol) {
    if (err <= 0.0) return 5.0;
    double f = 0.9 * std::pow(tol / err, 0.2);
    if (f < 0.2) f = 0.2;
    if (f > 5.0) f = 5.0;
    return f;
}

} // namespace loewner
