#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "loewner/driving.hpp"
#include "loewner/evolve.hpp"

using namespace loewner;

namespace {

// Independent oracle: fixed-step RK4 on dg/dt = 2/(g - lambda(t)), no
// adaptivity, no capture logic.
Cpx rk4_fixed(const DrivingFunction& lam, Cpx z0, double t0, double t1, int n) {
    auto f = [&](double t, Cpx g) { return 2.0 / (g - Cpx(lam(t), 0.0)); };
    double h = (t1 - t0) / n;
    Cpx g = z0;
    double t = t0;
    for (int i = 0; i < n; ++i) {
        Cpx k1 = f(t, g);
        Cpx k2 = f(t + h / 2, g + (h / 2) * k1);
        Cpx k3 = f(t + h / 2, g + (h / 2) * k2);
        Cpx k4 = f(t + h, g + h * k3);
        g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return g;
}

} // namespace

TEST_CASE("constant driver reproduces sqrt(4t + z^2)") {
    auto zero = constant_driver(0.0, 1.0);
    EvolveOptions opt;
    opt.tol = 1e-12;
    auto r = evolve_point(zero, Cpx(0, 1), 0.0, 1.0, opt);
    REQUIRE(r.fate == Fate::Alive);
    CHECK(std::abs(r.endpoint - Cpx(std::sqrt(3.0), 0.0)) < 1e-9);

    // interior point stays interior: z0 = 1 + i
    auto r2 = evolve_point(zero, Cpx(1, 1), 0.0, 1.0, opt);
    REQUIRE(r2.fate == Fate::Alive);
    Cpx expected = std::sqrt(Cpx(4.0, 0.0) + Cpx(1, 1) * Cpx(1, 1));
    if (expected.imag() < 0) expected = -expected;
    CHECK(std::abs(r2.endpoint - expected) < 1e-9);
}

TEST_CASE("bubble driver captures [A, C] points") {
    auto lam = bubble_driver(5.0, 1.0, 4096);
    auto r = evolve_point(lam, Cpx(4.5, 0.0), 0.0, 1.0);
    REQUIRE(r.fate == Fate::Captured);
    CHECK(r.capture_time <= 1.0);
    CHECK(r.capture_time > 0.9);

    // a point between B = 1 and A = 4 flows up to A and is captured too
    auto r2 = evolve_point(lam, Cpx(2.0, 0.0), 0.0, 1.0);
    REQUIRE(r2.fate == Fate::Captured);
}

TEST_CASE("bubble driver leaves x < B alive and decreasing") {
    auto lam = bubble_driver(5.0, 1.0, 4096);
    auto r = evolve_point(lam, Cpx(0.5, 0.0), 0.0, 1.0);
    REQUIRE(r.fate == Fate::Alive);
    CHECK(r.endpoint.real() < 0.5);
    CHECK(std::abs(r.endpoint.imag()) < 1e-12);

    // cross-check against the fixed-step oracle away from the endpoint
    auto probe = evolve_point(lam, Cpx(0.5, 0.0), 0.0, 0.99);
    REQUIRE(probe.fate == Fate::Alive);
    Cpx oracle = rk4_fixed(lam, Cpx(0.5, 0.0), 0.0, 0.99, 2'000'000);
    CHECK(std::abs(probe.endpoint - oracle) < 1e-6);
}

TEST_CASE("capture verdicts stable under tol halving") {
    auto lam = bubble_driver(4.5, 1.0, 4096);
    for (double x : {1.5, 3.0, 4.2}) {
        EvolveOptions a, b;
        a.tol = 1e-8;
        b.tol = 5e-9;
        auto ra = evolve_point(lam, Cpx(x, 0.0), 0.0, 1.0, a);
        auto rb = evolve_point(lam, Cpx(x, 0.0), 0.0, 1.0, b);
        REQUIRE(ra.fate == rb.fate);
        if (ra.fate == Fate::Captured) CHECK(std::abs(ra.capture_time - rb.capture_time) <= 1e-8);
    }
    for (double x : {0.3, 0.8}) {
        EvolveOptions a, b;
        a.tol = 1e-8;
        b.tol = 5e-9;
        auto ra = evolve_point(lam, Cpx(x, 0.0), 0.0, 1.0, a);
        auto rb = evolve_point(lam, Cpx(x, 0.0), 0.0, 1.0, b);
        CHECK(ra.fate == Fate::Alive);
        CHECK(rb.fate == Fate::Alive);
    }
}

TEST_CASE("evolve rejects starting on the singularity") {
    auto lam = constant_driver(0.0, 1.0);
    CHECK_THROWS_AS(evolve_point(lam, Cpx(0.0, 0.0), 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve_point(lam, Cpx(1.0, 0.0), 0.5, 0.2), std::invalid_argument);
}
