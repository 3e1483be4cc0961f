#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "loewner/dense.hpp"
#include "loewner/geometry.hpp"
#include "loewner/trace.hpp"

using namespace loewner;

namespace {
const BaseFamily& shared_family() {
    static BaseFamily fam = build_base_family(4096, 512);
    return fam;
}
} // namespace

TEST_CASE("base family endpoints and radii") {
    const auto& fam = shared_family();
    CHECK(std::abs(fam.base_trace.vertices.front()) < 1e-12);
    CHECK(std::abs(fam.base_trace.vertices.back() - Cpx(2, 0)) < 5e-2);
    CHECK(std::abs(fam.base_trace.vertices.back() - Cpx(2, 0)) < 5e-3);

    // r_theta -> 2 as theta -> 0+
    auto [r_small, tau_small] = fam.rays.lookup(1e-4);
    CHECK(r_small == Catch::Approx(2.0).margin(1e-2));
    CHECK(tau_small == Catch::Approx(1.0).margin(1e-2));

    CHECK(fam.rays.r_min > 0.5);
    CHECK(fam.rays.r_min < 2.0);

    // radii land on the curve: spot check mid-window
    auto [r, tau] = fam.rays.lookup(M_PI / 4.0);
    Cpx p = r * Cpx(std::cos(M_PI / 4.0), std::sin(M_PI / 4.0));
    CHECK(point_polyline_distance(p, fam.base_trace.vertices) < 2e-3);
    CHECK(tau > 0.0);
    CHECK(tau < 1.0);
}

TEST_CASE("segment driver straight up") {
    const auto& fam = shared_family();
    auto seg = segment_driver(fam, 0.0, Cpx(0, 1));
    CHECK(seg.sigma == Catch::Approx(0.25).epsilon(1e-12));
    for (double v : seg.driver.values) CHECK(v == 0.0);
}

TEST_CASE("segment driver reaches the target point") {
    const auto& fam = shared_family();
    for (Cpx z : {Cpx(0.8, 0.9), Cpx(1.2, 1.1), Cpx(0.4, 0.3)}) {
        auto seg = segment_driver(fam, 0.0, z);
        TracePolicy pol;
        auto tr = solve_trace(seg.driver, 3000);
        CHECK(point_polyline_distance(z, tr.vertices) < 8e-3);
        CHECK(std::abs(tr.vertices.back() - z) < 8e-3);
    }
    // mirror case
    auto seg = segment_driver(fam, 0.0, Cpx(-0.8, 0.9));
    CHECK(seg.mirrored);
    auto tr = solve_trace(seg.driver, 3000);
    CHECK(std::abs(tr.vertices.back() - Cpx(-0.8, 0.9)) < 8e-3);

    // near-landing target: nearly the full base curve
    auto seg2 = segment_driver(fam, 0.0, Cpx(2.0, 1e-3));
    CHECK(seg2.sigma == Catch::Approx(1.0).margin(0.05));

    CHECK_THROWS_AS(segment_driver(fam, 0.0, Cpx(0.2, -0.1)), std::invalid_argument);
    // angle above the window
    CHECK_THROWS_AS(segment_driver(fam, 0.0, Cpx(0.1, 1.0)), std::invalid_argument);
}

TEST_CASE("segment drivers have norm at most 4") {
    const auto& fam = shared_family();
    for (Cpx z : {Cpx(0.8, 0.9), Cpx(2.0, 0.2), Cpx(-1.0, 1.0)}) {
        auto seg = segment_driver(fam, 0.5, z + Cpx(0.5, 0.0));
        CHECK(lip_norm_estimate(seg.driver).estimate <= 4.0 + 1e-9);
    }
    // the untruncated family attains 4 exactly
    auto full = sample_driver([](double t) { return 4.0 - 4.0 * std::sqrt(1.0 - t); },
                              refined_grid(1.0, 2048, {1.0}));
    CHECK(lip_norm_estimate(full).estimate == Catch::Approx(4.0).margin(1e-6));
}

TEST_CASE("waiting time honors both constraints") {
    const auto& fam = shared_family();
    // T_n = 0 and angle already in window: no waiting needed
    CHECK(waiting_time(fam, 0.0, 0.0, Cpx(1.0, 0.4)) == 0.0);

    // angle above window: waiting decays it into the window
    double tau = waiting_time(fam, 0.0, 0.0, Cpx(0.1, 1.0));
    CHECK(tau > 0.0);
    Cpx w = waited_image(Cpx(0.1, 1.0), 0.0, tau);
    CHECK(std::atan2(w.imag(), std::abs(w.real())) <= fam.rays.theta_max);

    // with elapsed capacity, the norm inequality must hold with sigma_hat
    double T_n = 2.0;
    double tau2 = waiting_time(fam, T_n, 0.0, Cpx(1.0, 0.4));
    Cpx w2 = waited_image(Cpx(1.0, 0.4), 0.0, tau2);
    double th = std::atan2(w2.imag(), std::abs(w2.real()));
    auto [r, tpass] = fam.rays.lookup(th);
    (void)tpass;
    double sigma_hat = std::norm(w2) / (r * r);
    CHECK(tau2 * tau2 >= 4.0 * T_n * sigma_hat * (1.0 - 1e-9));

    // angle decay is monotone
    double prev = std::atan2(1.0, 0.1);
    for (double t = 0.1; t < 3.0; t *= 1.7) {
        Cpx wi = waited_image(Cpx(0.1, 1.0), 0.0, t);
        double a = std::atan2(wi.imag(), std::abs(wi.real()));
        REQUIRE(a < prev);
        prev = a;
    }
}

TEST_CASE("single point: vertical slit") {
    const auto& fam = shared_family();
    auto res = build_dense_driver({Cpx(0, 1)}, 1e-2, fam);
    CHECK(res.driver.duration() == Catch::Approx(0.25).epsilon(1e-9));
    for (double v : res.driver.values) CHECK(v == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("collinear points extend the same vertical line") {
    const auto& fam = shared_family();
    auto res = build_dense_driver({Cpx(0, 1), Cpx(0, 2)}, 1e-2, fam);
    CHECK(res.driver.duration() == Catch::Approx(1.0).epsilon(1e-9));
    for (double v : res.driver.values) CHECK(v == Catch::Approx(0.0).margin(1e-12));
    CHECK(res.visit_times[0] == Catch::Approx(0.25).epsilon(1e-9));
    CHECK(res.visit_times[1] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transport consistency between chain and waited image") {
    const auto& fam = shared_family();
    std::vector<Cpx> pts{Cpx(0.6, 0.8), Cpx(-0.5, 1.2)};
    auto res = build_dense_driver(pts, 1e-2, fam);
    // after the build, both points lie on (near) the trace; their chain
    // images must agree with the welding-module transport
    for (const Cpx& z : pts) {
        Cpx via_chain = map_through_chain(res.chain, {z}, 2.0).front();
        Cpx direct = res.chain.apply(z);
        CHECK(std::abs(via_chain - direct) < 1e-6);
    }
}

TEST_CASE("five random points are visited with norm at most 4") {
    const auto& fam = shared_family();
    std::mt19937_64 rng(20240817ULL);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(0.5, 2.0);
    std::vector<Cpx> pts;
    for (int i = 0; i < 5; ++i) pts.emplace_back(ux(rng), uy(rng));

    auto res = build_dense_driver(pts, 1e-2, fam);
    CHECK(res.norm_estimate <= 4.01);

    TracePolicy pol;
    auto tr = solve_trace(res.driver, 6000, pol);
    for (const Cpx& z : pts) {
        CHECK(point_polyline_distance(z, tr.vertices) <= 1e-2);
    }
}

TEST_CASE("norm stays bounded across junctions") {
    const auto& fam = shared_family();
    std::vector<Cpx> pts{Cpx(1.0, 0.7), Cpx(-1.3, 0.9), Cpx(0.4, 1.5)};
    auto res = build_dense_driver(pts, 1e-2, fam);
    // pairs spanning each junction: estimate the local modulus around the
    // visit times
    const auto& lam = res.driver;
    for (double tv : res.visit_times) {
        if (tv <= 0.0) continue;
        double sup = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            if (lam.times[i] >= tv) break;
            for (std::size_t j = i + 1; j < lam.size(); j += 7) {
                if (lam.times[j] <= tv) continue;
                double dt = lam.times[j] - lam.times[i];
                sup = std::max(sup, std::abs(lam.values[j] - lam.values[i]) / std::sqrt(dt));
            }
        }
        CHECK(sup <= 4.0 + 1e-6);
    }
}

TEST_CASE("dense builder rejects bad input") {
    const auto& fam = shared_family();
    CHECK_THROWS_AS(build_dense_driver({}, 1e-2, fam), std::invalid_argument);
    CHECK_THROWS_AS(build_dense_driver({Cpx(0, -1)}, 1e-2, fam), std::invalid_argument);
    CHECK_THROWS_AS(build_dense_driver({Cpx(0, 1), Cpx(0, 1)}, 1e-2, fam), std::invalid_argument);
    CHECK_THROWS_AS(build_dense_driver({Cpx(0, 1)}, -1.0, fam), std::invalid_argument);
}
