#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "loewner/slit_map.hpp"

using namespace loewner;

TEST_CASE("vertical slit map on reference points") {
    // sqrt(0 + 4) = 2
    CHECK(vertical_slit_map(Cpx(0, 0), 0, 2).real() == Catch::Approx(2.0));
    CHECK(vertical_slit_map(Cpx(0, 0), 0, 2).imag() == 0.0);
    // tip maps to the base point
    CHECK(std::abs(vertical_slit_map(Cpx(0, 2), 0, 2)) < 1e-15);
    // sqrt(i^2 + 4) = sqrt(3): on-slit point takes the right-side prime end
    Cpx w = vertical_slit_map(Cpx(0, 1), 0, 2);
    CHECK(w.real() == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(std::abs(w.imag()) < 1e-15);
    // left side of the real axis keeps its sign
    CHECK(vertical_slit_map(Cpx(-1, 0), 0, 2).real() == Catch::Approx(-std::sqrt(5.0)));
}

TEST_CASE("vertical slit map rejects bad input") {
    CHECK_THROWS_AS(vertical_slit_map(Cpx(0, 1), 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(vertical_slit_map(Cpx(0, 1), 0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(vertical_slit_map(Cpx(0, -0.1), 0, 1.0), std::invalid_argument);
}

TEST_CASE("inverse vertical slit map on reference points") {
    CHECK(std::abs(inverse_vertical_slit_map(Cpx(2, 0), 0, 2)) < 1e-15);
    Cpx tip = inverse_vertical_slit_map(Cpx(0, 0), 0, 2);
    CHECK(tip.real() == 0.0);
    CHECK(tip.imag() == Catch::Approx(2.0));
    Cpx z = inverse_vertical_slit_map(Cpx(std::sqrt(3.0), 0), 0, 2);
    CHECK(std::abs(z - Cpx(0, 1)) < 1e-12);
    // real w with |w - x| < y lands on the slit
    Cpx on_slit = inverse_vertical_slit_map(Cpx(1.0, 0), 0, 2);
    CHECK(on_slit.real() == 0.0);
    CHECK(on_slit.imag() == Catch::Approx(std::sqrt(3.0)));
    CHECK_THROWS_AS(inverse_vertical_slit_map(Cpx(1, 1), 0, 0.0), std::invalid_argument);
}

TEST_CASE("branch sanity: inverse o forward is identity") {
    std::mt19937_64 rng(0x10ced5eedULL);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(0.01, 4.0), uim(1e-6, 5.0);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        double x = ux(rng), y = uy(rng);
        Cpx z(ux(rng), uim(rng));
        Cpx back = inverse_vertical_slit_map(vertical_slit_map(z, x, y), x, y);
        double rel = std::abs(back - z) / std::max(1.0, std::abs(z));
        REQUIRE(rel < 1e-10);
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("round trip through sqrt(3) example to 1e-12") {
    Cpx z(0, 1);
    Cpx w = vertical_slit_map(z, 0, 2);
    CHECK(std::abs(inverse_vertical_slit_map(w, 0, 2) - z) < 1e-12);
}

TEST_CASE("chain capacity additivity is exact") {
    SlitMapChain chain;
    double manual = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1e-4, 0.3);
    for (int i = 0; i < 200; ++i) {
        double dt = u(rng);
        chain.push(0.1 * i, dt);
        manual += dt;
    }
    CHECK(chain.total_capacity() == manual);
    // height/capacity correspondence: (2 sqrt(dt))^2 / 4 == dt
    for (const auto& s : chain.steps) {
        double h = SlitMapChain::height(s);
        CHECK(h * h / 4.0 == Catch::Approx(s.dt).epsilon(1e-14));
    }
}

TEST_CASE("chain forward and pull back invert each other") {
    SlitMapChain chain;
    chain.push(0.0, 0.25);
    chain.push(0.5, 0.1);
    chain.push(-0.3, 0.05);
    Cpx z(0.4, 1.3);
    Cpx w = chain.apply(z);
    CHECK(std::abs(chain.pull_back(w) - z) < 1e-12);
}
