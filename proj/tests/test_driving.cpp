#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "loewner/driving.hpp"

using namespace loewner;

TEST_CASE("driving validation") {
    CHECK_THROWS_AS(make_driver({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_driver({0.1, 1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_driver({0.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_NOTHROW(make_driver({0.0, 1.0}, {0.0, 1.0}));
}

TEST_CASE("interpolation semantics") {
    auto lin = make_driver({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, Interp::Linear);
    CHECK(lin(0.5) == Catch::Approx(1.0));
    CHECK(lin(1.5) == Catch::Approx(1.0));
    auto pc = make_driver({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, Interp::PiecewiseConstRight);
    CHECK(pc(0.5) == 2.0);
    CHECK(pc(1.5) == 0.0);
    CHECK(pc(0.0) == 0.0);
    CHECK(pc(2.0) == 0.0);
}

TEST_CASE("scaling transform") {
    auto zero = constant_driver(0.0, 1.0);
    auto scaled = transform_driving(zero, 3.0, 0.0, false);
    CHECK(scaled.duration() == Catch::Approx(9.0));
    CHECK(scaled(4.5) == 0.0);

    // 4 sqrt(1-t) on [0,1] with r = 2 becomes 8 sqrt(1 - t/4) on [0,4]
    auto bubble = bubble_driver(4.0, 1.0, 512);
    auto big = transform_driving(bubble, 2.0, 0.0, false);
    CHECK(big.duration() == Catch::Approx(4.0));
    for (double t : {0.0, 1.0, 2.0, 3.5}) {
        CHECK(big(t) == Catch::Approx(8.0 * std::sqrt(1.0 - t / 4.0)).margin(1e-6));
    }
    CHECK_THROWS_AS(transform_driving(zero, 0.0, 0.0, false), std::invalid_argument);
    CHECK_THROWS_AS(transform_driving(zero, -1.0, 0.0, false), std::invalid_argument);
}

TEST_CASE("reflection transform") {
    auto one = constant_driver(1.0, 1.0);
    auto refl = transform_driving(one, 1.0, 0.0, true);
    CHECK(refl(0.5) == -1.0);
}

TEST_CASE("translation transform") {
    auto bubble = bubble_driver(4.0, 1.0, 128);
    auto moved = transform_driving(bubble, 1.0, 2.5, false);
    CHECK(moved(0.0) == Catch::Approx(6.5));
}

TEST_CASE("concatenation") {
    auto a = constant_driver(0.0, 1.0);
    auto b = constant_driver(0.0, 1.0);
    auto ab = concat_driving(a, b);
    CHECK(ab.duration() == Catch::Approx(2.0));
    CHECK(ab(1.7) == 0.0);

    // (0 on [0,1]) ++ (4 - 4 sqrt(1-t)) is continuous with value 0 at t = 1
    auto rise = sample_driver([](double t) { return 4.0 - 4.0 * std::sqrt(1.0 - t); },
                              refined_grid(1.0, 256, {1.0}));
    auto joined = concat_driving(a, rise);
    CHECK(joined(1.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(joined(2.0) == Catch::Approx(4.0).margin(1e-12));
    // value at T1 + u equals lambda2(u)
    for (double u : {0.1, 0.5, 0.9}) CHECK(joined(1.0 + u) == Catch::Approx(rise(u)).margin(1e-9));

    auto c = constant_driver(1.0, 1.0);
    CHECK_THROWS_AS(concat_driving(a, c), std::invalid_argument);
}

TEST_CASE("refined grid clusters at singular times") {
    auto g = refined_grid(1.0, 100, {1.0});
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    // spacing next to the singular endpoint is far below uniform
    double last_gap = g[g.size() - 1] - g[g.size() - 2];
    CHECK(last_gap < 1e-10);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) REQUIRE(g[i] < g[i + 1]);
}
