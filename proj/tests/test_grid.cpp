#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "sdwave/grid.hpp"
#include "sdwave/profiles.hpp"

using namespace sdwave;

TEST_CASE("grid spacing and nodes", "[grid]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 100);
    CHECK(g.dx() == Catch::Approx(0.1).margin(1e-15));
    CHECK(g.r(0) == 0.0);
    CHECK(g.r(50) == Catch::Approx(5.0).margin(1e-12));
    CHECK(g.r(100) == Catch::Approx(10.0).margin(1e-12));
    CHECK(g.size() == 101);

    RadialGrid g3 = build_grid({3, 1.0, 9.0}, 80);
    CHECK(g3.dx() == Catch::Approx(0.1).margin(1e-15));
    CHECK(g3.r(0) == 1.0);
    CHECK(g3.r(80) == Catch::Approx(9.0).margin(1e-12));
}

TEST_CASE("quadrature weights sum to the shell volume", "[grid]") {
    // n = 2, (1, 2): pi (4 - 1) = 3 pi.  The integrand r is linear, so the
    // trapezoid sum is exact.
    RadialGrid g = build_grid({2, 1.0, 2.0}, 16);
    double sum = 0.0;
    for (double w : g.quad_weights()) sum += w;
    CHECK(sum == Catch::Approx(3.0 * std::numbers::pi).epsilon(1e-12));

    // n = 1: plain length.
    RadialGrid g1 = build_grid({1, 0.0, 10.0}, 64);
    double sum1 = 0.0;
    for (double w : g1.quad_weights()) sum1 += w;
    CHECK(sum1 == Catch::Approx(10.0).epsilon(1e-12));

    // n = 3: exact only in the refinement limit (the integrand r^2 is not
    // piecewise linear); check second-order convergence to 4/3 pi (27 - 1).
    const double vol = 4.0 / 3.0 * std::numbers::pi * 26.0;
    auto defect = [&](int j) {
        RadialGrid gg = build_grid({3, 1.0, 3.0}, j);
        double s = 0.0;
        for (double w : gg.quad_weights()) s += w;
        return std::abs(s - vol);
    };
    const double d1 = defect(64), d2 = defect(128);
    CHECK(d2 < d1);
    CHECK(std::log2(d1 / d2) == Catch::Approx(2.0).margin(0.2));
}

TEST_CASE("construction rejects bad domains", "[grid]") {
    CHECK_THROWS_AS(build_grid({1, 0.0, 10.0}, 8), ConfigError);    // too few cells
    CHECK_THROWS_AS(build_grid({2, 0.0, 10.0}, 64), ConfigError);   // obstacle required
    CHECK_THROWS_AS(build_grid({1, 0.5, 10.0}, 64), ConfigError);   // half-line starts at 0
    CHECK_THROWS_AS(build_grid({3, 2.0, 1.0}, 64), ConfigError);    // r_out <= r_obs
    CHECK_THROWS_AS(build_grid({0, 0.0, 10.0}, 64), ConfigError);   // dimension
    CHECK_NOTHROW(build_grid({2, 1.0, 2.0}, 16));                   // tight annulus is fine
    CHECK_THROWS_AS(require_far_truncation({2, 1.0, 2.0}), ConfigError);
    CHECK_NOTHROW(require_far_truncation({2, 1.0, 4.0}));
    CHECK_NOTHROW(require_far_truncation({1, 0.0, 4.0}));
    CHECK_THROWS_AS(require_far_truncation({1, 0.0, 3.9}), ConfigError);
}

TEST_CASE("integrate reproduces closed forms", "[grid]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 1000);
    GridField f(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) f[j] = g.r(j);
    // Trapezoid is exact for a linear integrand.
    CHECK(integrate(g, f) == Catch::Approx(50.0).epsilon(1e-12));

    GridField z(g.size());
    CHECK(integrate(g, z) == 0.0);

    RadialGrid g3 = build_grid({3, 1.0, 2.0}, 200);
    GridField one(g3.size(), 1.0);
    const double vol = 4.0 / 3.0 * std::numbers::pi * 7.0;
    CHECK(integrate(g3, one) == Catch::Approx(vol).epsilon(1e-4));
}

TEST_CASE("norms", "[grid]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 2000);
    GridField f(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::sin(g.r(j));
    // int_0^10 sin^2 = 5 - sin(20)/4.
    const double exact = std::sqrt(5.0 - std::sin(20.0) / 4.0);
    CHECK(l2_norm(g, f) == Catch::Approx(exact).epsilon(1e-5));

    GridField z(g.size());
    CHECK(l2_norm(g, z) == 0.0);
    CHECK(h1_seminorm(g, z) == 0.0);
    CHECK(h1_norm(g, z) == 0.0);

    // h1_norm is the sum of the two pieces and scales homogeneously.
    CHECK(h1_norm(g, f) == Catch::Approx(l2_norm(g, f) + h1_seminorm(g, f)).epsilon(1e-14));
    GridField cf(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) cf[j] = -3.0 * f[j];
    CHECK(l2_norm(g, cf) == Catch::Approx(3.0 * l2_norm(g, f)).epsilon(1e-12));
    CHECK(h1_norm(g, cf) == Catch::Approx(3.0 * h1_norm(g, f)).epsilon(1e-12));
}

TEST_CASE("quadrature is second order on smooth integrands", "[grid]") {
    auto value = [](int j) {
        RadialGrid g = build_grid({2, 1.0, 9.0}, j);
        GridField f(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(-g.r(i));
        return integrate(g, f);
    };
    const double ref = value(8192);
    const double e1 = std::abs(value(256) - ref);
    const double e2 = std::abs(value(512) - ref);
    CHECK(std::log2(e1 / e2) == Catch::Approx(2.0).margin(0.2));
}

TEST_CASE("bump data profiles", "[grid]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 400);
    GridField u = make_data(g, bump_profile(4.0, 1.0, 2.0));
    // Peak value at the center node, zero outside the support.
    std::size_t jc = 160;  // r = 4
    CHECK(u[jc] == Catch::Approx(2.0).margin(1e-12));
    CHECK(u[0] == 0.0);
    CHECK(u[g.size() - 1] == 0.0);
    for (std::size_t j = 0; j < g.size(); ++j)
        if (g.r(j) <= 3.0 || g.r(j) >= 5.0) CHECK(u[j] == 0.0);

    GridField z = make_data(g, zero_profile());
    CHECK(l2_norm(g, z) == 0.0);

    // Dirichlet rows are forced to zero even when the bump touches them.
    GridField edge = make_data(g, bump_profile(0.0, 2.0, 1.0));
    CHECK(edge[0] == 0.0);
}
