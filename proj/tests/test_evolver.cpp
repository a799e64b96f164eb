#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "sdwave/diagnostics.hpp"
#include "sdwave/profiles.hpp"

using namespace sdwave;

namespace {

struct Manufactured {
    // u*(t, r) = cos(omega t) g(r) with g = sin(k (r - r_obs)) chosen to
    // vanish at both boundaries; F = u_tt - lap u - lap u_t with the
    // continuum Laplacian of g in closed form.
    int n = 1;
    double r_obs = 0.0, r_out = 10.0;
    double omega = 1.0;
    double k = std::numbers::pi / 10.0;

    double shape(double r) const { return std::sin(k * (r - r_obs)); }
    double lap_shape(double r) const {
        const double s = std::sin(k * (r - r_obs)), c = std::cos(k * (r - r_obs));
        return -k * k * s + ((n == 1) ? 0.0 : (n - 1) / r * k * c);
    }
    double exact(double t, double r) const { return std::cos(omega * t) * shape(r); }

    ForcingFn forcing(const RadialGrid& g) const {
        return [this, &g](double t) {
            GridField f(g.size());
            const double c = std::cos(omega * t), s = std::sin(omega * t);
            for (std::size_t j = 0; j < g.size(); ++j)
                f[j] = -omega * omega * c * shape(g.r(j)) - (c - omega * s) * lap_shape(g.r(j));
            return f;
        };
    }

    double error_at(const LaplacianStencil& st, const SolverConfig& cfg) const {
        const RadialGrid& g = st.grid();
        GridField u0(g.size()), u1(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) u0[j] = shape(g.r(j));
        State fin = march_linear(st, make_state(g, u0, u1), forcing(g), cfg).final;
        GridField diff(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) diff[j] = fin.u[j] - exact(fin.t, g.r(j));
        return l2_norm(g, diff);
    }
};

}  // namespace

TEST_CASE("solver config validation", "[evolver]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 100);
    CHECK_THROWS_AS(validate_solver({0.0, 0.5, 1.0}, g), ConfigError);
    CHECK_THROWS_AS(validate_solver({0.05, 0.4, 1.0}, g), ConfigError);   // theta below 1/2
    CHECK_THROWS_AS(validate_solver({0.05, 1.1, 1.0}, g), ConfigError);
    CHECK_THROWS_AS(validate_solver({0.2, 0.5, 1.0}, g), ConfigError);    // dt > dx
    CHECK_THROWS_AS(validate_solver({0.05, 0.5, -1.0}, g), ConfigError);
    CHECK_NOTHROW(validate_solver({0.1, 0.5, 1.0}, g));

    CHECK(step_count({0.1, 0.5, 1.0}) == 10);
    CHECK(step_count({0.1, 0.5, 0.0}) == 0);
    CHECK(step_count({0.1, 0.5, 0.01}) == 1);  // at least one step when t_end > 0
}

TEST_CASE("zero data is a fixed point", "[evolver]") {
    RadialGrid g = build_grid({2, 1.0, 9.0}, 64);
    LaplacianStencil s(g);
    State fin = march_linear(s, make_state(g, zero_field(g), zero_field(g)), {},
                             {0.05, 0.5, 2.0})
                    .final;
    CHECK(l2_norm(g, fin.u) == 0.0);
    CHECK(l2_norm(g, fin.v) == 0.0);
    CHECK(fin.t == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("scheme energy never increases without forcing", "[evolver]") {
    for (int n : {1, 2, 3}) {
        for (double theta : {0.5, 1.0}) {
            DomainSpec dom{n, n == 1 ? 0.0 : 1.0, 9.0};
            RadialGrid g = build_grid(dom, 96);
            LaplacianStencil s(g);
            GridField u0 = make_data(g, bump_profile(4.0, 1.5, 1.0));
            GridField u1 = make_data(g, bump_profile(5.0, 1.0, -0.5));
            EnergyTimeSeries se =
                run_recorded(s, make_state(g, u0, u1), {}, {0.05, theta, 3.0});
            REQUIRE(se.scheme_energy.size() > 1);
            const double slack = 1e-12 * std::max(se.scheme_energy[0], 1.0);
            for (std::size_t k = 1; k < se.scheme_energy.size(); ++k)
                CHECK(se.scheme_energy[k] <= se.scheme_energy[k - 1] + slack);
        }
    }
}

TEST_CASE("manufactured solution converges in dx", "[evolver]") {
    for (int n : {1, 3}) {
        Manufactured m;
        m.n = n;
        m.r_obs = (n == 1) ? 0.0 : 1.0;
        m.r_out = (n == 1) ? 10.0 : 9.0;
        m.k = std::numbers::pi / (m.r_out - m.r_obs);
        auto err = [&](int jm) {
            RadialGrid g = build_grid({n, m.r_obs, m.r_out}, jm);
            LaplacianStencil s(g);
            return m.error_at(s, {0.002, 0.5, 1.0});
        };
        const double e1 = err(64), e2 = err(128);
        CHECK(std::log2(e1 / e2) == Catch::Approx(2.0).margin(0.3));
    }
}

TEST_CASE("theta = 1/2 is second order in dt, theta = 1 first order", "[evolver]") {
    Manufactured m;
    RadialGrid g = build_grid({1, 0.0, 10.0}, 200);
    LaplacianStencil s(g);
    GridField u0(g.size()), u1(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) u0[j] = m.shape(g.r(j));
    auto final_u = [&](double dt, double theta) {
        return march_linear(s, make_state(g, u0, u1), m.forcing(g), {dt, theta, 1.0}).final.u;
    };
    auto self_diff_order = [&](double theta) {
        GridField a = final_u(0.04, theta), b = final_u(0.02, theta), c = final_u(0.01, theta);
        GridField d1(g.size()), d2(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            d1[j] = a[j] - b[j];
            d2[j] = b[j] - c[j];
        }
        return std::log2(l2_norm(g, d1) / l2_norm(g, d2));
    };
    CHECK(self_diff_order(0.5) == Catch::Approx(2.0).margin(0.3));
    CHECK(self_diff_order(1.0) == Catch::Approx(1.0).margin(0.3));
}

TEST_CASE("propagators at t = 0 and on zero data", "[evolver]") {
    RadialGrid g = build_grid({3, 1.0, 9.0}, 64);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.5, 1.0));
    GridField u1 = make_data(g, bump_profile(5.0, 1.0, 2.0));

    State same = propagate_R(s, u0, u1, {0.05, 0.5, 0.0});
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(same.u[j] == u0[j]);
        CHECK(same.v[j] == u1[j]);
    }

    State sz = propagate_S(s, zero_field(g), {0.05, 0.5, 1.0});
    CHECK(l2_norm(g, sz.u) == 0.0);

    State s0 = propagate_S(s, u1, {0.05, 0.5, 0.0});
    CHECK(l2_norm(g, s0.u) == 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(s0.v[j] == u1[j]);
}

TEST_CASE("R decomposes through S and its one-sided time difference", "[evolver]") {
    // R(t)(u0, u1) = d_t [S(t) u0] + S(t)(u1 - L u0); the one-sided quotient
    // makes the discrepancy first order in dt.
    RadialGrid g = build_grid({2, 1.0, 9.0}, 128);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.5, 1.0));
    GridField u1 = make_data(g, bump_profile(5.0, 1.0, -0.7));
    GridField w(g.size());
    GridField lap0 = apply_laplacian(s, u0);
    for (std::size_t j = 0; j < g.size(); ++j) w[j] = u1[j] - lap0[j];

    const double T = 2.0;
    auto discrepancy = [&](double dt) {
        SolverConfig cfg{dt, 0.5, T};
        GridField lhs = propagate_R(s, u0, u1, cfg).u;
        GridField a = propagate_S(s, w, cfg).u;
        SolverConfig prev = cfg;
        prev.t_end = T - dt;
        GridField b1 = propagate_S(s, u0, cfg).u;
        GridField b0 = propagate_S(s, u0, prev).u;
        GridField diff(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
            diff[j] = lhs[j] - (a[j] + (b1[j] - b0[j]) / dt);
        return l2_norm(g, diff);
    };
    const double d1 = discrepancy(0.05), d2 = discrepancy(0.025);
    CHECK(d2 <= 0.7 * d1);
}

TEST_CASE("Duhamel assembly with zero forcing reproduces R exactly", "[evolver]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 100);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.0, 1.0));
    GridField u1 = make_data(g, bump_profile(6.0, 1.0, 0.5));
    SolverConfig cfg{0.05, 0.5, 1.5};
    State a = duhamel_solve(s, u0, u1, {}, cfg);
    State b = propagate_R(s, u0, u1, cfg);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(a.u[j] == b.u[j]);
        CHECK(a.v[j] == b.v[j]);
    }

    ForcingFn zero = [&](double) { return zero_field(g); };
    State c = duhamel_solve(s, u0, u1, zero, cfg);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(c.u[j] == b.u[j]);
}

TEST_CASE("Duhamel assembly matches the march to first order", "[evolver]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 100);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.0, 1.0));
    GridField u1(g.size());
    ForcingFn F = [&](double t) {
        GridField f(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
            f[j] = std::cos(1.3 * t) * std::exp(-0.5 * (g.r(j) - 5.0) * (g.r(j) - 5.0));
        return f;
    };
    auto gap = [&](double dt) {
        SolverConfig cfg{dt, 0.5, 1.0};
        State a = duhamel_solve(s, u0, u1, F, cfg);
        State b = march_linear(s, make_state(g, u0, u1), F, cfg).final;
        GridField diff(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) diff[j] = a.u[j] - b.u[j];
        return l2_norm(g, diff);
    };
    const double g1 = gap(0.05), g2 = gap(0.025);
    CHECK(g2 <= 0.7 * g1);
    CHECK(g2 >= 0.3 * g1);  // genuinely first order, not superconvergent
}

TEST_CASE("single constant-forcing step differs from Duhamel at second order", "[evolver]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 100);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.0, 1.0));
    GridField u1(g.size());
    GridField Fc = make_data(g, bump_profile(5.0, 2.0, 1.0));
    ForcingFn F = [&](double) { return Fc; };
    auto one_step_gap = [&](double dt) {
        SolverConfig cfg{dt, 0.5, dt};
        State a = duhamel_solve(s, u0, u1, F, cfg);
        State b = step_linear(s, make_state(g, u0, u1), F, cfg);
        GridField diff(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) diff[j] = a.u[j] - b.u[j];
        return l2_norm(g, diff);
    };
    const double ratio = one_step_gap(0.05) / one_step_gap(0.025);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("semilinear march", "[evolver]") {
    RadialGrid g = build_grid({3, 1.0, 13.0}, 120);
    LaplacianStencil s(g);

    SECTION("zero data stays zero") {
        MarchResult r = march_semilinear(s, make_state(g, zero_field(g), zero_field(g)),
                                         NonlinKind::mixed(2.0, 2.0), {0.05, 0.5, 2.0});
        CHECK(l2_norm(g, r.final.u) == 0.0);
        CHECK_FALSE(r.overflowed);
    }

    SECTION("small data stays bounded over a long window") {
        GridField u0 = make_data(g, bump_profile(4.0, 1.5, 0.05));
        GridField u1 = make_data(g, bump_profile(4.0, 1.5, 0.05));
        const State init = make_state(g, u0, u1);
        const double n0 = h1_norm(g, u0) + h1_norm(g, u1);
        double peak = 0.0;
        MarchResult r = march_semilinear(
            s, init, NonlinKind::mixed(3.0, 3.0), {0.05, 0.5, 50.0},
            [&](int, const State&, const State& post, const GridField&) {
                peak = std::max(peak, h1_norm(g, post.u) + h1_norm(g, post.v));
            });
        CHECK_FALSE(r.overflowed);
        CHECK(peak <= 2.0 * n0);
    }

    SECTION("violent data overflows and stops early") {
        GridField u0 = make_data(g, bump_profile(4.0, 1.5, 1e40));
        GridField u1 = make_data(g, bump_profile(4.0, 1.5, 1e40));
        SolverConfig cfg{0.05, 0.5, 10.0};
        MarchResult r = march_semilinear(s, make_state(g, u0, u1),
                                         NonlinKind::mixed(4.0, 4.0), cfg);
        CHECK(r.overflowed);
        CHECK(r.final.u.overflowed);
        CHECK(r.steps < step_count(cfg));
    }
}

TEST_CASE("trajectory recording keeps every state", "[evolver]") {
    RadialGrid g = build_grid({1, 0.0, 10.0}, 64);
    LaplacianStencil s(g);
    GridField u0 = make_data(g, bump_profile(4.0, 1.0, 1.0));
    SolverConfig cfg{0.1, 0.5, 1.0};
    Trajectory tr = record_trajectory(s, make_state(g, u0, zero_field(g)), {}, cfg);
    REQUIRE(tr.states.size() == static_cast<std::size_t>(step_count(cfg)) + 1);
    CHECK(tr.states.front().t == 0.0);
    CHECK(tr.states.back().t == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t k = 1; k < tr.states.size(); ++k)
        CHECK(tr.states[k].t > tr.states[k - 1].t);

    Trajectory ts = record_trajectory_semilinear(s, make_state(g, u0, zero_field(g)),
                                                 NonlinKind::mixed(2.0, 2.0), cfg);
    CHECK(ts.states.size() == tr.states.size());
}
