#pragma once

#include <functional>

#include "sdwave/nonlinearity.hpp"
#include "sdwave/spatial.hpp"

namespace sdwave {

/// Theta in [1/2, 1]: 1/2 is the second-order midpoint scheme, 1 the fully
/// implicit first-order one.  dt must not exceed dx (the explicit nonlinear
/// term wants parabolic-free stepping headroom).
struct SolverConfig {
    double dt = 0.0;
    double theta = 0.5;
    double t_end = 0.0;
    int store_every = 1;

    bool operator==(const SolverConfig&) const = default;
};

inline void validate_solver(const SolverConfig& c, const RadialGrid& g) {
    if (!(c.dt > 0.0)) throw ConfigError("solver: dt must be positive");
    if (!(c.theta >= 0.5 && c.theta <= 1.0)) throw ConfigError("solver: theta must lie in [1/2, 1]");
    if (!(c.t_end >= 0.0)) throw ConfigError("solver: t_end must be nonnegative");
    if (c.store_every < 1) throw ConfigError("solver: store_every must be >= 1");
    if (c.dt > g.dx() * (1.0 + 1e-12)) throw ConfigError("solver: dt must not exceed dx");
}

struct State {
    double t = 0.0;
    GridField u, v;
};

inline State make_state(const RadialGrid& g, const GridField& u0, const GridField& u1) {
    require_match(g, u0, "make_state");
    require_match(g, u1, "make_state");
    return State{0.0, u0, u1};
}

/// Forcing sampler: field value of F at the requested time.  A default
/// (empty) function means F = 0.
using ForcingFn = std::function<GridField(double t)>;

/// One step of the theta scheme for  u_tt = L u + L u_t + F:
/// with w = v^(n+1) and both L-terms at the theta point,
///     (I - dt theta (1 + dt theta) L) w
///         = v + dt L [ u + (1-theta)(1 + dt theta) v ] + dt F(t + theta dt),
///     u^(n+1) = u + dt (theta w + (1-theta) v).
/// The system matrix is strictly diagonally dominant for any dt > 0.
class ThetaStepper {
public:
    ThetaStepper(const LaplacianStencil& s, double dt, double theta)
        : s_(&s), dt_(dt), theta_(theta), cv_((1.0 - theta) * (1.0 + dt * theta)) {
        const RadialGrid& g = s.grid();
        const int m = g.j_max();
        const double beta = dt * theta * (1.0 + dt * theta);
        const double inv = 1.0 / (g.dx() * g.dx());
        band_.sub.assign(m + 1, 0.0);
        band_.diag.assign(m + 1, 1.0);
        band_.super.assign(m + 1, 0.0);
        for (int j = 1; j < m; ++j) {
            band_.sub[j] = -beta * s.lo(j) * inv;
            band_.diag[j] = 1.0 + beta * (s.lo(j) + s.hi(j)) * inv;
            band_.super[j] = -beta * s.hi(j) * inv;
        }
    }

    const LaplacianStencil& stencil() const { return *s_; }
    double dt() const { return dt_; }
    double theta() const { return theta_; }

    /// Advances the state in place; f_mid is F sampled at t + theta dt (empty
    /// field means zero forcing).
    void step(State& st, const GridField& f_mid) const {
        const RadialGrid& g = s_->grid();
        const int m = g.j_max();
        GridField z(st.u.size());
        for (int j = 0; j <= m; ++j) z[j] = st.u[j] + cv_ * st.v[j];
        GridField lz = apply_laplacian(*s_, z);
        std::vector<double> rhs(st.u.size(), 0.0);
        const bool forced = f_mid.size() != 0;
        for (int j = 1; j < m; ++j) {
            rhs[j] = st.v[j] + dt_ * lz[j];
            if (forced) rhs[j] += dt_ * f_mid[j];
        }
        std::vector<double> w = solve_tridiagonal(band_, rhs);
        for (int j = 1; j < m; ++j) {
            st.u[j] += dt_ * (theta_ * w[j] + (1.0 - theta_) * st.v[j]);
            st.v[j] = w[j];
        }
        st.u[0] = st.u[m] = 0.0;
        st.v[0] = st.v[m] = 0.0;
        st.t += dt_;
        if (forced && f_mid.overflowed) {
            st.u.overflowed = true;
            st.v.overflowed = true;
        }
    }

private:
    const LaplacianStencil* s_ = nullptr;
    double dt_ = 0.0, theta_ = 0.5, cv_ = 0.0;
    Tridiagonal band_;
};

/// Single public step with a forcing sampler.
inline State step_linear(const LaplacianStencil& s, const State& st, const ForcingFn& forcing,
                         const SolverConfig& cfg) {
    validate_solver(cfg, s.grid());
    ThetaStepper stepper(s, cfg.dt, cfg.theta);
    State nxt = st;
    GridField f_mid;
    if (forcing) f_mid = forcing(st.t + cfg.theta * cfg.dt);
    stepper.step(nxt, f_mid);
    return nxt;
}

/// Called after every accepted step with the states on both sides and the
/// forcing sample that entered the step.
using StepHook = std::function<void(int k, const State& pre, const State& post, const GridField& f_mid)>;

inline long step_count(const SolverConfig& cfg) {
    if (cfg.t_end == 0.0) return 0;
    const long k = std::lround(cfg.t_end / cfg.dt);
    return std::max<long>(1, k);
}

struct MarchResult {
    State final;
    long steps = 0;
    bool overflowed = false;
};

/// Every state of a march, including the initial one.
struct Trajectory {
    double dt = 0.0;
    std::vector<State> states;
};

/// Marches the linear forced problem over step_count(cfg) steps.
inline MarchResult march_linear(const LaplacianStencil& s, const State& init, const ForcingFn& forcing,
                                const SolverConfig& cfg, const StepHook& hook = {}) {
    validate_solver(cfg, s.grid());
    ThetaStepper stepper(s, cfg.dt, cfg.theta);
    const long K = step_count(cfg);
    State st = init;
    GridField f_mid;
    for (long k = 0; k < K; ++k) {
        State pre = hook ? st : State{};
        if (forcing) f_mid = forcing(st.t + cfg.theta * cfg.dt);
        stepper.step(st, f_mid);
        if (hook) hook(static_cast<int>(k), pre, st, f_mid);
    }
    const bool over = st.u.overflowed || st.v.overflowed;
    return MarchResult{std::move(st), K, over};
}

/// Homogeneous propagator R(t)(u0, u1).
inline State propagate_R(const LaplacianStencil& s, const GridField& u0, const GridField& u1,
                         const SolverConfig& cfg) {
    return march_linear(s, make_state(s.grid(), u0, u1), {}, cfg).final;
}

/// S(t) g = R(t)(0, g), the building block of the Duhamel sum.
inline State propagate_S(const LaplacianStencil& s, const GridField& g, const SolverConfig& cfg) {
    return propagate_R(s, zero_field(s.grid()), g, cfg);
}

/// Duhamel assembly u(t) = R(t)(u0,u1) + sum_k dt S(t - s_k) F(s_k) with
/// left-rectangle nodes s_k = k dt.  With F = 0 this reproduces propagate_R
/// bit for bit; with smooth F it matches the direct march to first order in
/// dt (the rectangle rule is the bottleneck).
inline State duhamel_solve(const LaplacianStencil& s, const GridField& u0, const GridField& u1,
                           const ForcingFn& forcing, const SolverConfig& cfg) {
    validate_solver(cfg, s.grid());
    const long K = step_count(cfg);
    State acc = propagate_R(s, u0, u1, cfg);
    if (!forcing) return acc;
    for (long k = 0; k < K; ++k) {
        const double sk = k * cfg.dt;
        GridField g = forcing(sk);
        bool nonzero = false;
        for (std::size_t j = 0; j < g.size(); ++j)
            if (g[j] != 0.0) { nonzero = true; break; }
        if (!nonzero) continue;
        SolverConfig tail = cfg;
        tail.t_end = (K - k) * cfg.dt;
        State piece = propagate_S(s, g, tail);
        for (std::size_t j = 0; j < acc.u.size(); ++j) {
            acc.u[j] += cfg.dt * piece.u[j];
            acc.v[j] += cfg.dt * piece.v[j];
        }
    }
    return acc;
}

/// One semilinear step: forcing frozen at the step's start, f = f(u_k, v_k).
inline State step_semilinear(const LaplacianStencil& s, const State& st, const NonlinKind& kind,
                             const SolverConfig& cfg) {
    validate_solver(cfg, s.grid());
    ThetaStepper stepper(s, cfg.dt, cfg.theta);
    State nxt = st;
    GridField f = eval_f(kind, st.u, st.v);
    stepper.step(nxt, f);
    return nxt;
}

inline bool state_finite(const State& st, double cap = 1e60) {
    for (std::size_t j = 0; j < st.u.size(); ++j)
        if (!std::isfinite(st.u[j]) || !std::isfinite(st.v[j]) || std::abs(st.u[j]) > cap ||
            std::abs(st.v[j]) > cap)
            return false;
    return true;
}

/// Marches the semilinear problem; stops early (overflowed = true) when a
/// state leaves the representable range.
inline MarchResult march_semilinear(const LaplacianStencil& s, const State& init, const NonlinKind& kind,
                                    const SolverConfig& cfg, const StepHook& hook = {}) {
    validate_solver(cfg, s.grid());
    ThetaStepper stepper(s, cfg.dt, cfg.theta);
    const long K = step_count(cfg);
    State st = init;
    for (long k = 0; k < K; ++k) {
        GridField f = eval_f(kind, st.u, st.v);
        if (f.overflowed) {
            // Forcing left the representable range: stop before the state does.
            st.u.overflowed = true;
            st.v.overflowed = true;
            return MarchResult{std::move(st), k, true};
        }
        State pre = hook ? st : State{};
        stepper.step(st, f);
        if (!state_finite(st)) {
            st.u.overflowed = true;
            st.v.overflowed = true;
            return MarchResult{std::move(st), k + 1, true};
        }
        if (hook) hook(static_cast<int>(k), pre, st, f);
    }
    return MarchResult{std::move(st), K, false};
}

/// Linear march that keeps every state.
inline Trajectory record_trajectory(const LaplacianStencil& s, const State& init,
                                    const ForcingFn& forcing, const SolverConfig& cfg) {
    Trajectory tr;
    tr.dt = cfg.dt;
    tr.states.reserve(step_count(cfg) + 1);
    tr.states.push_back(init);
    march_linear(s, init, forcing, cfg,
                 [&tr](int, const State&, const State& post, const GridField&) {
                     tr.states.push_back(post);
                 });
    return tr;
}

/// Semilinear march that keeps every state; stops early on overflow.
inline Trajectory record_trajectory_semilinear(const LaplacianStencil& s, const State& init,
                                               const NonlinKind& kind, const SolverConfig& cfg) {
    Trajectory tr;
    tr.dt = cfg.dt;
    tr.states.reserve(step_count(cfg) + 1);
    tr.states.push_back(init);
    march_semilinear(s, init, kind, cfg,
                     [&tr](int, const State&, const State& post, const GridField&) {
                         tr.states.push_back(post);
                     });
    return tr;
}

/// Energy the scheme provably dissipates: E = (||v||^2 + D(u, u)) / 2 with
/// the flux-form seminorm.  Non-increasing per step for F = 0 and
/// theta >= 1/2, up to round-off.
inline double scheme_energy(const LaplacianStencil& s, const State& st) {
    const double nv = l2_norm(s.grid(), st.v);
    return 0.5 * (nv * nv + dirichlet_form(s, st.u, st.u));
}

}  // namespace sdwave
