#pragma once

#include "sdwave/diagnostics.hpp"

namespace sdwave {

/// Sup-in-time of h1_norm(u) + h1_norm(v): the norm of the space the
/// contraction runs in.  Trajectories carry every step (store_every is
/// forced to 1 inside the iteration; decimation only applies to exports).
inline double xt_norm(const RadialGrid& g, const Trajectory& tr) {
    double m = 0.0;
    for (const State& st : tr.states) m = std::max(m, h1_norm(g, st.u) + h1_norm(g, st.v));
    return m;
}

inline double xt_distance(const RadialGrid& g, const Trajectory& a, const Trajectory& b) {
    if (a.states.size() != b.states.size())
        throw ConfigError("xt_distance: trajectories of different length");
    double m = 0.0;
    GridField du(a.states.empty() ? 0 : a.states[0].u.size());
    GridField dv(du.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        for (std::size_t j = 0; j < du.size(); ++j) {
            du[j] = a.states[k].u[j] - b.states[k].u[j];
            dv[j] = a.states[k].v[j] - b.states[k].v[j];
        }
        m = std::max(m, h1_norm(g, du) + h1_norm(g, dv));
    }
    return m;
}

struct PicardConfig {
    int max_iter = 24;
    double tol = 1e-10;  // relative distance for convergence
    double R = 0.0;      // ball radius; <= 0 picks 2x the homogeneous trajectory norm
};

struct IterateEntry {
    int iteration = 0;
    double norm = 0.0;      // xt_norm of this iterate
    double distance = 0.0;  // X(T)-distance to the previous iterate
    double ratio = 0.0;     // distance_m / distance_(m-1), 0 for the first entry
};

enum class PicardStatus { converged, diverged, max_iterations, overflow };

struct PicardResult {
    PicardStatus status = PicardStatus::max_iterations;
    double T = 0.0;
    double R = 0.0;
    std::vector<IterateEntry> trace;
    Trajectory fixed_point;  // last iterate
};

/// Successive approximation for u_tt = L u + L u_t + f(u, u_t): each iterate
/// solves the linear problem forced by the previous iterate's trajectory,
/// frozen per step (piecewise constant in time).  Iterates must stay in the
/// ball of radius 2R; leaving it reports divergence.
inline PicardResult picard_iterate(const LaplacianStencil& s, const GridField& u0,
                                   const GridField& u1, const NonlinKind& kind,
                                   const SolverConfig& cfg_in, const PicardConfig& pc = {}) {
    const RadialGrid& g = s.grid();
    SolverConfig cfg = cfg_in;
    cfg.store_every = 1;
    validate_solver(cfg, g);
    validate_kind(kind);
    if (pc.max_iter < 1) throw ConfigError("picard: max_iter must be >= 1");

    PicardResult res;
    res.T = step_count(cfg) * cfg.dt;

    const State init = make_state(g, u0, u1);
    Trajectory prev = record_trajectory(s, init, {}, cfg);
    res.R = pc.R > 0.0 ? pc.R : 2.0 * xt_norm(g, prev);

    double prev_dist = -1.0;
    for (int m = 1; m <= pc.max_iter; ++m) {
        bool overflow = false;
        ForcingFn F = [&prev, &overflow, &cfg, &kind](double t) {
            long k = static_cast<long>(std::floor(t / cfg.dt));
            k = std::clamp<long>(k, 0, static_cast<long>(prev.states.size()) - 1);
            GridField f = eval_f(kind, prev.states[k].u, prev.states[k].v);
            if (f.overflowed) overflow = true;
            return f;
        };
        Trajectory cur = record_trajectory(s, init, F, cfg);
        if (overflow) {
            res.status = PicardStatus::overflow;
            res.fixed_point = std::move(cur);
            return res;
        }
        IterateEntry e;
        e.iteration = m;
        e.norm = xt_norm(g, cur);
        e.distance = xt_distance(g, cur, prev);
        e.ratio = (prev_dist > 0.0) ? e.distance / prev_dist : 0.0;
        res.trace.push_back(e);
        if (e.norm > 2.0 * res.R) {
            res.status = PicardStatus::diverged;
            res.fixed_point = std::move(cur);
            return res;
        }
        if (e.distance <= std::max(pc.tol * e.norm, 1e-14)) {
            res.status = PicardStatus::converged;
            res.fixed_point = std::move(cur);
            return res;
        }
        prev_dist = e.distance;
        prev = std::move(cur);
    }
    res.fixed_point = std::move(prev);
    return res;
}

/// All ratios from the second iterate on (the first has no predecessor
/// distance).
inline std::vector<double> contraction_ratios(const PicardResult& r) {
    std::vector<double> out;
    for (std::size_t i = 1; i < r.trace.size(); ++i) out.push_back(r.trace[i].ratio);
    return out;
}

inline bool contraction_accepted(const PicardResult& r) {
    if (r.status != PicardStatus::converged) return false;
    for (double q : contraction_ratios(r))
        if (q > 0.5) return false;
    return true;
}

struct HorizonResult {
    bool found = false;
    double T = 0.0;        // largest tested horizon that passed
    PicardResult at_T;     // the passing run (meaningful when found)
};

/// Bisection over the horizon: largest tested T (snapped to whole steps) for
/// which the iteration converges with every measured ratio <= 1/2.
inline HorizonResult find_contraction_horizon(const LaplacianStencil& s, const GridField& u0,
                                              const GridField& u1, const NonlinKind& kind,
                                              const SolverConfig& cfg_in, double T_max,
                                              const PicardConfig& pc = {}, int bisect_iters = 12) {
    if (!(T_max > 0.0)) throw ConfigError("find_contraction_horizon: T_max must be positive");
    HorizonResult best;
    auto snap = [&](double T) {
        const long K = std::max<long>(2, static_cast<long>(std::floor(T / cfg_in.dt + 1e-9)));
        return K * cfg_in.dt;
    };
    auto probe = [&](double T) {
        SolverConfig cfg = cfg_in;
        cfg.t_end = snap(T);
        PicardResult r = picard_iterate(s, u0, u1, kind, cfg, pc);
        const bool ok = contraction_accepted(r);
        if (ok && cfg.t_end > best.T) {
            best.found = true;
            best.T = cfg.t_end;
            best.at_T = std::move(r);
        }
        return ok;
    };
    if (probe(T_max)) return best;
    double lo = 0.0, hi = T_max;
    for (int i = 0; i < bisect_iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (snap(mid) >= hi || snap(mid) <= lo) break;  // step resolution reached
        if (probe(mid))
            lo = snap(mid);
        else
            hi = mid;
    }
    return best;
}

}  // namespace sdwave
