#pragma once

#include <limits>
#include <optional>
#include <utility>

#include "sdwave/evolver.hpp"

namespace sdwave {

struct Thresholds {
    double blow_factor = 1e6;  // M_blow = blow_factor * max(N(0), 1)
    double fit_decade = 10.0;  // kappa fit window: trailing records within this growth factor
    int min_fit_points = 5;

    bool operator==(const Thresholds&) const = default;
};

struct Verdict {
    enum class Tag { global_up_to, blowup_at };
    Tag tag = Tag::global_up_to;
    double horizon = 0.0;        // time actually marched (global case)
    double t_est = 0.0;          // extrapolated blow-up time
    double t_last_stable = 0.0;  // last time with norm <= M_blow
    double kappa = 0.0;          // fitted growth exponent of N ~ (T - t)^(-kappa)
    double peak_norm = 0.0;      // largest finite H1 x H1 norm seen
    bool refinement_confirmed = false;
};

struct DetectReport {
    Verdict verdict;
    std::vector<double> ts, norms;  // finite history, refined tail spliced in
    double m_blow = 0.0;
};

namespace detail {

struct CoreOutcome {
    bool crossed = false;
    double t_last_stable = 0.0;
    double t_cross = 0.0;
    std::vector<double> ts, norms;
    std::vector<State> snapshots;
    double snap_spacing = 0.0;
};

inline CoreOutcome blow_march(const LaplacianStencil& s, const State& init,
                              const std::optional<NonlinKind>& kind, const SolverConfig& cfg,
                              double m_blow) {
    const RadialGrid& g = s.grid();
    ThetaStepper stepper(s, cfg.dt, cfg.theta);
    const long K = step_count(cfg);
    const long snap_every = std::max<long>(1, K / 32);
    CoreOutcome out;
    out.snap_spacing = snap_every * cfg.dt;
    State st = init;
    out.ts.push_back(st.t);
    out.norms.push_back(h1_norm(g, st.u) + h1_norm(g, st.v));
    out.snapshots.push_back(st);
    GridField none;
    for (long k = 0; k < K; ++k) {
        const double t_pre = st.t;
        GridField f;
        if (kind) {
            f = eval_f(*kind, st.u, st.v);
            if (f.overflowed) {
                out.crossed = true;
                out.t_last_stable = t_pre;
                out.t_cross = t_pre + cfg.dt;
                return out;
            }
        }
        stepper.step(st, kind ? f : none);
        if (!state_finite(st)) {
            out.crossed = true;
            out.t_last_stable = t_pre;
            out.t_cross = st.t;
            return out;
        }
        const double N = h1_norm(g, st.u) + h1_norm(g, st.v);
        out.ts.push_back(st.t);
        out.norms.push_back(N);
        if (N > m_blow) {
            out.crossed = true;
            out.t_last_stable = t_pre;
            out.t_cross = st.t;
            return out;
        }
        if ((k + 1) % snap_every == 0) out.snapshots.push_back(st);
    }
    out.t_last_stable = st.t;
    return out;
}

struct KappaFit {
    double kappa = 0.0;
    double t_est = 0.0;
    bool ok = false;
};

/// N(t) ~ A (T - t)^(-kappa)  iff  N^(-1/kappa) is linear in t, hitting zero
/// at T.  Chooses kappa by minimizing the least-squares residual of that line
/// over the trailing growth decade, then extrapolates the zero crossing.
inline KappaFit fit_blowup(const std::vector<double>& ts, const std::vector<double>& ns,
                           const Thresholds& thr) {
    KappaFit best;
    if (ts.size() < 2) return best;
    const double n_end = ns.back();
    std::size_t i0 = ns.size();
    while (i0 > 0 && ns[i0 - 1] >= n_end / thr.fit_decade && ns[i0 - 1] > 0.0) --i0;
    const std::size_t count = ns.size() - i0;
    if (count < static_cast<std::size_t>(thr.min_fit_points)) return best;
    std::vector<double> t(ts.begin() + i0, ts.end());

    auto sse_at = [&](double kappa) {
        std::vector<double> y(count);
        for (std::size_t i = 0; i < count; ++i) y[i] = std::pow(ns[i0 + i], -1.0 / kappa);
        LineFit f = fit_line(t, y);
        // Normalize so different kappas (different y scales) are comparable.
        double scale = 0.0;
        for (double v : y) scale += v * v;
        return std::pair<double, LineFit>(f.sse / std::max(scale, 1e-300), f);
    };

    double best_sse = std::numeric_limits<double>::infinity();
    double best_kappa = 1.0;
    const int grid_n = 81;
    for (int i = 0; i < grid_n; ++i) {
        const double kappa = std::exp(std::log(0.05) + (std::log(20.0) - std::log(0.05)) * i / (grid_n - 1));
        const double sse = sse_at(kappa).first;
        if (sse < best_sse) {
            best_sse = sse;
            best_kappa = kappa;
        }
    }
    // Golden-section polish around the best grid point.
    double a = best_kappa / 1.2, b = best_kappa * 1.2;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = sse_at(x1).first, f2 = sse_at(x2).first;
    for (int i = 0; i < 32; ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = sse_at(x1).first;
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = sse_at(x2).first;
        }
    }
    best.kappa = 0.5 * (a + b);
    LineFit line = sse_at(best.kappa).second;
    if (line.slope < 0.0) {
        best.t_est = -line.intercept / line.slope;
        best.ok = true;
    }
    return best;
}

inline DetectReport detect_once(const LaplacianStencil& s, const State& init,
                                const std::optional<NonlinKind>& kind, const SolverConfig& cfg,
                                const Thresholds& thr) {
    const RadialGrid& g = s.grid();
    const double n0 = h1_norm(g, init.u) + h1_norm(g, init.v);
    const double m_blow = thr.blow_factor * std::max(n0, 1.0);

    CoreOutcome coarse = blow_march(s, init, kind, cfg, m_blow);

    DetectReport rep;
    rep.m_blow = m_blow;
    if (!coarse.crossed) {
        rep.ts = std::move(coarse.ts);
        rep.norms = std::move(coarse.norms);
        rep.verdict.tag = Verdict::Tag::global_up_to;
        rep.verdict.horizon = coarse.t_last_stable;
        rep.verdict.t_last_stable = coarse.t_last_stable;
        for (double N : rep.norms) rep.verdict.peak_norm = std::max(rep.verdict.peak_norm, N);
        return rep;
    }

    // Refine the final 10% of [0, t_cross] at dt/4, restarting from the last
    // snapshot at or before the window start.
    const double t_tail = 0.9 * coarse.t_cross;
    std::size_t si = 0;
    for (std::size_t i = 0; i < coarse.snapshots.size(); ++i)
        if (coarse.snapshots[i].t <= t_tail) si = i;
    const State& restart = coarse.snapshots[si];

    SolverConfig fine = cfg;
    fine.dt = cfg.dt / 4.0;
    fine.t_end = std::max(fine.dt, 1.5 * (coarse.t_cross - restart.t) + 4.0 * fine.dt);
    CoreOutcome tail = blow_march(s, restart, kind, fine, m_blow);

    // Splice: coarse history up to the restart, refined tail afterwards.
    for (std::size_t i = 0; i < coarse.ts.size() && coarse.ts[i] <= restart.t + 1e-12; ++i) {
        rep.ts.push_back(coarse.ts[i]);
        rep.norms.push_back(coarse.norms[i]);
    }
    for (std::size_t i = 1; i < tail.ts.size(); ++i) {
        rep.ts.push_back(tail.ts[i]);
        rep.norms.push_back(tail.norms[i]);
    }

    rep.verdict.tag = Verdict::Tag::blowup_at;
    rep.verdict.t_last_stable = tail.crossed ? tail.t_last_stable : coarse.t_last_stable;
    rep.verdict.horizon = rep.verdict.t_last_stable;
    for (double N : rep.norms) rep.verdict.peak_norm = std::max(rep.verdict.peak_norm, N);

    KappaFit fit = fit_blowup(rep.ts, rep.norms, thr);
    if (fit.ok) {
        rep.verdict.kappa = fit.kappa;
        rep.verdict.t_est = std::max(fit.t_est, rep.verdict.t_last_stable);
    } else {
        rep.verdict.kappa = 0.0;
        rep.verdict.t_est = rep.verdict.t_last_stable;
    }
    return rep;
}

}  // namespace detail

/// Marches the problem (semilinear, or linear when kind is empty) watching
/// the H1 x H1 norm N(t) = h1_norm(u) + h1_norm(v) against
/// M_blow = blow_factor max(N(0), 1).  A crossing or overflow yields
/// blowup_at with a refined t_last_stable, a fitted growth exponent, and an
/// extrapolated t_est; refinement_confirmed means a dt/2 rerun agrees on
/// t_est within 5%.
inline DetectReport detect(const LaplacianStencil& s, const GridField& u0, const GridField& u1,
                           const std::optional<NonlinKind>& kind, const SolverConfig& cfg,
                           const Thresholds& thr = {}, bool confirm = true) {
    validate_solver(cfg, s.grid());
    if (kind) validate_kind(*kind);
    const State init = make_state(s.grid(), u0, u1);
    DetectReport rep = detail::detect_once(s, init, kind, cfg, thr);
    if (confirm && rep.verdict.tag == Verdict::Tag::blowup_at) {
        SolverConfig half = cfg;
        half.dt = cfg.dt / 2.0;
        DetectReport rep2 = detail::detect_once(s, init, kind, half, thr);
        if (rep2.verdict.tag == Verdict::Tag::blowup_at) {
            const double a = rep.verdict.t_est, b = rep2.verdict.t_est;
            rep.verdict.refinement_confirmed = std::abs(a - b) <= 0.05 * std::max({a, b, 1e-12});
        }
    }
    return rep;
}

/// Verdict table across a data amplitude ladder (same profile shape).
template <typename DataFn>
std::vector<std::pair<double, Verdict>> amplitude_threshold_scan(
    const LaplacianStencil& s, DataFn&& data_for_amplitude, const std::optional<NonlinKind>& kind,
    const SolverConfig& cfg, const Thresholds& thr, const std::vector<double>& amplitudes,
    bool confirm = false) {
    std::vector<std::pair<double, Verdict>> out;
    for (double a : amplitudes) {
        auto [u0, u1] = data_for_amplitude(a);
        out.emplace_back(a, detect(s, u0, u1, kind, cfg, thr, confirm).verdict);
    }
    return out;
}

}  // namespace sdwave
