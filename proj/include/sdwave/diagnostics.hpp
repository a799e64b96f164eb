#pragma once

#include "sdwave/evolver.hpp"

namespace sdwave {

/// One stored step.  These ten fields, in this order, are the energy CSV
/// schema.
struct EnergyRecord {
    double t = 0.0;
    double l2_u = 0.0, l2_v = 0.0;
    double h1semi_u = 0.0, h1semi_v = 0.0;
    double h1_u = 0.0, h1_v = 0.0;
    double l2_f = 0.0;             // forcing norm at the step's quadrature point
    double cum_forcing_l2 = 0.0;   // integral of ||F|| ds up to t
    double cum_dissipation = 0.0;  // integral of ||d_r v||^2 ds up to t
};

/// Records plus the scheme-level quantities the identity checks need: the
/// flux-form energy the stepper actually dissipates, and per-step dissipation
/// and forcing power sampled at the theta point.  Only the records are
/// exported; the rest stays in memory.
struct EnergyTimeSeries {
    double dt = 0.0;
    double theta = 0.5;
    int store_every = 1;
    std::vector<EnergyRecord> records;
    std::vector<double> scheme_energy;                  // per record
    std::vector<double> flux_semi_u_sq, flux_semi_v_sq; // per record
    std::vector<double> step_dissipation;               // per step, D(v_mid, v_mid)
    std::vector<double> step_power;                     // per step, <F, v_mid>
};

/// Accumulates an EnergyTimeSeries from march step hooks.
class SeriesBuilder {
public:
    SeriesBuilder(const LaplacianStencil& s, const SolverConfig& cfg) : s_(&s) {
        series_.dt = cfg.dt;
        series_.theta = cfg.theta;
        series_.store_every = cfg.store_every;
    }

    void record_initial(const State& st, const GridField& f0 = {}) {
        push_record(st, f0.size() ? l2_norm(s_->grid(), f0) : 0.0);
    }

    StepHook hook() {
        return [this](int k, const State& pre, const State& post, const GridField& f_mid) {
            on_step(k, pre, post, f_mid);
        };
    }

    void on_step(int k, const State& pre, const State& post, const GridField& f_mid) {
        const RadialGrid& g = s_->grid();
        const double th = series_.theta;
        GridField v_mid(post.v.size());
        for (std::size_t j = 0; j < v_mid.size(); ++j)
            v_mid[j] = th * post.v[j] + (1.0 - th) * pre.v[j];
        const double diss = dirichlet_form(*s_, v_mid, v_mid);
        double power = 0.0, f_norm = 0.0;
        if (f_mid.size()) {
            for (std::size_t j = 0; j < v_mid.size(); ++j)
                power += g.quad_weights()[j] * f_mid[j] * v_mid[j];
            f_norm = l2_norm(g, f_mid);
        }
        series_.step_dissipation.push_back(diss);
        series_.step_power.push_back(power);
        cum_diss_ += series_.dt * diss;
        cum_f_ += series_.dt * f_norm;
        if ((k + 1) % series_.store_every == 0) push_record(post, f_norm);
    }

    const EnergyTimeSeries& series() const { return series_; }
    EnergyTimeSeries take() { return std::move(series_); }

private:
    void push_record(const State& st, double f_norm) {
        const RadialGrid& g = s_->grid();
        EnergyRecord r;
        r.t = st.t;
        r.l2_u = l2_norm(g, st.u);
        r.l2_v = l2_norm(g, st.v);
        r.h1semi_u = h1_seminorm(g, st.u);
        r.h1semi_v = h1_seminorm(g, st.v);
        r.h1_u = r.l2_u + r.h1semi_u;
        r.h1_v = r.l2_v + r.h1semi_v;
        r.l2_f = f_norm;
        r.cum_forcing_l2 = cum_f_;
        r.cum_dissipation = cum_diss_;
        series_.records.push_back(r);
        series_.scheme_energy.push_back(scheme_energy(*s_, st));
        series_.flux_semi_u_sq.push_back(dirichlet_form(*s_, st.u, st.u));
        series_.flux_semi_v_sq.push_back(dirichlet_form(*s_, st.v, st.v));
    }

    const LaplacianStencil* s_;
    EnergyTimeSeries series_;
    double cum_diss_ = 0.0, cum_f_ = 0.0;
};

/// Convenience: march and record every store_every step, including t = 0.
inline EnergyTimeSeries run_recorded(const LaplacianStencil& s, const State& init,
                                     const ForcingFn& forcing, const SolverConfig& cfg) {
    SeriesBuilder b(s, cfg);
    GridField f0;
    if (forcing) f0 = forcing(cfg.theta * cfg.dt);
    b.record_initial(init, f0);
    march_linear(s, init, forcing, cfg, b.hook());
    return b.take();
}

/// Per-step residual of the discrete energy identity
///     E_(k+1) - E_k + dt ||d_r v||^2 - dt <F, v> = residual_k,
/// every term at the scheme's quadrature point.  E is assembled from the
/// recorded (centered-difference) norms, so the residual measures the
/// centered-vs-flux gap: first order in dt at fixed dx.
inline std::vector<double> energy_identity_residuals(const EnergyTimeSeries& se) {
    if (se.store_every != 1)
        throw ConfigError("energy_identity_residuals: needs store_every = 1");
    if (se.records.size() < 2) return {};
    std::vector<double> res;
    res.reserve(se.records.size() - 1);
    auto energy = [&](std::size_t k) {
        const EnergyRecord& r = se.records[k];
        return 0.5 * (r.l2_v * r.l2_v + r.h1semi_u * r.h1semi_u);
    };
    for (std::size_t k = 0; k + 1 < se.records.size(); ++k)
        res.push_back(energy(k + 1) - energy(k) + se.dt * se.step_dissipation[k] -
                      se.dt * se.step_power[k]);
    return res;
}

inline double max_abs(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

struct BoundReport {
    double sup_ratio = 0.0;
    double t_at = 0.0;
};

namespace detail {
inline double floored(double x) { return std::max(x, 1e-300); }

/// Trapezoid over record times of a per-record integrand.
inline std::vector<double> cumulative_trapezoid(const EnergyTimeSeries& se,
                                                const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) {
        const double h = se.records[k].t - se.records[k - 1].t;
        out[k] = out[k - 1] + 0.5 * h * (f[k] + f[k - 1]);
    }
    return out;
}
}  // namespace detail

/// Monitor of the basic energy estimate: the pair norm ||(v, d_r u)(t)||
/// against data plus accumulated forcing,
///     ratio_t = ||(v, d_r u)(t)|| / ( ||(v, d_r u)(0)|| + int_0^t ||F|| ds ).
/// Pure decay (F = 0) gives sup ratio <= 1 exactly.
inline BoundReport check_energy_bound(const EnergyTimeSeries& se) {
    BoundReport rep;
    if (se.records.empty()) return rep;
    auto pair_norm = [&](std::size_t k) {
        const EnergyRecord& r = se.records[k];
        return std::sqrt(r.l2_v * r.l2_v + se.flux_semi_u_sq[k]);
    };
    const double base = pair_norm(0);
    for (std::size_t k = 0; k < se.records.size(); ++k) {
        const double ratio = pair_norm(k) / detail::floored(base + se.records[k].cum_forcing_l2);
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.t_at = se.records[k].t;
        }
    }
    return rep;
}

/// Monitor of the displacement estimate
///     ||u(t)|| <= ||u0|| + int_0^t ( ||(u1, d_r u0)|| + int_0^s ||F|| ) ds.
inline BoundReport check_l2_growth_bound(const EnergyTimeSeries& se) {
    BoundReport rep;
    if (se.records.empty()) return rep;
    const double pair0 =
        std::sqrt(se.records[0].l2_v * se.records[0].l2_v + se.flux_semi_u_sq[0]);
    std::vector<double> inner(se.records.size());
    for (std::size_t k = 0; k < inner.size(); ++k)
        inner[k] = pair0 + se.records[k].cum_forcing_l2;
    std::vector<double> outer = detail::cumulative_trapezoid(se, inner);
    for (std::size_t k = 0; k < se.records.size(); ++k) {
        const double ratio =
            se.records[k].l2_u / detail::floored(se.records[0].l2_u + outer[k]);
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.t_at = se.records[k].t;
        }
    }
    return rep;
}

/// Monitor of the velocity-gradient estimate: ||d_r v(t)||^2 against
///     ||(d_r u0, u1)||^2_(L2 x H1) + int ||F||^2 + ||d_r u(t)||^2 + int ||F|| ||v||.
inline BoundReport check_grad_velocity_bound(const EnergyTimeSeries& se) {
    BoundReport rep;
    if (se.records.empty()) return rep;
    const double h1_v0 = se.records[0].l2_v + std::sqrt(se.flux_semi_v_sq[0]);
    const double data = se.flux_semi_u_sq[0] + h1_v0 * h1_v0;
    std::vector<double> f_sq(se.records.size()), f_v(se.records.size());
    for (std::size_t k = 0; k < se.records.size(); ++k) {
        f_sq[k] = se.records[k].l2_f * se.records[k].l2_f;
        f_v[k] = se.records[k].l2_f * se.records[k].l2_v;
    }
    std::vector<double> cum_f_sq = detail::cumulative_trapezoid(se, f_sq);
    std::vector<double> cum_f_v = detail::cumulative_trapezoid(se, f_v);
    for (std::size_t k = 0; k < se.records.size(); ++k) {
        const double den = data + cum_f_sq[k] + se.flux_semi_u_sq[k] + cum_f_v[k];
        const double ratio = se.flux_semi_v_sq[k] / detail::floored(den);
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.t_at = se.records[k].t;
        }
    }
    return rep;
}

}  // namespace sdwave
