#pragma once

#include <atomic>
#include <thread>

#include "sdwave/io.hpp"
#include "sdwave/theory.hpp"

namespace sdwave {

/// Phase-diagram experiment over a (p, q) exponent grid.  The per-run budget
/// is a step cap rather than a wall-clock cap so identical plans produce
/// identical results on any machine and worker count.
struct SweepPlan {
    DomainSpec domain{1, 0.0, 40.0};
    std::size_t j_max = 200;
    SolverConfig solver{0.05, 0.5, 20.0, 1};
    NonlinKind::Tag kind = NonlinKind::Tag::mixed;
    std::vector<double> p_grid;  // ignored for derivative-only sweeps
    std::vector<double> q_grid;
    ProfileSpec u1_shape = bump_profile(4.0, 1.0, 1.0);  // amplitude overridden per ladder step
    std::vector<double> amplitudes{0.5, 1.0, 2.0, 5.0, 10.0};
    Thresholds thresholds;
    std::size_t budget_steps = 4000;
    bool confirm = true;
    bool enforce_local_theory = false;  // restrict grids to (1, n/(n-2)] for n >= 3
    unsigned long seed = 1;
};

inline void validate_plan(const SweepPlan& plan) {
    validate_domain(plan.domain);
    require_far_truncation(plan.domain);
    if (plan.kind == NonlinKind::Tag::power_only)
        throw ConfigError("sweep: power-only nonlinearity has no theory overlay");
    auto check_grid = [&](const std::vector<double>& grid, const char* name) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] > 1.0)) throw ConfigError(std::string("sweep: ") + name + " must exceed 1");
            if (i && !(grid[i] > grid[i - 1]))
                throw ConfigError(std::string("sweep: ") + name + " must be strictly increasing");
        }
    };
    check_grid(plan.p_grid, "p grid");
    check_grid(plan.q_grid, "q grid");
    if (plan.enforce_local_theory && plan.domain.n >= 3) {
        const double cap = static_cast<double>(plan.domain.n) / (plan.domain.n - 2);
        for (double e : plan.p_grid)
            if (e > cap + kRegionEps)
                throw ConfigError("sweep: p grid exceeds the local-theory range n/(n-2)");
        for (double e : plan.q_grid)
            if (e > cap + kRegionEps)
                throw ConfigError("sweep: q grid exceeds the local-theory range n/(n-2)");
    }
    if (plan.budget_steps == 0) throw ConfigError("sweep: budget must be positive");
    if (plan.amplitudes.empty()) throw ConfigError("sweep: amplitude ladder must be nonempty");
    for (double a : plan.amplitudes)
        if (!(a > 0.0)) throw ConfigError("sweep: amplitudes must be positive");
}

struct SweepEntry {
    double amplitude = 0.0;
    Verdict verdict;
    double sign_functional = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepCell {
    double p = std::numeric_limits<double>::quiet_NaN();  // NaN for derivative-only sweeps
    double q = 0.0;
    RegionAnswer theory;
    bool observed_blowup = false;
    bool agreement = true;  // theory blow-up implies observed blow-up at some amplitude
    std::vector<SweepEntry> entries;
};

struct SweepResult {
    SweepPlan plan;
    std::vector<SweepCell> cells;
};

inline SweepResult run_sweep(const SweepPlan& plan, unsigned workers = 1) {
    validate_plan(plan);
    SweepResult result;
    result.plan = plan;

    const bool mixed = plan.kind == NonlinKind::Tag::mixed;
    if (plan.q_grid.empty() || (mixed && plan.p_grid.empty())) return result;

    for (double p : (mixed ? plan.p_grid : std::vector<double>{0.0})) {
        for (double q : plan.q_grid) {
            SweepCell cell;
            cell.q = q;
            if (mixed) {
                cell.p = p;
                cell.theory = in_blowup_region_mixed(plan.domain.n, p, q);
            } else {
                cell.theory = in_blowup_region_derivative(plan.domain.n, q);
            }
            cell.entries.resize(plan.amplitudes.size());
            for (std::size_t a = 0; a < plan.amplitudes.size(); ++a)
                cell.entries[a].amplitude = plan.amplitudes[a];
            result.cells.push_back(std::move(cell));
        }
    }

    // Flat task list; each task owns one pre-allocated entry slot, so worker
    // count only changes scheduling, never the aggregate.
    struct Task { std::size_t cell, entry; };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        for (std::size_t a = 0; a < plan.amplitudes.size(); ++a) tasks.push_back({c, a});

    const std::size_t steps = std::min<std::size_t>(
        static_cast<std::size_t>(step_count(plan.solver)), plan.budget_steps);
    SolverConfig run_cfg = plan.solver;
    run_cfg.t_end = static_cast<double>(steps) * plan.solver.dt;

    auto run_task = [&](const Task& task) {
        SweepCell& cell = result.cells[task.cell];
        SweepEntry& entry = cell.entries[task.entry];
        try {
            RadialGrid grid(plan.domain, plan.j_max);
            LaplacianStencil stencil(grid);
            HarmonicWeight weight = make_weight(grid);
            ProfileSpec shape = plan.u1_shape;
            shape.amplitude = entry.amplitude;
            const GridField u1 = make_data(grid, shape);
            const GridField u0 = zero_field(grid);
            entry.sign_functional = sign_functional(weight, u1);
            const NonlinKind kind = mixed ? NonlinKind::mixed(cell.p, cell.q)
                                          : NonlinKind::derivative(cell.q);
            DetectReport rep =
                detect(stencil, u0, u1, kind, run_cfg, plan.thresholds, plan.confirm);
            entry.verdict = rep.verdict;
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
        }
    };

    const unsigned nw = std::max(1u, std::min<unsigned>(workers, tasks.size()));
    if (nw == 1) {
        for (const Task& t : tasks) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    run_task(tasks[i]);
                }
            });
        for (std::thread& th : pool) th.join();
    }

    for (SweepCell& cell : result.cells) {
        cell.observed_blowup = false;
        for (const SweepEntry& e : cell.entries)
            if (!e.failed && e.verdict.tag == Verdict::Tag::blowup_at) cell.observed_blowup = true;
        cell.agreement = !cell.theory.in_region || cell.observed_blowup;
    }
    return result;
}

inline std::string phase_csv_text(const SweepResult& result) {
    std::string out =
        "p,q,amplitude,tag,t_est,t_last_stable,kappa,peak_norm,refinement_confirmed,"
        "sign_functional,theory_in_region,theory_boundary,agreement,failed,error\n";
    for (const SweepCell& cell : result.cells) {
        for (const SweepEntry& e : cell.entries) {
            const bool blow = e.verdict.tag == Verdict::Tag::blowup_at;
            out += std::isnan(cell.p) ? std::string("") : format17(cell.p);
            out += ',' + format17(cell.q);
            out += ',' + format17(e.amplitude);
            out += ',';
            out += e.failed ? "failed" : (blow ? "BlowupAt" : "GlobalUpTo");
            out += ',' + format17(blow ? e.verdict.t_est : e.verdict.horizon);
            out += ',' + format17(blow ? e.verdict.t_last_stable : e.verdict.horizon);
            out += ',' + format17(blow ? e.verdict.kappa : 0.0);
            out += ',' + format17(e.verdict.peak_norm);
            out += ',';
            out += (e.verdict.refinement_confirmed ? "1" : "0");
            out += ',' + format17(e.sign_functional);
            out += ',';
            out += (cell.theory.in_region ? "1" : "0");
            out += ',';
            out += (cell.theory.on_boundary ? "1" : "0");
            out += ',';
            out += (cell.agreement ? "1" : "0");
            out += ',';
            out += (e.failed ? "1" : "0");
            out += ',';
            std::string msg = e.error;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            out += msg;
            out += '\n';
        }
    }
    return out;
}

/// Writes the verdict CSV, the theory-overlay polyline, and a plot script
/// that references only those two files.  Byte-stable for identical results.
inline std::vector<std::string> phase_diagram_export(const SweepResult& result,
                                                     OutputWriter& writer) {
    std::vector<std::string> paths;
    paths.push_back(writer.write_text("phase.csv", phase_csv_text(result)));

    std::vector<std::pair<double, double>> polyline;
    if (!result.cells.empty()) {
        const SweepPlan& plan = result.plan;
        const bool mixed = plan.kind == NonlinKind::Tag::mixed;
        const double p_max = mixed ? plan.p_grid.back() + 0.5 : 4.0;
        const double q_cap = plan.q_grid.back() + 0.5;
        polyline = region_boundary_polyline(plan.domain.n, mixed, 1.0 + 1e-6, p_max, q_cap);
    }
    paths.push_back(writer.write_text("overlay.csv", overlay_csv_text(polyline)));
    paths.push_back(writer.write_text("plot_phase.py", phase_plot_script("phase.csv", "overlay.csv")));
    return paths;
}

}  // namespace sdwave
