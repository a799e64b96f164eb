#pragma once

#include <limits>
#include <utility>

#include "sdwave/nonlinearity.hpp"

namespace sdwave {

/// Closure tolerance for inclusive exponent comparisons and the width of the
/// boundary-proximity flag.
inline constexpr double kRegionEps = 1e-12;
inline constexpr double kBoundaryEps = 1e-9;

struct TheoryConstants {
    double alpha1 = (1.0 + std::sqrt(17.0)) / 4.0;  // positive root of 2a^2 - a - 2
    double alpha2 = (1.0 + std::sqrt(5.0)) / 2.0;   // positive root of a^2 - a - 1

    /// Critical derivative exponent; the n = 2 value bounds a strict
    /// inequality, the others are attained.
    double q_crit(int n) const {
        if (n == 1) return 1.0 + 1.0 / (1.0 + std::sqrt(5.0));
        if (n == 2) return 1.5;
        return 1.0 + 1.0 / n;
    }

    /// Critical power exponent of the mixed disjunction, n >= 2 only.
    double p_crit(int n) const {
        if (n == 2) return 3.0;
        if (n >= 3) return 1.0 + 2.0 / (n - 1);
        throw ConfigError("p_crit: defined for n >= 2 only");
    }
};

inline TheoryConstants constants() { return {}; }

struct RegionAnswer {
    bool in_region = false;
    bool on_boundary = false;  // within kBoundaryEps of a stated boundary
    int condition = 0;         // which listed condition fired (n = 1 mixed)
    double witness_alpha = std::numeric_limits<double>::quiet_NaN();
};

inline RegionAnswer in_blowup_region_derivative(int n, double q) {
    if (!(q > 1.0)) throw ConfigError("in_blowup_region_derivative: q must exceed 1");
    const TheoryConstants c;
    const double qc = c.q_crit(n);
    RegionAnswer ans;
    ans.in_region = (n == 2) ? (q < qc) : (q <= qc + kRegionEps);
    ans.on_boundary = std::abs(q - qc) <= kBoundaryEps;
    return ans;
}

namespace detail {

/// Outer q-boundary of the n = 1 mixed region as a function of p: infinite
/// below 1 + alpha1, the curve 1 + 1/(2(p-1)) up to 1 + alpha2, and the
/// horizontal (1 + alpha2)/2 beyond.
inline double mixed1d_q_max(double p) {
    const TheoryConstants c;
    if (p <= 1.0 + c.alpha1) return std::numeric_limits<double>::infinity();
    if (p <= 1.0 + c.alpha2) return 1.0 + 0.5 / (p - 1.0);
    return 0.5 * (1.0 + c.alpha2);
}

}  // namespace detail

inline RegionAnswer in_blowup_region_mixed(int n, double p, double q) {
    if (!(p > 1.0) || !(q > 1.0))
        throw ConfigError("in_blowup_region_mixed: exponents must exceed 1");
    const TheoryConstants c;
    RegionAnswer ans;
    if (n >= 3) {
        const double pc = c.p_crit(n), qc = c.q_crit(n);
        if (p <= pc + kRegionEps) { ans.in_region = true; ans.condition = 1; }
        else if (q <= qc + kRegionEps) { ans.in_region = true; ans.condition = 2; }
        ans.on_boundary = std::abs(p - pc) <= kBoundaryEps || std::abs(q - qc) <= kBoundaryEps;
        return ans;
    }
    if (n == 2) {
        if (p < 3.0) { ans.in_region = true; ans.condition = 1; }
        else if (q < 1.5) { ans.in_region = true; ans.condition = 2; }
        ans.on_boundary = std::abs(p - 3.0) <= kBoundaryEps || std::abs(q - 1.5) <= kBoundaryEps;
        return ans;
    }

    // n = 1: the four alpha-parametrized conditions, each reduced to its
    // best alpha.  Condition 1 is alpha-free.
    if (p <= 1.0 + c.alpha1 + kRegionEps) {
        ans.in_region = true;
        ans.condition = 1;
        ans.witness_alpha = c.alpha1;
    } else {
        // Condition 2: alpha in [1, alpha1], p <= (2a+1)/(2a-1) decreasing,
        // q <= (a+1)/2 increasing; the q constraint forces a >= 2q-1, and
        // taking the smallest admissible alpha maximizes the p bound.
        const double a2c = std::max(1.0, 2.0 * q - 1.0);
        if (a2c <= c.alpha1 + kRegionEps &&
            p <= (2.0 * a2c + 1.0) / (2.0 * a2c - 1.0) + kRegionEps) {
            ans.in_region = true;
            ans.condition = 2;
            ans.witness_alpha = a2c;
        }
        // Condition 3: alpha in [alpha1, alpha2], p <= a+1 forces a >= p-1,
        // and q <= (2a+1)/(2a) decreases, so the smallest alpha wins again.
        if (!ans.in_region) {
            const double a3 = std::max(c.alpha1, p - 1.0);
            if (a3 <= c.alpha2 + kRegionEps && p <= a3 + 1.0 + kRegionEps &&
                q <= 1.0 + 0.5 / a3 + kRegionEps) {
                ans.in_region = true;
                ans.condition = 3;
                ans.witness_alpha = a3;
            }
        }
        // Condition 4: p-free.
        if (!ans.in_region && q <= 0.5 * (1.0 + c.alpha2) + kRegionEps) {
            ans.in_region = true;
            ans.condition = 4;
            ans.witness_alpha = c.alpha2;
        }
    }
    const double qmax = detail::mixed1d_q_max(p);
    ans.on_boundary = std::abs(p - (1.0 + c.alpha1)) <= kBoundaryEps ||
                      (std::isfinite(qmax) && std::abs(q - qmax) <= kBoundaryEps);
    return ans;
}

inline RegionAnswer in_blowup_region(int n, const NonlinKind& kind) {
    switch (kind.tag) {
        case NonlinKind::Tag::derivative_only:
            return in_blowup_region_derivative(n, kind.q);
        case NonlinKind::Tag::mixed:
            return in_blowup_region_mixed(n, kind.p, kind.q);
        case NonlinKind::Tag::power_only:
            break;
    }
    throw ConfigError("in_blowup_region: the power-only nonlinearity has no region characterization");
}

/// Boundary polyline of a region for phase-diagram overlays, as (p, q)
/// vertices.  Derivative regions are a horizontal line; mixed n >= 2 regions
/// are an L; mixed n = 1 follows the curved reduction.
inline std::vector<std::pair<double, double>> region_boundary_polyline(int n, bool mixed,
                                                                       double p_min, double p_max,
                                                                       double q_cap,
                                                                       int samples = 64) {
    if (!(p_min > 1.0) || !(p_max > p_min) || !(q_cap > 1.0) || samples < 2)
        throw ConfigError("region_boundary_polyline: bad window");
    const TheoryConstants c;
    std::vector<std::pair<double, double>> pts;
    if (!mixed) {
        const double qc = c.q_crit(n);
        pts.emplace_back(p_min, qc);
        pts.emplace_back(p_max, qc);
        return pts;
    }
    if (n >= 2) {
        const double pc = c.p_crit(n), qc = c.q_crit(n);
        pts.emplace_back(pc, q_cap);
        pts.emplace_back(pc, qc);
        pts.emplace_back(p_max, qc);
        return pts;
    }
    const double p_lo = 1.0 + c.alpha1, p_hi = 1.0 + c.alpha2;
    pts.emplace_back(p_lo, q_cap);
    for (int i = 0; i <= samples; ++i) {
        const double p = p_lo + (p_hi - p_lo) * i / samples;
        pts.emplace_back(p, detail::mixed1d_q_max(p));
    }
    pts.emplace_back(p_max, 0.5 * (1.0 + c.alpha2));
    return pts;
}

}  // namespace sdwave
