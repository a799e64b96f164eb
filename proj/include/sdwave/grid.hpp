#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "sdwave/common.hpp"

namespace sdwave {

/// Radial exterior domain: the complement of a ball of radius r_obs for
/// n >= 2, the half line (0, inf) for n = 1, truncated at r_out.
struct DomainSpec {
    int n = 1;
    double r_obs = 0.0;
    double r_out = 0.0;

    bool operator==(const DomainSpec&) const = default;
};

/// Surface area of the unit (n-1)-sphere, with the n = 1 convention c_1 = 1
/// (half-line measure is plain dx).
inline double sphere_area(int n) {
    if (n < 1) throw ConfigError("sphere_area: dimension must be >= 1");
    if (n == 1) return 1.0;
    // c_n = 2 pi^(n/2) / Gamma(n/2)
    const double pi = std::numbers::pi;
    return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline void validate_domain(const DomainSpec& d) {
    if (d.n < 1) throw ConfigError("domain: n must be >= 1");
    if (d.n == 1) {
        if (d.r_obs != 0.0) throw ConfigError("domain: n = 1 requires r_obs = 0");
    } else {
        if (!(d.r_obs > 0.0)) throw ConfigError("domain: n >= 2 requires r_obs > 0");
    }
    if (!(d.r_out > d.r_obs)) throw ConfigError("domain: r_out must exceed r_obs");
}

/// Production runs truncate an unbounded domain, so the outer boundary must
/// sit well away from the obstacle.  Quadrature tests on closed shells are
/// exempt; the run/sweep entry points are not.
inline void require_far_truncation(const DomainSpec& d) {
    if (d.r_out / std::max(d.r_obs, 1.0) < 4.0)
        throw ConfigError("domain: r_out / max(r_obs, 1) must be >= 4");
}

/// Uniform radial grid r_j = r_obs + j*dx, j = 0..j_max, with trapezoid
/// quadrature weights in the measure c_n r^(n-1) dr.  Nodes 0 and j_max are
/// the Dirichlet boundary.
class RadialGrid {
public:
    RadialGrid() = default;

    RadialGrid(const DomainSpec& dom, int j_max) : dom_(dom), j_max_(j_max) {
        validate_domain(dom);
        if (j_max < 16) throw ConfigError("grid: j_max must be >= 16");
        dx_ = (dom.r_out - dom.r_obs) / j_max;
        r_.resize(j_max + 1);
        w_.resize(j_max + 1);
        const double cn = sphere_area(dom.n);
        for (int j = 0; j <= j_max; ++j) {
            r_[j] = dom.r_obs + j * dx_;
            const double shell = (dom.n == 1) ? 1.0 : std::pow(r_[j], dom.n - 1);
            const double trap = (j == 0 || j == j_max) ? 0.5 : 1.0;
            w_[j] = cn * shell * dx_ * trap;
        }
    }

    const DomainSpec& domain() const { return dom_; }
    int n() const { return dom_.n; }
    int j_max() const { return j_max_; }
    std::size_t size() const { return r_.size(); }
    double dx() const { return dx_; }
    double r(int j) const { return r_[j]; }
    const std::vector<double>& nodes() const { return r_; }
    const std::vector<double>& quad_weights() const { return w_; }

private:
    DomainSpec dom_{};
    int j_max_ = 0;
    double dx_ = 0.0;
    std::vector<double> r_, w_;
};

inline RadialGrid build_grid(const DomainSpec& dom, int j_max) {
    return RadialGrid(dom, j_max);
}

/// Nodal values on a RadialGrid.  `overflowed` marks fields that left the
/// representable range during a blow-up march; norms refuse non-finite
/// entries unless that flag is set.
struct GridField {
    std::vector<double> a;
    bool overflowed = false;

    GridField() = default;
    explicit GridField(std::size_t size, double fill = 0.0) : a(size, fill) {}

    std::size_t size() const { return a.size(); }
    double& operator[](std::size_t j) { return a[j]; }
    double operator[](std::size_t j) const { return a[j]; }
};

inline GridField zero_field(const RadialGrid& g) { return GridField(g.size()); }

inline void require_match(const RadialGrid& g, const GridField& f, const char* who) {
    if (f.size() != g.size()) throw ConfigError(std::string(who) + ": field/grid size mismatch");
}

/// Weighted sum over nodes: approximates the integral of g over the shell in
/// the measure c_n r^(n-1) dr.
inline double integrate(const RadialGrid& g, const GridField& f) {
    require_match(g, f, "integrate");
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double t = g.quad_weights()[j] * f[j];
        if (!is_finite(t) && !f.overflowed) throw NumericError("integrate: non-finite entry");
        s += t;
    }
    return s;
}

inline double l2_norm(const RadialGrid& g, const GridField& f) {
    require_match(g, f, "l2_norm");
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double t = g.quad_weights()[j] * f[j] * f[j];
        if (!is_finite(t) && !f.overflowed) throw NumericError("l2_norm: non-finite entry");
        s += t;
    }
    return std::sqrt(s);
}

/// Centered-difference radial derivative, one-sided at the two boundary nodes.
inline GridField radial_derivative(const RadialGrid& g, const GridField& f) {
    require_match(g, f, "radial_derivative");
    const std::size_t m = f.size();
    GridField d(m);
    d.overflowed = f.overflowed;
    const double dx = g.dx();
    d[0] = (f[1] - f[0]) / dx;
    for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * dx);
    d[m - 1] = (f[m - 1] - f[m - 2]) / dx;
    return d;
}

inline double h1_seminorm(const RadialGrid& g, const GridField& f) {
    return l2_norm(g, radial_derivative(g, f));
}

/// H1 norm in the convention used throughout: ||f||_L2 + ||d_r f||_L2.
inline double h1_norm(const RadialGrid& g, const GridField& f) {
    return l2_norm(g, f) + h1_seminorm(g, f);
}

}  // namespace sdwave
