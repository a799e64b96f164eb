#pragma once

#include "sdwave/spatial.hpp"

namespace sdwave {

/// Positive harmonic weight vanishing on the obstacle boundary:
///   n = 1 :  phi0(x) = x
///   n = 2 :  phi0(r) = ln(r / r_obs)
///   n >= 3:  phi0(r) = 1 - (r_obs / r)^(n-2), normalized to approach 1.
/// Used as the spatial factor of the test functions and as the weight of the
/// sign functional.
class HarmonicWeight {
public:
    HarmonicWeight() = default;

    explicit HarmonicWeight(const RadialGrid& g) : grid_(&g) {
        values_ = GridField(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) values_[j] = value(g.r(j));
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridField& values() const { return values_; }

    double value(double r) const {
        const int n = grid_->n();
        const double a = grid_->domain().r_obs;
        if (n == 1) return r;
        if (n == 2) return std::log(r / a);
        return 1.0 - std::pow(a / r, n - 2);
    }

    double deriv(double r) const {
        const int n = grid_->n();
        const double a = grid_->domain().r_obs;
        if (n == 1) return 1.0;
        if (n == 2) return 1.0 / r;
        return (n - 2) * std::pow(a, n - 2) / std::pow(r, n - 1);
    }

    double second_deriv(double r) const {
        const int n = grid_->n();
        const double a = grid_->domain().r_obs;
        if (n == 1) return 0.0;
        if (n == 2) return -1.0 / (r * r);
        return -(n - 2) * (n - 1) * std::pow(a, n - 2) / std::pow(r, n);
    }

private:
    const RadialGrid* grid_ = nullptr;
    GridField values_;
};

inline HarmonicWeight make_weight(const RadialGrid& g) { return HarmonicWeight(g); }

/// Max |L_h phi0| over interior nodes: how harmonic the weight is under the
/// discrete Laplacian.  Exactly 0 for n = 1, O(dx^2) otherwise.
inline double laplacian_residual(const HarmonicWeight& w) {
    const RadialGrid& g = w.grid();
    LaplacianStencil s(g);
    GridField lap = apply_laplacian(s, w.values());
    double worst = 0.0;
    for (int j = 1; j < g.j_max(); ++j) worst = std::max(worst, std::abs(lap[j]));
    return worst;
}

struct GradientDecayReport {
    double constant = 0.0;  // max of |phi0'(r)| r^(n-1) over r >= 2 r_obs
    double r_min = 0.0;     // first node entering the max
    int nodes_used = 0;
};

/// The decay product |phi0'(r)| r^(n-1) is constant in closed form:
/// (n-2) r_obs^(n-2) for n >= 3 and 1 for n = 2.  Reported from nodes with
/// r >= 2 r_obs so refinement studies can confirm grid independence.
inline GradientDecayReport gradient_decay_check(const HarmonicWeight& w) {
    const RadialGrid& g = w.grid();
    if (g.n() < 2) throw ConfigError("gradient_decay_check: needs n >= 2");
    GradientDecayReport rep;
    rep.r_min = 2.0 * g.domain().r_obs;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double r = g.r(j);
        if (r < rep.r_min) continue;
        const double prod = std::abs(w.deriv(r)) * std::pow(r, g.n() - 1);
        rep.constant = std::max(rep.constant, prod);
        ++rep.nodes_used;
    }
    if (rep.nodes_used == 0) throw ConfigError("gradient_decay_check: no nodes with r >= 2 r_obs");
    return rep;
}

}  // namespace sdwave
