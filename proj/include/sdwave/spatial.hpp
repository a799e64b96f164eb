#pragma once

#include <vector>

#include "sdwave/grid.hpp"

namespace sdwave {

/// Conservative discretization of the radial Laplacian
///     L g = (1/r^(n-1)) d_r ( r^(n-1) d_r g ),
/// built from face fluxes at r_(j +/- 1/2).  Interior row j:
///     (L g)_j = [ lo_j g_(j-1) - (lo_j + hi_j) g_j + hi_j g_(j+1) ] / dx^2,
/// lo_j = (r_(j-1/2)/r_j)^(n-1), hi_j = (r_(j+1/2)/r_j)^(n-1).  Rows 0 and
/// j_max are Dirichlet and produce 0.  The conservative form makes the
/// operator self-adjoint and negative semidefinite under the r^(n-1)
/// quadrature weight, which is what the energy arguments lean on.
class LaplacianStencil {
public:
    LaplacianStencil() = default;

    explicit LaplacianStencil(const RadialGrid& g) : grid_(&g) {
        const int m = g.j_max();
        lo_.assign(m + 1, 0.0);
        hi_.assign(m + 1, 0.0);
        face_.assign(m + 1, 0.0);  // face_[j] = (r_(j+1/2))^(n-1), faces j..j+1
        const int n = g.n();
        for (int j = 0; j < m; ++j) {
            const double rf = g.r(j) + 0.5 * g.dx();
            face_[j] = (n == 1) ? 1.0 : std::pow(rf, n - 1);
        }
        for (int j = 1; j < m; ++j) {
            const double shell = (n == 1) ? 1.0 : std::pow(g.r(j), n - 1);
            lo_[j] = face_[j - 1] / shell;
            hi_[j] = face_[j] / shell;
        }
    }

    const RadialGrid& grid() const { return *grid_; }
    double lo(int j) const { return lo_[j]; }
    double hi(int j) const { return hi_[j]; }
    double face(int j) const { return face_[j]; }

private:
    const RadialGrid* grid_ = nullptr;
    std::vector<double> lo_, hi_, face_;
};

/// Applies the stencil to a Dirichlet field (boundary nodes forced to 0).
inline GridField apply_laplacian(const LaplacianStencil& s, const GridField& f) {
    const RadialGrid& g = s.grid();
    require_match(g, f, "apply_laplacian");
    const int m = g.j_max();
    GridField out(f.size());
    out.overflowed = f.overflowed;
    const double inv = 1.0 / (g.dx() * g.dx());
    for (int j = 1; j < m; ++j)
        out[j] = (s.lo(j) * f[j - 1] - (s.lo(j) + s.hi(j)) * f[j] + s.hi(j) * f[j + 1]) * inv;
    return out;
}

/// Flux-form Dirichlet bilinear form
///     D(f, g) = c_n sum_faces r_face^(n-1) (df/dx)(dg/dx) dx,
/// the exact negative of <L f, g> under the quadrature weights for fields
/// vanishing at both boundary nodes.  D(f, f) is the seminorm part of the
/// scheme energy.
inline double dirichlet_form(const LaplacianStencil& s, const GridField& f, const GridField& g) {
    const RadialGrid& gr = s.grid();
    require_match(gr, f, "dirichlet_form");
    require_match(gr, g, "dirichlet_form");
    const int m = gr.j_max();
    const double cn = sphere_area(gr.n());
    double sum = 0.0;
    for (int j = 0; j < m; ++j) sum += s.face(j) * (f[j + 1] - f[j]) * (g[j + 1] - g[j]);
    return cn * sum / gr.dx();
}

/// Tridiagonal system in three diagonals (sub, diag, super); sub[0] and
/// super[last] are unused.
struct Tridiagonal {
    std::vector<double> sub, diag, super;
};

/// Thomas elimination.  The solver systems here are strictly diagonally
/// dominant, so no pivoting; a pivot below 1e-14 reports a singular system.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& t, const std::vector<double>& rhs) {
    const std::size_t m = rhs.size();
    if (t.sub.size() != m || t.diag.size() != m || t.super.size() != m)
        throw ConfigError("solve_tridiagonal: band/rhs size mismatch");
    std::vector<double> c(m), d(m), x(m);
    double piv = t.diag[0];
    if (std::abs(piv) < 1e-14) throw NumericError("solve_tridiagonal: singular pivot");
    c[0] = t.super[0] / piv;
    d[0] = rhs[0] / piv;
    for (std::size_t j = 1; j < m; ++j) {
        piv = t.diag[j] - t.sub[j] * c[j - 1];
        if (std::abs(piv) < 1e-14) throw NumericError("solve_tridiagonal: singular pivot");
        c[j] = t.super[j] / piv;
        d[j] = (rhs[j] - t.sub[j] * d[j - 1]) / piv;
    }
    x[m - 1] = d[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) x[j] = d[j] - c[j] * x[j + 1];
    return x;
}

}  // namespace sdwave
