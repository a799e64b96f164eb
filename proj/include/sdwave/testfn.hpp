#pragma once

#include <functional>

#include "sdwave/evolver.hpp"
#include "sdwave/harmonic.hpp"

namespace sdwave {

/// Quintic smoothstep bridge sigma(x) = x^3 (10 - 15 x + 6 x^2): C^2 with
/// flat ends, the one ingredient behind both cutoffs.
inline double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
inline double smoothstep_d(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
inline double smoothstep_dd(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

/// Time cutoff: 1 on [0, 1/2], quintic bridge down to 0 at 1.
inline double eta_cut(double s) {
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    return smoothstep(2.0 * (1.0 - s));
}
inline double eta_cut_d(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    return -2.0 * smoothstep_d(2.0 * (1.0 - s));
}
inline double eta_cut_dd(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    return 4.0 * smoothstep_dd(2.0 * (1.0 - s));
}

/// Space cutoff: 1 on [0, 1], quintic bridge down to 0 at 2.
inline double phi_cut(double rho) {
    if (rho <= 1.0) return 1.0;
    if (rho >= 2.0) return 0.0;
    return smoothstep(2.0 - rho);
}
inline double phi_cut_d(double rho) {
    if (rho <= 1.0 || rho >= 2.0) return 0.0;
    return -smoothstep_d(2.0 - rho);
}
inline double phi_cut_dd(double rho) {
    if (rho <= 1.0 || rho >= 2.0) return 0.0;
    return smoothstep_dd(2.0 - rho);
}

/// Cutoff orders used by default: comfortably above the k, l >= 2 ceil(max
/// conjugate exponent) floor the bound derivations need.
inline int default_cutoff_order(double max_conjugate) {
    return 2 * static_cast<int>(std::ceil(2.0 * max_conjugate));
}

/// Scaled cutoff family for one horizon T: the time cutoff eta(t/T)^k, the
/// space cutoff Phi(|x|/S)^l with S = T (n >= 2) or T^alpha (n = 1), and the
/// tail integral Psi(t) = int_t^T eta(tau/T)^k dtau tabulated by per-cell
/// Simpson.
class CutoffSet {
public:
    CutoffSet(double T, int k, int ell, double alpha, int n, double table_dt) {
        if (!(T > 0.0)) throw ConfigError("cutoffs: T must be positive");
        if (k < 2 || ell < 2) throw ConfigError("cutoffs: orders must be >= 2");
        if (n == 1 && !(alpha >= 1.0)) throw ConfigError("cutoffs: alpha must be >= 1");
        if (!(table_dt > 0.0)) throw ConfigError("cutoffs: table step must be positive");
        T_ = T; k_ = k; ell_ = ell; alpha_ = (n == 1) ? alpha : 1.0; n_ = n;
        const long cells = std::max<long>(8, std::lround(std::ceil(T / table_dt)));
        psi_h_ = T / cells;
        psi_.assign(cells + 1, 0.0);
        auto etak = [this](double t) { return std::pow(eta_cut(t / T_), k_); };
        for (long i = cells; i-- > 0;) {
            const double a = i * psi_h_, b = a + psi_h_;
            psi_[i] = psi_[i + 1] + psi_h_ / 6.0 * (etak(a) + 4.0 * etak(0.5 * (a + b)) + etak(b));
        }
    }

    double T() const { return T_; }
    int k() const { return k_; }
    int ell() const { return ell_; }
    double alpha() const { return alpha_; }
    int n() const { return n_; }
    double spatial_scale() const { return (n_ == 1) ? std::pow(T_, alpha_) : T_; }

    double eta_k(double t) const { return std::pow(eta_cut(t / T_), k_); }

    /// Psi(t) by linear interpolation of the table; 0 past T.
    double psi(double t) const {
        if (t >= T_) return 0.0;
        if (t <= 0.0) return psi_[0];
        const double x = t / psi_h_;
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), psi_.size() - 2);
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * psi_[i] + w * psi_[i + 1];
    }

    double psi0() const { return psi_[0]; }

private:
    double T_ = 0.0, alpha_ = 1.0, psi_h_ = 0.0;
    int k_ = 2, ell_ = 2, n_ = 1;
    std::vector<double> psi_;
};

inline CutoffSet make_cutoffs(double T, int k, int ell, double alpha, int n, double table_dt) {
    return CutoffSet(T, k, ell, alpha, n, table_dt);
}

/// Composite test function phi(t, x) = phi0(|x|) Phi^l(|x|/S) eta^k(t/T) and
/// the derivative combinations the weak form needs.  psi_sp is the spatial
/// factor phi0 Phi^l, lap_psi its Laplacian (exactly 0 on the plateau where
/// the cutoff is flat, by harmonicity).
struct CutoffEval {
    double phi = 0.0;
    double phi_t = 0.0, phi_tt = 0.0;
    double lap_phi = 0.0, lap_phi_t = 0.0;
    double psi_sp = 0.0, lap_psi = 0.0;
    double eta_k = 0.0, deta_k = 0.0;  // eta^k(t/T) and its t-derivative
    double psi_weight = 0.0;           // Psi(t)
};

inline CutoffEval composite_test_function(const CutoffSet& c, const HarmonicWeight& w, double t,
                                          double r) {
    if (w.grid().n() != c.n()) throw ConfigError("composite_test_function: dimension mismatch");
    CutoffEval out;
    const double T = c.T();
    const int k = c.k(), ell = c.ell(), n = c.n();

    const double s = t / T;
    const double e = eta_cut(s), ed = eta_cut_d(s) / T, edd = eta_cut_dd(s) / (T * T);
    const double ek = std::pow(e, k);
    const double ekm1 = (e > 0.0) ? std::pow(e, k - 1) : 0.0;
    const double ekm2 = (e > 0.0) ? std::pow(e, k - 2) : 0.0;
    const double dek = k * ekm1 * ed;
    const double ddek = k * (k - 1) * ekm2 * ed * ed + k * ekm1 * edd;

    const double S = c.spatial_scale();
    const double rho = r / S;
    const double P = phi_cut(rho);
    const double Pk = std::pow(P, ell);
    const double Pkm1 = (P > 0.0) ? std::pow(P, ell - 1) : 0.0;
    const double Pkm2 = (P > 0.0) ? std::pow(P, ell - 2) : 0.0;
    const double Pd = ell * Pkm1 * phi_cut_d(rho) / S;
    const double Pdd = ell * (ell - 1) * Pkm2 * phi_cut_d(rho) * phi_cut_d(rho) / (S * S) +
                       ell * Pkm1 * phi_cut_dd(rho) / (S * S);

    const double f0 = w.value(r), f0d = w.deriv(r), f0dd = w.second_deriv(r);
    const double psi_sp = f0 * Pk;
    const double psi_d = f0d * Pk + f0 * Pd;
    const double psi_dd = f0dd * Pk + 2.0 * f0d * Pd + f0 * Pdd;
    const double lap_psi = (n == 1) ? psi_dd : psi_dd + (n - 1) / r * psi_d;

    out.phi = psi_sp * ek;
    out.phi_t = psi_sp * dek;
    out.phi_tt = psi_sp * ddek;
    out.lap_phi = lap_psi * ek;
    out.lap_phi_t = lap_psi * dek;
    out.psi_sp = psi_sp;
    out.lap_psi = lap_psi;
    out.eta_k = ek;
    out.deta_k = dek;
    out.psi_weight = c.psi(t);
    return out;
}

/// Weighted initial-velocity mass int phi0 u1 dx: its sign decides which
/// data the blow-up statements cover.
inline double sign_functional(const HarmonicWeight& w, const GridField& u1) {
    const RadialGrid& g = w.grid();
    require_match(g, u1, "sign_functional");
    GridField prod(u1.size());
    for (std::size_t j = 0; j < u1.size(); ++j) prod[j] = w.values()[j] * u1[j];
    return integrate(g, prod);
}

/// Forcing to integrate against the test function: field at step k of the
/// trajectory (the semilinear f, or a manufactured sample).
using StepForcing = std::function<GridField(std::size_t k, const State& st)>;

struct FunctionalReport {
    double lhs = 0.0, rhs = 0.0;
    double weak_residual = 0.0;  // lhs - rhs of the variational identity
    double scale = 0.0;
    double I = 0.0, J = 0.0;     // int |u|^p phi, int |u_t|^q phi
    double I1 = 0.0, I2 = 0.0, I3 = 0.0;
    double data_u1 = 0.0;        // int u1 phi(0)
    double data_u0_lap = 0.0;    // int u0 lap phi(0)
    double data_u0_phit = 0.0;   // int u0 phi_t(0)
    double data_psi = 0.0;       // int u0 Psi(0) lap(phi0 Phi^l)
    double split_residual = 0.0; // (I1+I2+I3) - (forcing term + data_psi + data_u1)
    double off_support_I2 = 0.0, off_support_I3 = 0.0;  // annulus-discipline monitors
};

/// Evaluates both sides of the variational identity
///     int int f phi + int u1 phi(0) - int u0 lap phi(0) - int u0 phi_t(0)
///       = int int u (phi_tt + lap phi_t - lap phi)
/// over a stored trajectory (trapezoid in time, grid quadrature in space),
/// together with the I1/I2/I3 splitting driven by u_t and the Psi identity.
inline FunctionalReport weak_form_residual(const HarmonicWeight& w, const CutoffSet& c,
                                           const Trajectory& tr, const StepForcing& forcing,
                                           const NonlinKind* kind_for_ij = nullptr) {
    const RadialGrid& g = w.grid();
    if (tr.states.size() < 2) throw ConfigError("weak_form_residual: empty trajectory");
    const double S = c.spatial_scale();
    if (g.domain().r_out < 2.0 * S - 1e-9)
        throw ConfigError("weak_form_residual: grid does not contain the 2T support");

    FunctionalReport rep;
    const std::size_t K = tr.states.size() - 1;
    double forcing_total = 0.0;
    for (std::size_t kstep = 0; kstep <= K; ++kstep) {
        const State& st = tr.states[kstep];
        const double tw = tr.dt * ((kstep == 0 || kstep == K) ? 0.5 : 1.0);
        GridField f;
        if (forcing) f = forcing(kstep, st);
        for (std::size_t j = 0; j < st.u.size(); ++j) {
            const double qw = g.quad_weights()[j];
            if (qw == 0.0) continue;
            const CutoffEval ev = composite_test_function(c, w, st.t, g.r(j));
            const double u = st.u[j], v = st.v[j];
            if (f.size()) forcing_total += tw * qw * f[j] * ev.phi;
            rep.rhs += tw * qw * u * (ev.phi_tt + ev.lap_phi_t - ev.lap_phi);
            const double i2 = -v * ev.lap_psi * ev.eta_k;
            const double i3 = -v * ev.lap_psi * ev.psi_weight;
            rep.I1 += tw * qw * (-v * ev.psi_sp * ev.deta_k);
            rep.I2 += tw * qw * i2;
            rep.I3 += tw * qw * i3;
            if (kind_for_ij) {
                if (kind_for_ij->uses_p())
                    rep.I += tw * qw * std::pow(std::abs(u), kind_for_ij->p) * ev.phi;
                if (kind_for_ij->uses_q())
                    rep.J += tw * qw * std::pow(std::abs(v), kind_for_ij->q) * ev.phi;
            }
            const double r = g.r(j);
            if (r < S || r > 2.0 * S) {
                rep.off_support_I2 = std::max(rep.off_support_I2, std::abs(i2));
                rep.off_support_I3 = std::max(rep.off_support_I3, std::abs(i3));
            }
        }
    }
    // Data terms at t = 0.
    const State& first = tr.states.front();
    for (std::size_t j = 0; j < first.u.size(); ++j) {
        const double qw = g.quad_weights()[j];
        if (qw == 0.0) continue;
        const CutoffEval ev = composite_test_function(c, w, 0.0, g.r(j));
        rep.data_u1 += qw * first.v[j] * ev.phi;
        rep.data_u0_lap += qw * first.u[j] * ev.lap_phi;
        rep.data_u0_phit += qw * first.u[j] * ev.phi_t;
        rep.data_psi += qw * first.u[j] * c.psi0() * ev.lap_psi;
    }
    rep.lhs = forcing_total + rep.data_u1 - rep.data_u0_lap - rep.data_u0_phit;
    rep.weak_residual = rep.lhs - rep.rhs;
    rep.split_residual = (rep.I1 + rep.I2 + rep.I3) - (forcing_total + rep.data_psi + rep.data_u1);
    rep.scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs),
                          std::abs(rep.I1) + std::abs(rep.I2) + std::abs(rep.I3), 1e-300});
    return rep;
}

/// Bound integrals whose T-scaling the theory pins down.  eta_prime is the
/// sharp one (the I1-type term); the rest are the annulus terms produced by
/// the Young splits, reported for completeness.
enum class BoundTerm {
    eta_prime,       // int int phi0 Phi^l eta^((k-1)q') |d_t eta_T|^q'
    grad_cross,      // int int Phi^(l-q') eta^k |grad phi0|^q' |grad Phi_T|^q'
    grad_sq,         // int int phi0 Phi^(l-2q') eta^k |grad Phi_T|^(2q')
    laplacian,       // int int phi0 Phi^(l-q') eta^k |lap Phi_T|^q'
    psi_grad_cross,  // grad_cross with eta^(-k q'/q) Psi^q' as the time factor
    psi_grad_sq,
    psi_laplacian,
};

struct SlopeReport {
    BoundTerm term = BoundTerm::eta_prime;
    int n = 1;
    double exponent = 2.0;         // the p or q handed in
    double conjugate = 2.0;        // its Holder conjugate
    double alpha = 1.0;
    bool ln_corrected = false;     // n = 2: values divided by ln T before the fit
    std::vector<double> T_list, values;
    double slope = 0.0;
    double fit_max_resid = 0.0;    // worst log-space deviation from the fit line
    double expected_slope = std::numeric_limits<double>::quiet_NaN();  // eta_prime only
};

namespace detail {

/// Simpson on [0, 1] with 2m intervals.
template <typename F>
double simpson01(F&& f, int m = 2048) {
    const int N = 2 * m;
    const double h = 1.0 / N;
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < N; ++i) acc += f(i * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace detail

inline SlopeReport scaling_slope(const HarmonicWeight& w, BoundTerm term, double exponent,
                                 const std::vector<double>& T_list, int k, int ell,
                                 double alpha = 1.0) {
    const RadialGrid& g = w.grid();
    const int n = g.n();
    if (T_list.size() < 2) throw ConfigError("scaling_slope: need at least two T values");
    const double qc = conjugate_exponent(exponent);
    if (k < 2 * std::ceil(qc) || ell < 2 * std::ceil(qc))
        throw ConfigError("scaling_slope: cutoff orders below 2 ceil(conjugate)");
    if (ell <= 2.0 * qc && (term == BoundTerm::grad_sq || term == BoundTerm::psi_grad_sq))
        throw ConfigError("scaling_slope: ell must exceed 2 q' for the squared-gradient term");

    SlopeReport rep;
    rep.term = term;
    rep.n = n;
    rep.exponent = exponent;
    rep.conjugate = qc;
    rep.alpha = (n == 1) ? alpha : 1.0;
    rep.T_list = T_list;

    // T-independent time factors over s = t/T.
    auto etak = [&](double s) { return std::pow(eta_cut(s), k); };
    const double c_eta_prime = detail::simpson01([&](double s) {
        return std::pow(eta_cut(s), (k - 1) * qc) * std::pow(std::abs(eta_cut_d(s)), qc);
    });
    const double c_eta_k = detail::simpson01(etak);
    double c_psi = 0.0;
    const bool uses_psi = term == BoundTerm::psi_grad_cross || term == BoundTerm::psi_grad_sq ||
                          term == BoundTerm::psi_laplacian;
    if (uses_psi) {
        // psi_hat(s) = int_s^1 eta^k; the integrand eta^(-k q'/q) psi_hat^q'
        // stays bounded because psi_hat <= eta^k (1 - s).
        const int m = 2048;
        std::vector<double> psi_hat(2 * m + 1, 0.0);
        const double h = 1.0 / (2 * m);
        for (int i = 2 * m; i-- > 0;) {
            const double a = i * h;
            psi_hat[i] = psi_hat[i + 1] +
                         h / 6.0 * (etak(a) + 4.0 * etak(a + 0.5 * h) + etak(a + h));
        }
        double acc = 0.0;
        for (int i = 0; i <= 2 * m; ++i) {
            const double s = i * h;
            const double e = eta_cut(s);
            double val = 0.0;
            if (e > 0.0 && psi_hat[i] > 0.0) {
                const double ln_val = qc * std::log(psi_hat[i]) - (k * qc / exponent) * std::log(e);
                val = (ln_val > -700.0) ? std::exp(ln_val) : 0.0;
            }
            acc += val * ((i == 0 || i == 2 * m) ? 1.0 : (i % 2) ? 4.0 : 2.0);
        }
        c_psi = acc * h / 3.0;
    }

    for (double T : T_list) {
        if (!(T > 1.0)) throw ConfigError("scaling_slope: T values must exceed 1");
        const double S = (n == 1) ? std::pow(T, rep.alpha) : T;
        if (g.domain().r_out < 2.0 * S - 1e-9)
            throw ConfigError("scaling_slope: grid too small to contain 2T; enlarge r_out");

        GridField integrand(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double r = g.r(j);
            const double rho = r / S;
            const double P = phi_cut(rho);
            if (P <= 0.0) { integrand[j] = 0.0; continue; }
            const double Pd = phi_cut_d(rho) / S;
            const double Pdd = phi_cut_dd(rho) / (S * S);
            switch (term) {
                case BoundTerm::eta_prime:
                    integrand[j] = w.value(r) * std::pow(P, ell);
                    break;
                case BoundTerm::grad_cross:
                case BoundTerm::psi_grad_cross:
                    integrand[j] = std::pow(P, ell - qc) *
                                   std::pow(std::abs(w.deriv(r)) * std::abs(Pd), qc);
                    break;
                case BoundTerm::grad_sq:
                case BoundTerm::psi_grad_sq:
                    integrand[j] = w.value(r) * std::pow(P, ell - 2.0 * qc) *
                                   std::pow(std::abs(Pd), 2.0 * qc);
                    break;
                case BoundTerm::laplacian:
                case BoundTerm::psi_laplacian: {
                    const double lap = Pdd + ((n == 1) ? 0.0 : (n - 1) / r * Pd);
                    integrand[j] = w.value(r) * std::pow(P, ell - qc) * std::pow(std::abs(lap), qc);
                    break;
                }
            }
        }
        const double space = integrate(g, integrand);

        double time = 0.0;
        switch (term) {
            case BoundTerm::eta_prime:
                time = std::pow(T, 1.0 - qc) * c_eta_prime;
                break;
            case BoundTerm::grad_cross:
            case BoundTerm::grad_sq:
            case BoundTerm::laplacian:
                time = T * c_eta_k;
                break;
            default:
                time = std::pow(T, 1.0 + qc) * c_psi;
                break;
        }
        double value = time * space;
        if (n == 2 && term == BoundTerm::eta_prime) {
            value /= std::log(T);
            rep.ln_corrected = true;
        }
        if (!(value > 0.0)) throw NumericError("scaling_slope: nonpositive bound value");
        rep.values.push_back(value);
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        lx.push_back(std::log(T_list[i]));
        ly.push_back(std::log(rep.values[i]));
    }
    LineFit fit = fit_line(lx, ly);
    rep.slope = fit.slope;
    rep.fit_max_resid = fit.max_resid;
    if (term == BoundTerm::eta_prime) {
        if (n >= 3)
            rep.expected_slope = n + 1.0 - qc;
        else if (n == 2)
            rep.expected_slope = 3.0 - qc;
        else
            rep.expected_slope = 2.0 * rep.alpha + 1.0 - qc;
    }
    return rep;
}

/// Prefactor exponent -1 + (1+n)/q' of the critical-case bootstrap; exactly
/// 0 at q = 1 + 1/n.
inline double critical_prefactor_exponent(int n, double q) {
    return -1.0 + (1.0 + n) / conjugate_exponent(q);
}

}  // namespace sdwave
