#pragma once

#include <random>

#include "sdwave/grid.hpp"

namespace sdwave {

/// Semilinear right-hand sides f(u, u_t):
///   derivative_only : |u_t|^q
///   mixed           : |u|^p + |u_t|^q
///   power_only      : |u|^p
struct NonlinKind {
    enum class Tag { derivative_only, mixed, power_only };
    Tag tag = Tag::derivative_only;
    double p = 2.0;
    double q = 2.0;

    static NonlinKind derivative(double q) { return {Tag::derivative_only, 2.0, q}; }
    static NonlinKind mixed(double p, double q) { return {Tag::mixed, p, q}; }
    static NonlinKind power(double p) { return {Tag::power_only, p, 2.0}; }

    bool uses_p() const { return tag != Tag::derivative_only; }
    bool uses_q() const { return tag != Tag::power_only; }
};

inline void validate_kind(const NonlinKind& k) {
    if (k.uses_p() && !(k.p > 1.0)) throw ConfigError("nonlinearity: p must exceed 1");
    if (k.uses_q() && !(k.q > 1.0)) throw ConfigError("nonlinearity: q must exceed 1");
}

/// Exploration past the local-theory exponent range n/(n-2) (n >= 3) is
/// allowed but flagged.  Returns a warning message, or empty when compliant.
inline std::string local_theory_warning(const NonlinKind& k, int n) {
    if (n < 3) return {};
    const double cap = static_cast<double>(n) / (n - 2);
    std::string msg;
    if (k.uses_p() && k.p > cap + 1e-12)
        msg += "p = " + format17(k.p) + " exceeds the local-theory range (1, " + format17(cap) +
               "]; ";
    if (k.uses_q() && k.q > cap + 1e-12)
        msg += "q = " + format17(k.q) + " exceeds the local-theory range (1, " + format17(cap) +
               "]; ";
    if (!msg.empty()) msg += "run permitted for exploration only";
    return msg;
}

/// Holder conjugate r' = r / (r - 1).
inline double conjugate_exponent(double r) {
    if (!(r > 1.0)) throw ConfigError("conjugate_exponent: needs r > 1");
    return r / (r - 1.0);
}

/// Pointwise f(u, v).  Entries that leave the representable range set the
/// overflow flag on the result instead of throwing: the blow-up detector
/// treats a flagged forcing as a detection signal.
inline GridField eval_f(const NonlinKind& kind, const GridField& u, const GridField& v) {
    validate_kind(kind);
    if (u.size() != v.size()) throw ConfigError("eval_f: field size mismatch");
    GridField out(u.size());
    out.overflowed = u.overflowed || v.overflowed;
    const bool use_p = kind.uses_p();
    const bool use_q = kind.uses_q();
    for (std::size_t j = 0; j < u.size(); ++j) {
        double s = 0.0;
        if (use_p) s += std::pow(std::abs(u[j]), kind.p);
        if (use_q) s += std::pow(std::abs(v[j]), kind.q);
        if (!std::isfinite(s) || s > 1e150) out.overflowed = true;
        out[j] = s;
    }
    // Dirichlet rows never receive forcing.
    if (out.size() >= 2) {
        out[0] = 0.0;
        out[out.size() - 1] = 0.0;
    }
    return out;
}

struct PowerBoundReport {
    double max_ratio = 0.0;   // worst | |x|^r - |y|^r | / ( r |x-y| (|x|^(r-1) + |y|^(r-1)) )
    double worst_x = 0.0, worst_y = 0.0, worst_r = 0.0;
    long samples = 0;
};

/// Samples the scalar inequality
///     | |x|^r - |y|^r |  <=  r |x - y| ( |x|^(r-1) + |y|^(r-1) )
/// over seeded uniform pairs; the mean value theorem gives ratio <= 1 for
/// every r > 1.  Pairs with x = y count as ratio 0.
inline PowerBoundReport power_difference_bound_check(const std::vector<double>& exponents,
                                                     long pairs_per_exponent,
                                                     std::uint64_t seed,
                                                     double range = 10.0) {
    PowerBoundReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    for (double r : exponents) {
        if (!(r > 1.0)) throw ConfigError("power_difference_bound_check: exponent must exceed 1");
        for (long i = 0; i < pairs_per_exponent; ++i) {
            const double x = dist(rng), y = dist(rng);
            const double lhs = std::abs(std::pow(std::abs(x), r) - std::pow(std::abs(y), r));
            const double rhs = r * std::abs(x - y) *
                               (std::pow(std::abs(x), r - 1.0) + std::pow(std::abs(y), r - 1.0));
            const double ratio = (rhs == 0.0) ? 0.0 : lhs / rhs;
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.worst_x = x;
                rep.worst_y = y;
                rep.worst_r = r;
            }
            ++rep.samples;
        }
    }
    return rep;
}

struct GnBoundReport {
    double f_l2 = 0.0;        // ||f(u, v)||_L2
    double bound = 0.0;       // ||u||_H1^p + ||v||_H1^q (terms per kind)
    double ratio = 0.0;
    double sigma1 = 0.0;      // n (p-1) / (2 p), the interpolation exponent
    double sigma2 = 0.0;      // n (q-1) / (2 q)
};

/// Monitors the Gagliardo-Nirenberg-flavored bound ||f(u,v)||_L2 against
/// ||u||_H1^p + ||v||_H1^q for concrete fields.  The constant is unknown;
/// refinement stability of the ratio is what tests pin down.
inline GnBoundReport gn_bound_report(const RadialGrid& g, const NonlinKind& kind,
                                     const GridField& u, const GridField& v) {
    validate_kind(kind);
    GnBoundReport rep;
    GridField f = eval_f(kind, u, v);
    rep.f_l2 = l2_norm(g, f);
    if (kind.uses_p()) {
        rep.bound += std::pow(h1_norm(g, u), kind.p);
        rep.sigma1 = g.n() * (kind.p - 1.0) / (2.0 * kind.p);
    }
    if (kind.uses_q()) {
        rep.bound += std::pow(h1_norm(g, v), kind.q);
        rep.sigma2 = g.n() * (kind.q - 1.0) / (2.0 * kind.q);
    }
    rep.ratio = rep.f_l2 / std::max(rep.bound, 1e-300);
    return rep;
}

}  // namespace sdwave
