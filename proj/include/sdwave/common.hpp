#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdwave {

/// Invalid parameters, malformed config files, domains that cannot hold the
/// requested construction.  CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Overflow, singular linear systems, non-finite values outside the flagged
/// blow-up path.  CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// 17 significant digits: enough for exact double round-trips, and the one
/// float format used by every emitted file.
inline std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline bool is_finite(double x) { return std::isfinite(x); }

/// Least-squares line y = slope x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;      // sum of squared residuals
    double max_resid = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw ConfigError("fit_line: needs >= 2 points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw NumericError("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (f.slope * xs[i] + f.intercept);
        f.sse += r * r;
        f.max_resid = std::max(f.max_resid, std::abs(r));
    }
    return f;
}

}  // namespace sdwave
