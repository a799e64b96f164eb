#pragma once

#include <string>

#include "sdwave/grid.hpp"

namespace sdwave {

/// Compactly supported initial-data family.  The bump A (1 - xi^2)^3 with
/// xi = (r - center)/width is C^2 at the support edge, which is all the
/// weak-form machinery asks of the data.
struct ProfileSpec {
    enum class Kind { zero, bump } kind = Kind::zero;
    double center = 0.0;
    double width = 1.0;
    double amplitude = 0.0;

    bool operator==(const ProfileSpec&) const = default;
};

inline ProfileSpec zero_profile() { return {}; }

inline ProfileSpec bump_profile(double center, double width, double amplitude) {
    return {ProfileSpec::Kind::bump, center, width, amplitude};
}

inline GridField make_data(const RadialGrid& g, const ProfileSpec& spec) {
    GridField out = zero_field(g);
    if (spec.kind == ProfileSpec::Kind::zero) return out;
    if (!(spec.width > 0.0)) throw ConfigError("profile: width must be positive");
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double xi = (g.r(j) - spec.center) / spec.width;
        if (std::abs(xi) < 1.0) {
            const double s = 1.0 - xi * xi;
            out[j] = spec.amplitude * s * s * s;
        }
    }
    // Dirichlet rows stay zero regardless of where the bump was placed.
    out[0] = 0.0;
    out[g.size() - 1] = 0.0;
    return out;
}

inline std::string profile_kind_name(ProfileSpec::Kind k) {
    return k == ProfileSpec::Kind::zero ? "zero" : "bump";
}

inline ProfileSpec::Kind profile_kind_from(const std::string& s) {
    if (s == "zero") return ProfileSpec::Kind::zero;
    if (s == "bump") return ProfileSpec::Kind::bump;
    throw ConfigError("unknown profile kind: " + s);
}

}  // namespace sdwave
