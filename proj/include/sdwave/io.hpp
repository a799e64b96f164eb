#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "sdwave/blowup.hpp"
#include "sdwave/diagnostics.hpp"
#include "sdwave/picard.hpp"
#include "sdwave/profiles.hpp"
#include "sdwave/testfn.hpp"

namespace sdwave {

inline constexpr int kSchemaVersion = 1;

/// Everything one run needs, round-trippable through the config format.
struct RunConfig {
    DomainSpec domain{1, 0.0, 40.0};
    std::size_t j_max = 400;
    SolverConfig solver{0.05, 0.5, 10.0, 1};
    std::string kind = "none";  // none, derivative, mixed, power
    double p = 2.0;
    double q = 2.0;
    ProfileSpec u0 = zero_profile();
    ProfileSpec u1 = bump_profile(4.0, 1.0, 1.0);
    Thresholds thresholds;
    std::string output_dir = "out";
    unsigned long seed = 1;

    bool operator==(const RunConfig&) const = default;
};

inline std::optional<NonlinKind> config_kind(const RunConfig& c) {
    if (c.kind == "none") return std::nullopt;
    if (c.kind == "derivative") return NonlinKind::derivative(c.q);
    if (c.kind == "mixed") return NonlinKind::mixed(c.p, c.q);
    if (c.kind == "power") return NonlinKind::power(c.p);
    throw ConfigError("unknown nonlinearity kind: " + c.kind);
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "schema_version = " << kSchemaVersion << "\n";
    out << "\n[domain]\n";
    out << "n = " << c.domain.n << "\n";
    out << "r_obs = " << format17(c.domain.r_obs) << "\n";
    out << "r_out = " << format17(c.domain.r_out) << "\n";
    out << "\n[grid]\n";
    out << "j_max = " << c.j_max << "\n";
    out << "\n[solver]\n";
    out << "dt = " << format17(c.solver.dt) << "\n";
    out << "theta = " << format17(c.solver.theta) << "\n";
    out << "t_end = " << format17(c.solver.t_end) << "\n";
    out << "store_every = " << c.solver.store_every << "\n";
    out << "\n[nonlinearity]\n";
    out << "kind = " << c.kind << "\n";
    out << "p = " << format17(c.p) << "\n";
    out << "q = " << format17(c.q) << "\n";
    for (const auto* pair : {&c.u0, &c.u1}) {
        out << "\n[data." << (pair == &c.u0 ? "u0" : "u1") << "]\n";
        out << "profile = " << profile_kind_name(pair->kind) << "\n";
        out << "center = " << format17(pair->center) << "\n";
        out << "width = " << format17(pair->width) << "\n";
        out << "amplitude = " << format17(pair->amplitude) << "\n";
    }
    out << "\n[thresholds]\n";
    out << "blow_factor = " << format17(c.thresholds.blow_factor) << "\n";
    out << "fit_decade = " << format17(c.thresholds.fit_decade) << "\n";
    out << "min_fit_points = " << c.thresholds.min_fit_points << "\n";
    out << "\n[output]\n";
    out << "dir = " << c.output_dir << "\n";
    out << "seed = " << c.seed << "\n";
    return out.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    return x;
}

inline long parse_long(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    return x;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line, section;
    auto profile_of = [&](ProfileSpec& ps, const std::string& key, const std::string& val) {
        if (key == "profile") ps.kind = profile_kind_from(val);
        else if (key == "center") ps.center = detail::parse_double(key, val);
        else if (key == "width") ps.width = detail::parse_double(key, val);
        else if (key == "amplitude") ps.amplitude = detail::parse_double(key, val);
        else throw ConfigError("config: unknown key " + section + "." + key);
    };
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: malformed section: " + line);
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (section.empty()) {
            if (key == "schema_version") {
                if (detail::parse_long(key, val) != kSchemaVersion)
                    throw ConfigError("config: unsupported schema_version " + val);
            } else throw ConfigError("config: unknown top-level key " + key);
        } else if (section == "domain") {
            if (key == "n") c.domain.n = static_cast<int>(detail::parse_long(key, val));
            else if (key == "r_obs") c.domain.r_obs = detail::parse_double(key, val);
            else if (key == "r_out") c.domain.r_out = detail::parse_double(key, val);
            else throw ConfigError("config: unknown key domain." + key);
        } else if (section == "grid") {
            if (key == "j_max") c.j_max = static_cast<std::size_t>(detail::parse_long(key, val));
            else throw ConfigError("config: unknown key grid." + key);
        } else if (section == "solver") {
            if (key == "dt") c.solver.dt = detail::parse_double(key, val);
            else if (key == "theta") c.solver.theta = detail::parse_double(key, val);
            else if (key == "t_end") c.solver.t_end = detail::parse_double(key, val);
            else if (key == "store_every")
                c.solver.store_every = static_cast<int>(detail::parse_long(key, val));
            else throw ConfigError("config: unknown key solver." + key);
        } else if (section == "nonlinearity") {
            if (key == "kind") c.kind = val;
            else if (key == "p") c.p = detail::parse_double(key, val);
            else if (key == "q") c.q = detail::parse_double(key, val);
            else throw ConfigError("config: unknown key nonlinearity." + key);
        } else if (section == "data.u0") {
            profile_of(c.u0, key, val);
        } else if (section == "data.u1") {
            profile_of(c.u1, key, val);
        } else if (section == "thresholds") {
            if (key == "blow_factor") c.thresholds.blow_factor = detail::parse_double(key, val);
            else if (key == "fit_decade") c.thresholds.fit_decade = detail::parse_double(key, val);
            else if (key == "min_fit_points")
                c.thresholds.min_fit_points = static_cast<int>(detail::parse_long(key, val));
            else throw ConfigError("config: unknown key thresholds." + key);
        } else if (section == "output") {
            if (key == "dir") c.output_dir = val;
            else if (key == "seed")
                c.seed = static_cast<unsigned long>(detail::parse_long(key, val));
            else throw ConfigError("config: unknown key output." + key);
        } else {
            throw ConfigError("config: unknown section [" + section + "]");
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Validates the parts of a RunConfig that every subcommand relies on.
inline void validate_config(const RunConfig& c) {
    validate_domain(c.domain);
    require_far_truncation(c.domain);
    if (c.j_max < 16) throw ConfigError("config: j_max must be at least 16");
    RadialGrid g(c.domain, c.j_max);
    validate_solver(c.solver, g);
    if (!(c.solver.t_end > 0.0)) throw ConfigError("config: t_end must be positive");
    if (auto k = config_kind(c)) validate_kind(*k);
    if (!(c.u0.width > 0.0) || !(c.u1.width > 0.0))
        throw ConfigError("config: profile widths must be positive");
    if (!(c.thresholds.blow_factor > 1.0))
        throw ConfigError("config: blow_factor must exceed 1");
    if (c.output_dir.empty()) throw ConfigError("config: output dir must be nonempty");
}

/// Serializes every output file for one directory.  Writes are sequential by
/// construction: one writer owns one directory.
class OutputWriter {
public:
    explicit OutputWriter(std::string dir) : dir_(std::move(dir)) {}

    const std::string& dir() const { return dir_; }

    std::string write_text(const std::string& name, const std::string& content) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output dir " + dir_ + ": " + ec.message());
        const std::string path = (fs::path(dir_) / name).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open for writing: " + path);
        out << content;
        out.close();
        if (!out) throw ConfigError("write failed: " + path);
        return path;
    }

private:
    std::string dir_;
};

inline std::string energy_csv_text(const EnergyTimeSeries& s) {
    std::string out =
        "t,l2_u,l2_v,h1semi_u,h1semi_v,h1_u,h1_v,l2_f,cum_forcing_l2,cum_dissipation\n";
    for (const EnergyRecord& r : s.records) {
        out += format17(r.t);
        for (double x : {r.l2_u, r.l2_v, r.h1semi_u, r.h1semi_v, r.h1_u, r.h1_v, r.l2_f,
                         r.cum_forcing_l2, r.cum_dissipation}) {
            out += ',';
            out += format17(x);
        }
        out += '\n';
    }
    return out;
}

inline std::string slope_csv_text(const std::vector<SlopeReport>& reports) {
    std::string out = "term,n,exponent,conjugate,alpha,ln_corrected,slope,expected_slope,T,value\n";
    auto term_name = [](BoundTerm t) -> const char* {
        switch (t) {
            case BoundTerm::eta_prime: return "eta_prime";
            case BoundTerm::grad_cross: return "grad_cross";
            case BoundTerm::grad_sq: return "grad_sq";
            case BoundTerm::laplacian: return "laplacian";
            case BoundTerm::psi_grad_cross: return "psi_grad_cross";
            case BoundTerm::psi_grad_sq: return "psi_grad_sq";
            case BoundTerm::psi_laplacian: return "psi_laplacian";
        }
        return "?";
    };
    for (const SlopeReport& r : reports) {
        for (std::size_t i = 0; i < r.T_list.size(); ++i) {
            out += term_name(r.term);
            out += ',' + std::to_string(r.n);
            out += ',' + format17(r.exponent);
            out += ',' + format17(r.conjugate);
            out += ',' + format17(r.alpha);
            out += ',';
            out += (r.ln_corrected ? "1" : "0");
            out += ',' + format17(r.slope);
            out += ',' + (std::isnan(r.expected_slope) ? std::string("")
                                                       : format17(r.expected_slope));
            out += ',' + format17(r.T_list[i]);
            out += ',' + format17(r.values[i]);
            out += '\n';
        }
    }
    return out;
}

inline std::string picard_trace_csv_text(const PicardResult& res) {
    std::string out = "iteration,norm,distance,ratio\n";
    for (const IterateEntry& e : res.trace) {
        out += std::to_string(e.iteration);
        out += ',' + format17(e.norm);
        out += ',' + format17(e.distance);
        out += ',' + (std::isnan(e.ratio) ? std::string("") : format17(e.ratio));
        out += '\n';
    }
    return out;
}

/// Verdict JSON with a fixed key order so reruns are byte-identical.  For a
/// GlobalUpTo verdict t_est and t_last_stable both carry the verified
/// horizon and kappa is 0.
inline std::string verdict_json_text(const Verdict& v, double sign_functional) {
    const bool blow = v.tag == Verdict::Tag::blowup_at;
    std::string out = "{\n";
    out += "  \"schema_version\": " + std::to_string(kSchemaVersion) + ",\n";
    out += std::string("  \"tag\": \"") + (blow ? "BlowupAt" : "GlobalUpTo") + "\",\n";
    out += "  \"t_est\": " + format17(blow ? v.t_est : v.horizon) + ",\n";
    out += "  \"t_last_stable\": " + format17(blow ? v.t_last_stable : v.horizon) + ",\n";
    out += "  \"kappa\": " + format17(blow ? v.kappa : 0.0) + ",\n";
    out += "  \"peak_norm\": " + format17(v.peak_norm) + ",\n";
    out += std::string("  \"refinement_confirmed\": ") +
           (v.refinement_confirmed ? "true" : "false") + ",\n";
    out += "  \"sign_functional\": " + format17(sign_functional) + "\n";
    out += "}\n";
    return out;
}

inline std::string overlay_csv_text(const std::vector<std::pair<double, double>>& polyline) {
    std::string out = "p,q\n";
    for (const auto& [p, q] : polyline) {
        out += format17(p);
        out += ',' + (std::isinf(q) ? std::string("") : format17(q));
        out += '\n';
    }
    return out;
}

inline std::string energy_plot_script(const std::string& csv_name) {
    std::string s;
    s += "#!/usr/bin/env python3\n";
    s += "import csv\n";
    s += "import matplotlib\n";
    s += "matplotlib.use('Agg')\n";
    s += "import matplotlib.pyplot as plt\n\n";
    s += "rows = list(csv.DictReader(open('" + csv_name + "')))\n";
    s += "t = [float(r['t']) for r in rows]\n";
    s += "for col in ('h1_u', 'h1_v', 'cum_dissipation'):\n";
    s += "    plt.plot(t, [float(r[col]) for r in rows], label=col)\n";
    s += "plt.xlabel('t')\n";
    s += "plt.yscale('log')\n";
    s += "plt.legend()\n";
    s += "plt.tight_layout()\n";
    s += "plt.savefig('energy.png', dpi=150)\n";
    return s;
}

inline std::string phase_plot_script(const std::string& phase_csv,
                                     const std::string& overlay_csv) {
    std::string s;
    s += "#!/usr/bin/env python3\n";
    s += "import csv\n";
    s += "import matplotlib\n";
    s += "matplotlib.use('Agg')\n";
    s += "import matplotlib.pyplot as plt\n\n";
    s += "rows = list(csv.DictReader(open('" + phase_csv + "')))\n";
    s += "# Derivative-only sweeps leave the p column empty; fall back to the\n";
    s += "# amplitude ladder on the x axis.\n";
    s += "has_p = any(r['p'] for r in rows)\n";
    s += "x = (lambda r: float(r['p'])) if has_p else (lambda r: float(r['amplitude']))\n";
    s += "blow = [r for r in rows if r['tag'] == 'BlowupAt']\n";
    s += "glob = [r for r in rows if r['tag'] == 'GlobalUpTo']\n";
    s += "plt.scatter([x(r) for r in blow], [float(r['q']) for r in blow],\n";
    s += "            marker='x', color='tab:red', label='blow-up observed')\n";
    s += "plt.scatter([x(r) for r in glob], [float(r['q']) for r in glob],\n";
    s += "            marker='o', facecolors='none', color='tab:blue', label='no blow-up in budget')\n";
    s += "ov = [r for r in csv.DictReader(open('" + overlay_csv + "')) if r['q']]\n";
    s += "if has_p:\n";
    s += "    plt.plot([float(r['p']) for r in ov], [float(r['q']) for r in ov],\n";
    s += "             color='k', label='theory boundary')\n";
    s += "elif ov:\n";
    s += "    plt.axhline(float(ov[0]['q']), color='k', label='theory boundary')\n";
    s += "plt.xlabel('p' if has_p else 'amplitude')\n";
    s += "plt.ylabel('q')\n";
    s += "plt.legend()\n";
    s += "plt.tight_layout()\n";
    s += "plt.savefig('phase.png', dpi=150)\n";
    return s;
}

}  // namespace sdwave
