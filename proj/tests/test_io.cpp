#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sdwave/io.hpp"

using namespace sdwave;

namespace {

std::filesystem::path fresh_dir(const char* tag) {
    auto p = std::filesystem::temp_directory_path() /
             (std::string("sdwave_test_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("seventeen significant digits round-trip doubles exactly", "[io]") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-308, 1.7976931348623157e308, -0.0,
                     3.141592653589793, 12345.678901234567}) {
        const std::string s = format17(x);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == x);
    }
}

TEST_CASE("config serialization round-trips", "[io]") {
    RunConfig def;
    CHECK(parse_config(serialize_config(def)) == def);

    RunConfig c;
    c.domain = {3, 1.0, 13.0};
    c.j_max = 240;
    c.solver = {0.025, 1.0, 30.0, 4};
    c.kind = "mixed";
    c.p = 2.5;
    c.q = 4.0 / 3.0;
    c.u0 = bump_profile(4.0, 1.5, 0.1);
    c.u1 = bump_profile(5.0, 2.0, -3.7);
    c.thresholds.blow_factor = 1e5;
    c.thresholds.fit_decade = 8.0;
    c.thresholds.min_fit_points = 7;
    c.output_dir = "runs/a b/c";
    c.seed = 99;
    CHECK(parse_config(serialize_config(c)) == c);

    // Serialization is idempotent byte for byte.
    CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));
}

TEST_CASE("config parsing is strict", "[io]") {
    RunConfig def;
    const std::string good = serialize_config(def);

    CHECK_THROWS_AS(parse_config(good + "\nstray = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(good + "\n[mystery]\nx = 1\n"), ConfigError);

    std::string wrong_version = good;
    wrong_version.replace(wrong_version.find("schema_version = 1"),
                          std::string("schema_version = 1").size(), "schema_version = 2");
    CHECK_THROWS_AS(parse_config(wrong_version), ConfigError);

    CHECK_THROWS_AS(parse_config("[domain]\nn = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("shape = odd\n"), ConfigError);

    // Comments and blank lines are tolerated.
    CHECK_NOTHROW(parse_config("# comment\n\n" + good));
}

TEST_CASE("config validation catches semantic errors", "[io]") {
    RunConfig c;
    CHECK_NOTHROW(validate_config(c));

    RunConfig bad = c;
    bad.domain.r_out = 2.0;  // too close to the obstacle scale
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.j_max = 8;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.solver.dt = 1.0;  // exceeds dx = 0.1
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.solver.t_end = 0.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.kind = "power";
    bad.p = 1.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.u1.width = 0.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.thresholds.blow_factor = 1.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.output_dir = "";
    CHECK_THROWS_AS(validate_config(bad), ConfigError);

    bad = c;
    bad.kind = "quintic";
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("energy CSV schema", "[io]") {
    EnergyTimeSeries empty;
    CHECK(energy_csv_text(empty) ==
          "t,l2_u,l2_v,h1semi_u,h1semi_v,h1_u,h1_v,l2_f,cum_forcing_l2,cum_dissipation\n");

    EnergyTimeSeries se;
    EnergyRecord r;
    r.t = 0.5;
    r.l2_u = 1.25;
    se.records.push_back(r);
    const std::string text = energy_csv_text(se);
    CHECK(text.find("\n0.5,1.25,0,0,0,0,0,0,0,0\n") != std::string::npos);
    // Exactly header plus one row.
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("verdict JSON is stable and machine readable", "[io]") {
    Verdict v;
    v.tag = Verdict::Tag::blowup_at;
    v.t_est = 9.875;
    v.t_last_stable = 9.5;
    v.kappa = 2.25;
    v.peak_norm = 1.5e6;
    v.refinement_confirmed = true;
    const std::string text = verdict_json_text(v, 0.75);

    nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["schema_version"] == 1);
    CHECK(j["tag"] == "BlowupAt");
    CHECK(j["t_est"] == 9.875);
    CHECK(j["t_last_stable"] == 9.5);
    CHECK(j["kappa"] == 2.25);
    CHECK(j["peak_norm"] == 1.5e6);
    CHECK(j["refinement_confirmed"] == true);
    CHECK(j["sign_functional"] == 0.75);

    // Rebuilding the verdict from the parsed JSON reproduces the bytes.
    Verdict w;
    w.tag = j["tag"] == "BlowupAt" ? Verdict::Tag::blowup_at : Verdict::Tag::global_up_to;
    w.t_est = j["t_est"];
    w.t_last_stable = j["t_last_stable"];
    w.kappa = j["kappa"];
    w.peak_norm = j["peak_norm"];
    w.refinement_confirmed = j["refinement_confirmed"];
    CHECK(verdict_json_text(w, j["sign_functional"]) == text);

    // A global verdict folds the verified horizon into both time fields.
    Verdict g;
    g.tag = Verdict::Tag::global_up_to;
    g.horizon = 20.0;
    g.kappa = 123.0;  // ignored in the global branch
    nlohmann::json jg = nlohmann::json::parse(verdict_json_text(g, -1.0));
    CHECK(jg["tag"] == "GlobalUpTo");
    CHECK(jg["t_est"] == 20.0);
    CHECK(jg["t_last_stable"] == 20.0);
    CHECK(jg["kappa"] == 0.0);
}

TEST_CASE("overlay CSV leaves unbounded q empty", "[io]") {
    std::vector<std::pair<double, double>> line{
        {2.0, std::numeric_limits<double>::infinity()}, {2.5, 1.25}};
    CHECK(overlay_csv_text(line) == "p,q\n2,\n2.5,1.25\n");
}

TEST_CASE("output writer creates directories and writes bytes", "[io]") {
    namespace fs = std::filesystem;
    const fs::path dir = fresh_dir("writer") / "nested" / "deep";
    OutputWriter w(dir.string());
    const std::string payload = "a,b\n1,2\n";
    const std::string path = w.write_text("table.csv", payload);
    std::ifstream in(path, std::ios::binary);
    std::string got((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(got == payload);
    fs::remove_all(fresh_dir("writer"));
}

TEST_CASE("plot scripts reference only emitted files", "[io]") {
    const std::string e = energy_plot_script("energy.csv");
    CHECK(e.find("energy.csv") != std::string::npos);
    CHECK(e.find("matplotlib") != std::string::npos);
    CHECK(e.find("Agg") != std::string::npos);

    const std::string p = phase_plot_script("phase.csv", "overlay.csv");
    CHECK(p.find("phase.csv") != std::string::npos);
    CHECK(p.find("overlay.csv") != std::string::npos);
}

TEST_CASE("picard trace CSV", "[io]") {
    PicardResult res;
    res.T = 1.5;
    res.R = 4.0;
    res.trace.push_back({1, 2.0, 0.5, 0.0});
    res.trace.push_back({2, 2.1, 0.2, 0.4});
    const std::string text = picard_trace_csv_text(res);
    CHECK(text.rfind("iteration,norm,distance,ratio\n", 0) == 0);
    CHECK(text.find("1,2,0.5,0\n") != std::string::npos);
    CHECK(text.find("2,2.1000000000000001,0.20000000000000001,0.40000000000000002\n") !=
          std::string::npos);
}
