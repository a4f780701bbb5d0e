#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esd/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sys/wait.h>

using namespace esd;

namespace {
const double kPi = 3.14159265358979323846;

int column_index(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing column " + name);
}

bool has_metadata(const Table& t, const std::string& key) {
    for (const auto& [k, v] : t.metadata)
        if (k == key) return true;
    return false;
}
}  // namespace

TEST_CASE("defaults and the resolved header round-trip") {
    SweepSpec spec = default_spec("jc-evolution");
    finalize_spec(spec);
    CHECK(spec.t_max == kPi);
    const std::string header = resolved_spec_json(spec);
    const nlohmann::json j = nlohmann::json::parse(header);
    CHECK(j.at("experiment") == "jc-evolution");
    CHECK(j.at("steps") == 64);
    // delivery settings never reach the header
    CHECK_FALSE(j.contains("workers"));
    CHECK_FALSE(j.contains("format"));
    CHECK_FALSE(j.contains("out"));
    // overlaying the header onto fresh defaults reproduces it exactly
    SweepSpec again = default_spec("jc-evolution");
    apply_json_overrides(again, header);
    finalize_spec(again);
    CHECK(resolved_spec_json(again) == header);

    CHECK(default_spec("invariant").theta.size() == 9);
    CHECK(default_spec("hierarchy").steps == 16);
    CHECK_THROWS_AS(default_spec("frobnicate"), std::invalid_argument);
}

TEST_CASE("config overlay validates keys values and spec ranges") {
    SweepSpec spec = default_spec("jc-evolution");
    apply_json_overrides(spec, R"({"theta": [0.3, 0.7], "steps": 5})");
    CHECK(spec.theta == std::vector<double>{0.3, 0.7});
    CHECK(spec.steps == 5);
    apply_json_overrides(spec, R"({"theta": 0.9})");
    CHECK(spec.theta == std::vector<double>{0.9});
    CHECK_THROWS_AS(apply_json_overrides(spec, R"({"thetta": 1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_json_overrides(spec, R"({"steps": "many"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_json_overrides(spec, "not json"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_json_overrides(spec, "[1,2]"),
                    std::invalid_argument);

    spec.theta = {2.0};
    CHECK_THROWS_AS(finalize_spec(spec), std::invalid_argument);
    spec = default_spec("ww-evolution");
    finalize_spec(spec);
    CHECK(spec.t_max == 5.0);
    spec = default_spec("invariant");
    spec.model = "ww";
    finalize_spec(spec);
    CHECK(spec.t_max == 5.0);
    spec.model = "other";
    CHECK_THROWS_AS(finalize_spec(spec), std::invalid_argument);
}

TEST_CASE("exchange sweep columns carry the closed-form profiles") {
    SweepSpec spec = default_spec("jc-evolution");
    spec.steps = 32;
    const Table t = run_sweep(spec);
    CHECK(t.columns ==
          std::vector<std::string>{"Jt", "C_AA", "C_PP", "C4", "Sigma"});
    REQUIRE(t.rows.size() == 33);
    CHECK(has_metadata(t, "theta"));
    for (const auto& row : t.rows) {
        const double jt = row[0];
        const double c = std::cos(jt), s = std::sin(jt);
        CHECK(std::abs(row[1] - c * c * c * c) < 1e-9);
        CHECK(std::abs(row[2] - s * s * s * s) < 1e-9);
        CHECK(std::abs(row[3] - 0.5 * std::sin(2.0 * jt) *
                                    std::sin(2.0 * jt)) < 1e-9);
        CHECK(std::abs(row[4] - 1.0) < 1e-9);
    }
}

TEST_CASE("steep angles show a dead stretch with reborn partners") {
    SweepSpec spec = default_spec("jc-evolution");
    spec.theta = {2.0 * kPi / 5.0};
    const Table t = run_sweep(spec);
    const int caa = column_index(t, "C_AA");
    const int cpp = column_index(t, "C_PP");
    bool dead_seen = false;
    for (const auto& row : t.rows)
        if (row[static_cast<std::size_t>(caa)] == 0.0 &&
            row[static_cast<std::size_t>(cpp)] > 0.0)
            dead_seen = true;
    CHECK(dead_seen);
    CHECK(t.rows.front()[static_cast<std::size_t>(caa)] > 0.0);
}

TEST_CASE("invariant sweep keeps the residual at rounding level") {
    SweepSpec spec = default_spec("invariant");
    spec.steps = 8;
    const Table t = run_sweep(spec);
    CHECK(t.columns.front() == "theta");
    CHECK(t.columns.back() == "residual");
    REQUIRE(t.rows.size() == 9 * 9);
    for (const auto& row : t.rows) CHECK(std::abs(row.back()) < 1e-9);
}

TEST_CASE("band sweep conserves the combination and reports times") {
    SweepSpec spec = default_spec("ww-evolution");
    spec.theta = {2.0 * kPi / 5.0};
    spec.modes = 200;
    spec.bandwidth = 20.0;
    spec.steps = 8;
    spec.t_max = 2.0;
    const Table t = run_sweep(spec);
    const int sig = column_index(t, "Sigma");
    const double target = std::sin(4.0 * kPi / 5.0);
    for (const auto& row : t.rows)
        CHECK(std::abs(row[static_cast<std::size_t>(sig)] - target) < 1e-6);
    const std::string tag = "[theta=1.25663706144]";
    CHECK(has_metadata(t, "t_death_formula" + tag));
    CHECK(has_metadata(t, "t_birth_formula" + tag));
    CHECK(has_metadata(t, "t_death_numeric" + tag));
    CHECK(has_metadata(t, "t_birth_numeric" + tag));
}

TEST_CASE("discord sweep holds the pure-cut values steady") {
    SweepSpec spec = default_spec("discord");
    spec.steps = 5;
    spec.discord_grid = 24;
    spec.discord_tolerance = 1e-5;
    const Table t = run_sweep(spec);
    const double th = 2.0 * kPi / 5.0;
    const double block = binary_entropy(std::cos(th) * std::cos(th));
    const int q1 = column_index(t, "Q_A1P1_A2P2");
    const int d = column_index(t, "D_AA");
    for (const auto& row : t.rows) {
        CHECK(std::abs(row[static_cast<std::size_t>(q1)] - block) < 1e-9);
        CHECK(row[static_cast<std::size_t>(d)] >= 0.0);
    }
}

TEST_CASE("hierarchy sweep emits a monotone ladder") {
    SweepSpec spec = default_spec("hierarchy");
    spec.steps = 3;
    spec.ge_restarts = 6;
    const Table t = run_sweep(spec);
    const int e2 = column_index(t, "E_AGE2");
    const int e4 = column_index(t, "E_AGE4");
    const int rge = column_index(t, "E_RGE_A1P1_A2P2");
    const double s2 = std::sin(kPi / 5.0) * std::sin(kPi / 5.0);
    for (const auto& row : t.rows) {
        CHECK(row[static_cast<std::size_t>(e2)] <=
              row[static_cast<std::size_t>(e2) + 1] + 1e-6);
        CHECK(row[static_cast<std::size_t>(e2) + 1] <=
              row[static_cast<std::size_t>(e4)] + 1e-6);
        CHECK(std::abs(row[static_cast<std::size_t>(e4)] - s2) < 1e-6);
        CHECK(std::abs(row[static_cast<std::size_t>(rge)] - s2) < 1e-8);
        CHECK(row.back() == 0.0);
    }
}

TEST_CASE("surface sweep tracks the flat plateau below the balance angle") {
    SweepSpec spec = default_spec("age4-surface");
    spec.theta = {0.3, 1.2};
    spec.steps = 2;
    spec.ge_restarts = 8;
    const Table t = run_sweep(spec);
    CHECK(t.columns ==
          std::vector<std::string>{"theta", "t", "E_AGE4", "nonconverged"});
    REQUIRE(t.rows.size() == 6);
    for (const auto& row : t.rows)
        if (row[0] == 0.3)
            CHECK(std::abs(row[2] - std::sin(0.3) * std::sin(0.3)) < 1e-6);
}

TEST_CASE("window scan sweep reports thresholds in band units") {
    SweepSpec spec = default_spec("partition-scan");
    spec.modes = 300;
    spec.bandwidth = 30.0;
    spec.dnu_steps = 20;
    spec.dnu_max = 2.0;
    const Table t = run_sweep(spec);
    REQUIRE(t.rows.size() == 21);
    CHECK(has_metadata(t, "t_used_Gt"));
    CHECK(has_metadata(t, "xi_sq_residual"));
    CHECK(has_metadata(t, "gamma_line_over_Gamma"));
    CHECK(has_metadata(t, "threshold_ratio"));
    CHECK(has_metadata(t, "predicted_dnu_over_Gamma"));
    CHECK(has_metadata(t, "located_dnu_over_Gamma"));
    const int chi = column_index(t, "chi_prime_sq");
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        CHECK(t.rows[i][static_cast<std::size_t>(chi)] >=
              t.rows[i - 1][static_cast<std::size_t>(chi)]);
}

TEST_CASE("renderers carry the header and the numbers") {
    SweepSpec spec = default_spec("jc-evolution");
    spec.steps = 4;
    const Table t = run_sweep(spec);
    const std::string csv = render_csv(t);
    CHECK(csv.rfind("# spec = {", 0) == 0);
    CHECK(csv.find("\nJt,C_AA,C_PP,C4,Sigma\n") != std::string::npos);
    CHECK(csv.find("# theta = 0.785398163397\n") != std::string::npos);
    // one line per metadata entry, plus header, plus one per row
    const std::size_t lines =
        static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == t.metadata.size() + 1 + t.rows.size());

    const nlohmann::json j = nlohmann::json::parse(render_json(t));
    CHECK(j.at("spec").at("experiment") == "jc-evolution");
    CHECK(j.at("columns").size() == 5);
    CHECK(j.at("rows").size() == 5);
}

TEST_CASE("worker count never changes the bytes") {
    std::vector<SweepSpec> specs;
    {
        SweepSpec s = default_spec("jc-evolution");
        s.theta = {2.0 * kPi / 5.0};
        s.steps = 16;
        specs.push_back(s);
    }
    {
        SweepSpec s = default_spec("hierarchy");
        s.steps = 2;
        s.ge_restarts = 6;
        specs.push_back(s);
    }
    {
        SweepSpec s = default_spec("discord");
        s.steps = 3;
        s.discord_grid = 16;
        specs.push_back(s);
    }
    for (SweepSpec& s : specs) {
        s.workers = 1;
        const std::string one = render_csv(run_sweep(s));
        s.workers = 8;
        const std::string eight = render_csv(run_sweep(s));
        CHECK(one == eight);
    }
}

TEST_CASE("sweep rejects an unusable request") {
    SweepSpec spec = default_spec("jc-evolution");
    spec.theta.clear();
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
    spec = default_spec("partition-scan");
    spec.dnu_max = 100.0;
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
}

#ifdef ESD_CLI_PATH
namespace {
int run_cli(const std::string& args, std::string& out) {
    const std::string cmd =
        std::string("\"") + ESD_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    char buf[512];
    std::size_t nr;
    out.clear();
    while ((nr = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, nr);
    const int rc = pclose(p);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
}  // namespace

TEST_CASE("command line round trip") {
    std::string out;
    CHECK(run_cli("jc --theta 0.6 --steps 4", out) == 0);
    CHECK(out.rfind("# spec = {", 0) == 0);
    CHECK(run_cli("invariant --steps 2 --format json", out) == 0);
    CHECK(nlohmann::json::parse(out).at("spec").at("experiment") ==
          "invariant");
    // a rejected spec exits with the dedicated code
    CHECK(run_cli("jc --theta 9", out) == 2);
    CHECK(run_cli("no-such-command", out) != 0);
}
#endif
