#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mcvd/harness.hpp"

namespace hn = mcvd::harness;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_json(const std::string& name, const std::string& body) {
    const std::string path = temp_path(name);
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("SweepSpec: grids and validation") {
    hn::SweepSpec lin{"t", 1.0, 3.0, 5, false};
    const auto g = lin.grid();
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 3.0);
    CHECK(g[2] == doctest::Approx(2.0));

    hn::SweepSpec lg{"lambda", 1e-8, 1e-4, 5, true};
    const auto gl = lg.grid();
    CHECK(gl[1] == doctest::Approx(1e-7).epsilon(1e-12));
    CHECK(gl.back() == 1e-4);

    hn::SweepSpec bad_var{"q", 1.0, 2.0, 3, false};
    CHECK_THROWS_AS(bad_var.validate(), std::invalid_argument);
    hn::SweepSpec bad_range{"t", 2.0, 1.0, 3, false};
    CHECK_THROWS_AS(bad_range.validate(), std::invalid_argument);
    hn::SweepSpec bad_log{"t", 0.0, 1.0, 3, true};
    CHECK_THROWS_AS(bad_log.validate(), std::invalid_argument);
    hn::SweepSpec bad_points{"t", 1.0, 2.0, 0, false};
    CHECK_THROWS_AS(bad_points.validate(), std::invalid_argument);
}

TEST_CASE("CSV writer/reader round trip is bit exact") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({u(rng), u(rng) * 1e-45, u(rng) * 1e17, std::pow(10.0, -12.0 * u(rng))});
    }
    const std::string path = temp_path("mcvd_roundtrip.csv");
    hn::write_csv(path, "config k=v seed=1", {"c0", "c1", "c2", "c3"}, rows);
    const auto back = hn::read_csv(path);
    REQUIRE(back.header.size() == 4);
    REQUIRE(back.rows.size() == rows.size());
    CHECK(back.comments.size() == 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            CHECK(back.rows[i][j] == rows[i][j]);  // bitwise
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("config: JSON parsing, unknown keys, field errors") {
    const std::string good = write_json("mcvd_cfg_good.json", R"({
        "mode": "analytic", "a_um": 5.0, "D_um2_per_s": 100.0,
        "lambda_per_um3": 1e-5, "mu_per_s": 0.0,
        "sweep_var": "t", "sweep_min": 1.0, "sweep_max": 1.0, "sweep_points": 1
    })");
    const auto cfg = hn::ExperimentConfig::from_json_file(good);
    CHECK(cfg.mode == hn::Mode::analytic);
    CHECK(cfg.params.a == 5.0);
    CHECK(cfg.params.lambda == 1e-5);
    std::remove(good.c_str());

    const std::string unknown = write_json("mcvd_cfg_unknown.json", R"({"bogus_key": 1})");
    CHECK_THROWS_AS(hn::ExperimentConfig::from_json_file(unknown), std::invalid_argument);
    std::remove(unknown.c_str());

    const std::string invalid = write_json("mcvd_cfg_invalid.json", R"({"a_um": -5.0})");
    CHECK_THROWS_AS(hn::ExperimentConfig::from_json_file(invalid), std::invalid_argument);
    std::remove(invalid.c_str());

    const std::string syntax = write_json("mcvd_cfg_syntax.json", "{not json");
    CHECK_THROWS_AS(hn::ExperimentConfig::from_json_file(syntax), std::invalid_argument);
    std::remove(syntax.c_str());

    CHECK_THROWS_AS(hn::ExperimentConfig::from_json_file(temp_path("missing_dir_x/nope.json")),
                    std::invalid_argument);
}

TEST_CASE("compare_report: fractions and max error") {
    std::vector<hn::ComparisonRow> rows;
    rows.push_back(hn::ComparisonRow::make(1.0, 0.50, 0.49, 0.05));
    rows.push_back(hn::ComparisonRow::make(2.0, 0.30, 0.33, 0.05));
    auto s = hn::compare_report(rows);
    CHECK(s.inside_ci_fraction == 1.0);
    CHECK(s.max_abs_error == doctest::Approx(0.03));

    // synthetic outside-CI row is flagged
    rows.push_back(hn::ComparisonRow::make(3.0, 0.5, 0.4, 0.05));
    s = hn::compare_report(rows);
    CHECK(s.inside_ci_fraction == doctest::Approx(2.0 / 3.0));
    CHECK(s.max_abs_error == doctest::Approx(0.1));
    CHECK(rows.back().abs_error == doctest::Approx(0.1));

    CHECK_THROWS_AS(hn::compare_report({}), std::invalid_argument);
}

TEST_CASE("run analytic: zero density gives zero hitting probability") {
    hn::ExperimentConfig cfg;
    cfg.mode = hn::Mode::analytic;
    cfg.params = {5.0, 100.0, 0.0, 0.0};
    cfg.quantity = "hitting_prob";
    cfg.sweep = {"t", 1.0, 1.0, 1, false};
    cfg.output_path = temp_path("mcvd_analytic_zero.csv");
    CHECK(hn::run(cfg) == 0);
    const auto csv = hn::read_csv(cfg.output_path);
    REQUIRE(csv.rows.size() == 1);
    CHECK(csv.rows[0][1] == 0.0);
    std::remove(cfg.output_path.c_str());
}

TEST_CASE("run compare: seed reproducibility gives byte-identical CSV") {
    hn::ExperimentConfig cfg;
    cfg.mode = hn::Mode::compare;
    cfg.params = {5.0, 100.0, 1e-5, 0.0};
    cfg.simcfg.dt = 1e-3;
    cfg.simcfg.t_end = 1.0;
    cfg.simcfg.n_particles = 400;
    cfg.simcfg.seed = 20260314;
    cfg.sweep = {"t", 0.25, 1.0, 4, false};
    cfg.output_path = temp_path("mcvd_cmp_a.csv");
    const int rc1 = hn::run(cfg);
    const std::string body1 = slurp(cfg.output_path);
    std::remove(cfg.output_path.c_str());

    cfg.output_path = temp_path("mcvd_cmp_b.csv");
    const int rc2 = hn::run(cfg);
    const std::string body2 = slurp(cfg.output_path);
    std::remove(cfg.output_path.c_str());

    CHECK(rc1 == rc2);
    // bodies differ only in the identical comment/config line, so the whole
    // files must match byte for byte
    CHECK(body1 == body2);
}

TEST_CASE("run compare: workers do not change the CSV bytes") {
    hn::ExperimentConfig cfg;
    cfg.mode = hn::Mode::compare;
    cfg.params = {5.0, 100.0, 1e-5, 1.0};
    cfg.simcfg.dt = 1e-3;
    cfg.simcfg.t_end = 1.0;
    cfg.simcfg.n_particles = 300;
    cfg.simcfg.seed = 5;
    cfg.sweep = {"t", 0.5, 1.0, 2, false};

    std::string reference;
    for (int workers : {1, 4}) {
        cfg.simcfg.n_workers = workers;
        cfg.output_path = temp_path("mcvd_cmp_w" + std::to_string(workers) + ".csv");
        CHECK(hn::run(cfg) == 0);
        const std::string body = slurp(cfg.output_path);
        std::remove(cfg.output_path.c_str());
        if (reference.empty()) reference = body;
        else CHECK(body == reference);
    }
}

TEST_CASE("run compare: impossible gate returns exit code 3") {
    hn::ExperimentConfig cfg;
    cfg.mode = hn::Mode::compare;
    cfg.params = {5.0, 100.0, 1e-5, 0.0};
    cfg.simcfg.dt = 1e-3;
    cfg.simcfg.t_end = 0.5;
    cfg.simcfg.n_particles = 200;
    cfg.sweep = {"t", 0.5, 0.5, 1, false};
    cfg.max_abs_error = 1e-12;  // unattainable with 200 particles
    cfg.output_path = temp_path("mcvd_cmp_gate.csv");
    CHECK(hn::run(cfg) == 3);
    std::remove(cfg.output_path.c_str());
}

TEST_CASE("figure pipelines: small smoke datasets parse and stay in range") {
    hn::ExperimentConfig cfg;
    cfg.mode = hn::Mode::figure;
    cfg.simcfg.dt = 1e-3;
    cfg.simcfg.n_particles = 150;
    cfg.simcfg.seed = 31;
    cfg.sweep.points = 4;

    SUBCASE("fig3") {
        cfg.figure = "fig3";
        cfg.output_path = temp_path("mcvd_fig3.csv");
        CHECK(hn::run(cfg) == 0);
        const auto csv = hn::read_csv(cfg.output_path);
        CHECK(csv.header.size() == 8);
        CHECK(csv.rows.size() == 8);  // 2 densities x 4 grid points
        for (const auto& r : csv.rows) {
            for (std::size_t c = 2; c < r.size(); ++c) {
                CHECK(r[c] >= 0.0);
                CHECK(r[c] <= 1.0);
            }
        }
        std::remove(cfg.output_path.c_str());
    }
    SUBCASE("fig4") {
        cfg.figure = "fig4";
        cfg.output_path = temp_path("mcvd_fig4.csv");
        CHECK(hn::run(cfg) == 0);
        const auto csv = hn::read_csv(cfg.output_path);
        CHECK(csv.header.size() == 7);
        CHECK(csv.rows.size() == 16);  // 4 radii x 2 mus x 2 times
        std::remove(cfg.output_path.c_str());
    }
    SUBCASE("fig5") {
        cfg.figure = "fig5";
        cfg.output_path = temp_path("mcvd_fig5.csv");
        CHECK(hn::run(cfg) == 0);
        const auto csv = hn::read_csv(cfg.output_path);
        CHECK(csv.header.size() == 6);
        CHECK(csv.rows.size() == 4);
        // time constants decrease with density
        for (std::size_t i = 1; i < csv.rows.size(); ++i) {
            CHECK(csv.rows[i][1] <= csv.rows[i - 1][1]);
            CHECK(csv.rows[i][3] <= csv.rows[i - 1][3]);
        }
        std::remove(cfg.output_path.c_str());
    }
    SUBCASE("fig6") {
        cfg.figure = "fig6";
        cfg.output_path = temp_path("mcvd_fig6.csv");
        CHECK(hn::run(cfg) == 0);
        const auto csv = hn::read_csv(cfg.output_path);
        CHECK(csv.header.size() == 7);
        CHECK(csv.rows.size() == 4);
        for (const auto& r : csv.rows) {
            CHECK(r[1] >= 0.0);
            CHECK(r[1] <= 1.0);
            CHECK(r[2] >= r[1]);  // more molecules never hurt detection
        }
        std::remove(cfg.output_path.c_str());
    }
}

TEST_CASE("format_g17 round trips doubles through text") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 60) - 30);
        CHECK(std::strtod(hn::format_g17(v).c_str(), nullptr) == v);
    }
}
