// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "emlens/harness.hpp"

using namespace emlens;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string("./") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

ExperimentConfig small_config(const std::string& experiment) {
    ExperimentConfig config = default_config(experiment);
    config.elements = 10;
    config.users = 2;
    config.lens_half_width = 1;
    config.sweep = {0.0, 10.0};
    config.trials = 40;
    config.seed = 9;
    config.threads = 2;
    return config;
}

}  // namespace

TEST_CASE("nominal AoA grid") {
    REQUIRE(nominal_aoa_grid(1, kPi / 3)(0) == 0.0);

    const Vec two = nominal_aoa_grid(2, kPi / 3);
    REQUIRE(two(0) == Catch::Approx(-kPi / 3));
    REQUIRE(two(1) == Catch::Approx(kPi / 3));

    const Vec three = nominal_aoa_grid(3, kPi / 3);
    REQUIRE(three(1) == Catch::Approx(0.0).margin(1e-15));

    const Vec twenty = nominal_aoa_grid(20, kPi / 3);
    for (int k = 0; k + 1 < 20; ++k)
        REQUIRE(twenty(k + 1) - twenty(k) == Catch::Approx(2 * kPi / (3 * 19)).epsilon(1e-12));
}

TEST_CASE("linear peak map endpoints") {
    const ArrayGeometry geom(50, 1.0, kPi / 3);
    const auto map = peak_map_linear(geom, 2);
    REQUIRE(map(-geom.coverage) == Catch::Approx(geom.position(2)));
    REQUIRE(map(geom.coverage) == Catch::Approx(geom.position(47)));
    REQUIRE(map(0.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(peak_map_linear(ArrayGeometry(4, 1.0, 1.0), 2), invalid_input);
}

TEST_CASE("config file parsing") {
    SECTION("round trip of a full config") {
        const std::string path = write_temp("cfg_full.cfg",
                                            "# comment line\n"
                                            "experiment = fig6\n"
                                            "elements = 12\n"
                                            "users = 4\n"
                                            "spacing = 0.5\n"
                                            "coverage_deg = 60\n"
                                            "sigma_phi_deg = 8\n"
                                            "gain = 1.5\n"
                                            "lens_half_width = 1\n"
                                            "lens_spread_d2 = 0.4\n"
                                            "sweep = -10, 0, 10\n"
                                            "trials = 100\n"
                                            "seed = 42\n"
                                            "rho_d_db = 3\n"
                                            "threads = 2\n"
                                            "theory_only = true\n");
        const ExperimentConfig config = parse_config_file(path);
        REQUIRE(config.experiment == "fig6");
        REQUIRE(config.elements == 12);
        REQUIRE(config.users == 4);
        REQUIRE(config.spacing == 0.5);
        REQUIRE(config.coverage == Catch::Approx(kPi / 3));
        REQUIRE(config.sigma_phi == Catch::Approx(deg_to_rad(8)));
        REQUIRE(config.gain == 1.5);
        REQUIRE(config.lens_half_width == 1);
        REQUIRE(config.lens_spread_d2 == 0.4);
        REQUIRE(config.sweep == std::vector<double>{-10, 0, 10});
        REQUIRE(config.trials == 100);
        REQUIRE(config.seed == 42);
        REQUIRE(config.rho_d_db == 3);
        REQUIRE(config.threads == 2);
        REQUIRE(config.theory_only);
        std::remove(path.c_str());
    }

    SECTION("experiment aliases canonicalize") {
        const std::string path = write_temp("cfg_alias.cfg", "experiment = fig7\n");
        REQUIRE(parse_config_file(path).experiment == "fig7-sumrate-vs-K");
        std::remove(path.c_str());
    }

    SECTION("defaults fill unspecified fields") {
        const std::string path = write_temp("cfg_min.cfg", "experiment = fig5\n");
        const ExperimentConfig config = parse_config_file(path);
        REQUIRE(config.users == 1);
        REQUIRE(config.elements == 50);
        REQUIRE(config.sweep.size() == 7);
        std::remove(path.c_str());
    }

    SECTION("unknown keys and ids are rejected") {
        const std::string bad_key = write_temp("cfg_badkey.cfg",
                                               "experiment = fig5\nshoe_size = 45\n");
        CHECK_THROWS_AS(parse_config_file(bad_key), invalid_input);
        std::remove(bad_key.c_str());

        const std::string bad_id = write_temp("cfg_badid.cfg", "experiment = fig99\n");
        CHECK_THROWS_AS(parse_config_file(bad_id), invalid_input);
        std::remove(bad_id.c_str());

        const std::string no_id = write_temp("cfg_noid.cfg", "trials = 3\n");
        CHECK_THROWS_AS(parse_config_file(no_id), invalid_input);
        std::remove(no_id.c_str());

        CHECK_THROWS_AS(parse_config_file("./does_not_exist.cfg"), invalid_input);
    }
}

TEST_CASE("CSV rows round-trip losslessly") {
    std::vector<ResultRow> rows{
        {"fig5.lens", -10.0, "1", "avg_snr_db", 3.14159265358979312, 0.001234, 100, 7},
        {"fig9.nolens.cov", 20.0, "sum", "sum_rate", 1e-300, 0.0, 1, 18446744073709551615ull},
        {"custom.lens", 0.5, "median", "bound_snr_db", -27.25, 5e-9, 2000, 0},
    };
    const std::string text = to_csv(rows);
    const std::vector<ResultRow> parsed = parse_csv(text);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(parsed[i].experiment == rows[i].experiment);
        REQUIRE(parsed[i].sweep == rows[i].sweep);
        REQUIRE(parsed[i].user == rows[i].user);
        REQUIRE(parsed[i].metric == rows[i].metric);
        REQUIRE(parsed[i].value == rows[i].value);  // bit-exact
        REQUIRE(parsed[i].std_err == rows[i].std_err);
        REQUIRE(parsed[i].trials == rows[i].trials);
        REQUIRE(parsed[i].seed == rows[i].seed);
    }
    CHECK_THROWS_AS(parse_csv("bogus,header\n1,2\n"), invalid_input);
}

TEST_CASE("experiments are deterministic for a fixed seed") {
    SECTION("identical reruns, independent of thread count") {
        ExperimentConfig config = small_config("fig5");
        config.users = 1;
        config.trials = 30;
        const std::string once = to_csv(run_experiment(config));
        const std::string twice = to_csv(run_experiment(config));
        REQUIRE(once == twice);
        config.threads = 1;
        REQUIRE(to_csv(run_experiment(config)) == once);
    }

    SECTION("seed changes the Monte-Carlo rows") {
        ExperimentConfig config = small_config("fig5");
        ExperimentConfig other = config;
        other.seed = config.seed + 1;
        REQUIRE(to_csv(run_experiment(config)) != to_csv(run_experiment(other)));
    }
}

TEST_CASE("experiment row structure") {
    SECTION("fig5 emits theory and empirical rows per branch") {
        const auto rows = run_experiment(small_config("fig5"));
        int theory = 0, empirical = 0;
        for (const auto& row : rows) {
            REQUIRE((row.experiment == "fig5.lens" || row.experiment == "fig5.nolens"));
            if (row.metric == "theory_snr_db") ++theory;
            if (row.metric == "avg_snr_db") ++empirical;
        }
        REQUIRE(theory == 4);     // 2 sweep points x 2 branches
        REQUIRE(empirical == 4);
    }

    SECTION("fig6 reports every user plus the median") {
        const auto rows = run_experiment(small_config("fig6"));
        bool saw_median = false;
        for (const auto& row : rows)
            if (row.user == "median" && row.metric == "avg_snr_db") saw_median = true;
        REQUIRE(saw_median);
    }

    SECTION("fig8 emits all four receiver branches") {
        ExperimentConfig config = small_config("fig8-smallmimo");
        config.groups = 2;
        const auto rows = run_experiment(config);
        std::vector<std::string> expected{"fig8-smallmimo.lens.full", "fig8-smallmimo.lens.small",
                                          "fig8-smallmimo.nolens.full",
                                          "fig8-smallmimo.nolens.small"};
        for (const auto& id : expected) {
            bool found = false;
            for (const auto& row : rows) found = found || row.experiment == id;
            REQUIRE(found);
        }
    }

    SECTION("fig9 emits surrogate and Monte-Carlo rows for both schemes") {
        ExperimentConfig config = small_config("fig9-selection");
        config.sweep = {2, 4};
        const auto rows = run_experiment(config);
        int surrogate = 0, cov_mc = 0, inst_mc = 0;
        for (const auto& row : rows) {
            if (row.metric == "surrogate_rate") ++surrogate;
            if (row.metric == "sum_rate" && row.experiment.find(".cov") != std::string::npos)
                ++cov_mc;
            if (row.metric == "sum_rate" && row.experiment.find(".inst") != std::string::npos)
                ++inst_mc;
        }
        REQUIRE(surrogate == 4);  // 2 sweep points x 2 branches
        REQUIRE(cov_mc == 4);
        REQUIRE(inst_mc == 4);
    }

    SECTION("theory-only strips Monte-Carlo rows") {
        ExperimentConfig config = small_config("fig5");
        config.theory_only = true;
        for (const auto& row : run_experiment(config)) REQUIRE(row.metric == "theory_snr_db");
    }

    SECTION("bad experiment ids and sweeps are rejected") {
        ExperimentConfig config = small_config("fig5");
        config.experiment = "fig99";
        CHECK_THROWS_AS(run_experiment(config), invalid_input);

        ExperimentConfig no_sweep = small_config("fig5");
        no_sweep.sweep.clear();
        CHECK_THROWS_AS(run_experiment(no_sweep), invalid_input);

        ExperimentConfig bad_n = small_config("fig9-selection");
        bad_n.sweep = {0.5};
        CHECK_THROWS_AS(run_experiment(bad_n), invalid_input);
    }

    SECTION("unwritable output path is rejected") {
        ExperimentConfig config = small_config("fig5");
        config.theory_only = true;
        config.out = "./no_such_dir/out.csv";
        CHECK_THROWS_AS(run_experiment(config), invalid_input);
    }
}

TEST_CASE("standard errors shrink like the square root of the trial count") {
    ExperimentConfig config = small_config("fig5");
    config.users = 1;
    Vec ses(3);
    int i = 0;
    for (int trials : {100, 1000, 10000}) {
        const ArrayGeometry geom = config.geometry();
        const Scenario scenario{geom,
                                {{config.gain, 0.0, config.sigma_phi}},
                                config.lens(),
                                db_to_linear(10.0),
                                db_to_linear(0.0)};
        ses(i++) = compare_with_without_lens(scenario, trials, config.seed, 2).se_with(0);
    }
    REQUIRE(ses(0) / ses(1) == Catch::Approx(std::sqrt(10.0)).epsilon(0.2));
    REQUIRE(ses(1) / ses(2) == Catch::Approx(std::sqrt(10.0)).epsilon(0.2));
}
