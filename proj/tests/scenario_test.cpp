// Copyright 2026 The heraldsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>

#include "heraldsim/data_table.hpp"
#include "heraldsim/error.hpp"
#include "heraldsim/scenario.hpp"

using namespace heraldsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("heraldsim_scenario_" + name);
    fs::remove_all(p);
    return p;
}

RunManifest run_in(const std::string &toml, const fs::path &dir, int threads = 1) {
    ScenarioConfig c = parse_scenario_config(toml, "test");
    c.out_dir = dir;
    c.threads = threads;
    return run_scenario(c);
}

std::map<std::string, std::string> checksums(const RunManifest &m) {
    std::map<std::string, std::string> out;
    for (const auto &o : m.outputs) out[o.file] = o.checksum;
    return out;
}

double summary(const RunManifest &m, const std::string &key) {
    for (const auto &[k, v] : m.summary) {
        if (k == key) return v;
    }
    ADD_FAILURE() << "missing summary key " << key;
    return NAN;
}

constexpr const char *kPointsToml = R"(
scenario = "fig3a_points"
seed = 99
[source]
lambda_sq = [0.03, 0.08]
[herald]
eta = 0.2961
detectors = ["click", "pnr"]
[monte_carlo]
shots = 40000
[output]
formats = ["csv", "json"]
)";

}  // namespace

TEST(scenario_config, unknown_keys_and_sections_are_rejected) {
    EXPECT_THROW(parse_scenario_config("scenario = \"fig4_surface\"\nsed = 3\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"fig4_surface\"\n[sorce]\nlambda_sq = 0.1\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"fig4_surface\"\n[source]\nlambda = 0.1\n"), ConfigError);
}

TEST(scenario_config, domain_errors_are_config_errors) {
    EXPECT_THROW(parse_scenario_config("seed = 1\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"fig9\"\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = 1.2\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = 0.1\n[herald]\neta = 1.5\n"),
                 ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = 0.0\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = \"a\"\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = 0.1\n"
                                       "[herald]\ndetectors = [\"spad\"]\n"),
                 ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"klyshko_calibration\"\n[source]\npump_power = [1.0]\n"
                                       "pump_slope = 0.02\n"),
                 ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"fig3b_sweep\"\n[source]\nlambda_sq = 0.1\n"), ConfigError);
    EXPECT_THROW(parse_scenario_config("scenario = \"custom\"\n[source\n"), ConfigError);
}

TEST(scenario_config, grid_forms) {
    auto c = parse_scenario_config("scenario = \"fig4_surface\"\n"
                                   "[source]\nlambda_sq = { start = 0.0, stop = 0.5, steps = 6 }\n"
                                   "[herald]\neta = 0.5\n");
    ASSERT_EQ(c.squeezing_grid().size(), 6u);
    EXPECT_NEAR(c.squeezing_grid()[3], 0.3, 1e-15);
    EXPECT_EQ(c.eta_herald, std::vector<double>{0.5});
    c = parse_scenario_config("scenario = \"fig4_surface\"\n"
                              "[source]\nlambda_sq = { start = 0.001, stop = 0.1, steps = 3, spacing = \"log\" }\n");
    ASSERT_EQ(c.squeezing_grid().size(), 3u);
    EXPECT_NEAR(c.squeezing_grid()[1], 0.01, 1e-15);
    c = parse_scenario_config("scenario = \"klyshko_calibration\"\n"
                              "[source]\npump_power = [1.0, 2.0]\npump_slope = 0.05\n");
    EXPECT_EQ(c.squeezing_grid(), (std::vector<double>{0.05, 0.1}));
}

TEST(scenario_config, expected_outputs_follow_formats_and_options) {
    auto c = parse_scenario_config(kPointsToml);
    EXPECT_EQ(c.expected_outputs(), (std::vector<std::string>{"fig3a_points.csv", "fig3a_points.json",
                                                              "fig3a_ratio.csv", "fig3a_ratio.json",
                                                              "fig3a_points.svg"}));
    c = parse_scenario_config("scenario = \"fig2b_histogram\"\n[source]\nlambda_sq = 0.1\n[herald]\neta = 0.3\n");
    const auto files = c.expected_outputs();
    EXPECT_NE(std::find(files.begin(), files.end(), "fig2b_slopes.csv"), files.end());
    c = parse_scenario_config("scenario = \"custom\"\n[source]\nlambda_sq = 0.1\n[herald]\neta = 0.3\n");
    EXPECT_EQ(c.expected_outputs(), std::vector<std::string>{"custom.csv"});
}

TEST(scenario_config, hash_ignores_output_location_and_threads) {
    auto a = parse_scenario_config(kPointsToml);
    auto b = a;
    b.out_dir = "elsewhere";
    b.threads = 4;
    EXPECT_EQ(a.canonical_json(), b.canonical_json());
    b.seed = 100;
    EXPECT_NE(a.canonical_json(), b.canonical_json());
}

TEST(scenario_config, fnv1a64_reference_values) {
    EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(scenario_run, writes_exactly_the_expected_outputs) {
    const fs::path dir = scratch("outputs");
    const auto m = run_in(kPointsToml, dir);
    std::vector<std::string> written;
    for (const auto &entry : fs::directory_iterator(dir)) written.push_back(entry.path().filename().string());
    std::sort(written.begin(), written.end());
    auto expected = parse_scenario_config(kPointsToml).expected_outputs();
    expected.push_back("manifest.json");
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(written, expected);
    EXPECT_EQ(m.outputs.size() + 1, expected.size());
    EXPECT_TRUE(m.passed());
    fs::remove_all(dir);
}

TEST(scenario_run, reruns_and_thread_counts_give_identical_checksums) {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const fs::path c = scratch("det_c");
    const auto ma = run_in(kPointsToml, a, 1);
    const auto mb = run_in(kPointsToml, b, 1);
    const auto mc = run_in(kPointsToml, c, 3);
    EXPECT_EQ(checksums(ma), checksums(mb));
    EXPECT_EQ(checksums(ma), checksums(mc));
    EXPECT_EQ(ma.config_hash, mc.config_hash);
    for (const auto &p : {a, b, c}) fs::remove_all(p);
}

TEST(scenario_run, surface_ratio_is_three_at_vanishing_squeezing) {
    const fs::path dir = scratch("surface");
    run_in("scenario = \"fig4_surface\"\n[source]\nlambda_sq = [0.0, 0.1]\n[herald]\neta = [0.8, 1.0]\n", dir);
    const DataTable t = load_csv(dir / "fig4_surface.csv");
    EXPECT_EQ(t.schema, "heraldsim.fig4_surface/1");
    bool checked = false;
    bool saw_inf = false;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double x = t.number(r, t.column("lambda_sq"));
        const double e = t.number(r, t.column("eta_h"));
        if (x == 0.0 && e == 0.8) {
            EXPECT_NEAR(t.number(r, t.column("r")), 3.0, 0.01);
            checked = true;
        }
        if (e == 1.0) {
            EXPECT_EQ(t.text(r, t.column("r")), "inf");
            saw_inf = true;
        }
    }
    EXPECT_TRUE(checked);
    EXPECT_TRUE(saw_inf);
    fs::remove_all(dir);
}

TEST(scenario_run, ideal_pnr_curve_is_flat_zero) {
    const fs::path dir = scratch("curves");
    run_in("scenario = \"fig3a_curves\"\n"
           "[source]\nlambda_sq = { start = 0.01, stop = 0.5, steps = 8 }\n"
           "[herald]\neta = 1.0\ndetectors = [\"click\", \"pnr\"]\n",
           dir);
    const DataTable t = load_csv(dir / "fig3a_curves.csv");
    std::size_t pnr_rows = 0;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double g2 = t.number(r, t.column("g2"));
        if (t.text(r, t.column("detector")) == "pnr") {
            EXPECT_NEAR(g2, 0.0, 1e-12);
            ++pnr_rows;
        } else {
            EXPECT_GT(g2, 0.0);
        }
    }
    EXPECT_EQ(pnr_rows, 8u);
    fs::remove_all(dir);
}

TEST(scenario_run, filtered_ratio_lands_in_reported_band) {
    const fs::path dir = scratch("ratio");
    const auto m = run_in("scenario = \"fig3a_points\"\nseed = 4\n"
                          "[source]\nlambda_sq = 0.08\n"
                          "[herald]\neta = 0.162\ndetectors = [\"pnr\"]\n"
                          "p_1_given_2 = 0.0447\np_2_given_1 = 0.002\n"
                          "[monte_carlo]\nshots = 300000\n",
                          dir);
    const DataTable t = load_csv(dir / "fig3a_ratio.csv");
    ASSERT_EQ(t.size(), 1u);
    const double model = t.number(0, t.column("ratio_model"));
    EXPECT_GE(model, 0.83);
    EXPECT_LE(model, 0.93);
    const double ratio = t.number(0, t.column("ratio"));
    EXPECT_GE(ratio, 0.83);
    EXPECT_LE(ratio, 0.93);
    EXPECT_LT(std::abs(t.number(0, t.column("z"))), 4.0);
    EXPECT_EQ(summary(m, "z_outliers"), 0.0);
    fs::remove_all(dir);
}

TEST(scenario_run, klyshko_intercept_recovers_herald_efficiency) {
    const fs::path dir = scratch("klyshko");
    const auto m = run_in("scenario = \"klyshko_calibration\"\nseed = 8\n"
                          "[source]\npump_power = [1.0, 2.0, 3.0, 4.0]\npump_slope = 0.02\n"
                          "[herald]\neta = 0.3\n[monte_carlo]\nshots = 400000\n"
                          "[output]\nplots = false\n",
                          dir);
    EXPECT_NEAR(summary(m, "intercept"), 0.3, 4 * summary(m, "intercept_sigma") + 1e-3);
    EXPECT_FALSE(fs::exists(dir / "klyshko_calibration.svg"));
    fs::remove_all(dir);
}

TEST(scenario_run, histogram_pipeline_recovers_distribution) {
    const fs::path dir = scratch("histogram");
    const auto m = run_in("scenario = \"fig2b_histogram\"\nseed = 12\n"
                          "[source]\nlambda_sq = 0.1\n[herald]\neta = 0.2961\n"
                          "[traces]\ncount = 20000\nsynthesize = false\n",
                          dir);
    EXPECT_LT(summary(m, "tv_binned"), 1e-2);
    EXPECT_GT(summary(m, "tv_click"), 1.5e-2);
    const DataTable slopes = load_csv(dir / "fig2b_slopes.csv");
    EXPECT_EQ(slopes.size(), 20000u);
    fs::remove_all(dir);
}
