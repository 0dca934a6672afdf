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

#include "heraldsim/mc_experiment.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "mc_oracle.hpp"

using namespace heraldsim;

namespace {

ExperimentConfig base_config(double lambda_sq, double eta_h, std::uint64_t shots,
                             HeraldDetector herald = HeraldDetector::click()) {
    ExperimentConfig c;
    c.squeezing = SqueezingParam::from_lambda_sq(lambda_sq);
    c.eta_herald = eta_h;
    c.eta_signal = 0.8;
    c.eta_d1 = 1.0;
    c.eta_d2 = 1.0;
    c.num_shots = shots;
    c.rng_seed = 12345;
    c.herald = std::move(herald);
    return c;
}

double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(StreamRng, streams_are_reproducible_and_distinct) {
    StreamRng a(1, 7), b(1, 7), c(1, 8), d(2, 7);
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
}

TEST(StreamRng, geometric_mean) {
    StreamRng rng(99);
    const double x = 0.3;
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += rng.geometric(x);
    const double mean = x / (1 - x);
    const double sd = std::sqrt(x) / (1 - x);
    EXPECT_NEAR(sum / n, mean, 4 * sd / std::sqrt(n));
}

TEST(StreamRng, normal_moments) {
    StreamRng rng(5);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(RunShot, vacuum_source_is_silent) {
    const auto cfg = base_config(0.0, 0.5, 1000);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const auto shot = run_shot(cfg, i);
        EXPECT_EQ(shot, ShotOutcome{});
    }
}

TEST(RunShot, lossless_pnr_reports_pair_number) {
    const auto cfg = base_config(0.4, 1.0, 1, HeraldDetector::pnr());
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const auto shot = run_shot(cfg, i);
        EXPECT_EQ(shot.herald_report, shot.pairs_generated);
        EXPECT_LE(shot.herald_photons_detected, shot.pairs_generated);
    }
}

TEST(RunShot, click_herald_rate_matches_closed_form) {
    const auto cfg = base_config(0.1, 0.3, 1'000'000);
    const auto counts = run_experiment(cfg, false);
    const double p = 1.0 - 0.9 / 0.93;
    const double rate = static_cast<double>(counts.herald_singles) / counts.shots;
    EXPECT_NEAR(rate, p, 3 * binomial_sigma(p, 1e6));
}

TEST(RunExperiment, zero_shots_rejected) {
    auto cfg = base_config(0.1, 0.3, 1);
    cfg.num_shots = 0;
    EXPECT_THROW(run_experiment(cfg, false), ConfigError);
    cfg.num_shots = 1;
    cfg.eta_herald = 1.5;
    EXPECT_THROW(run_experiment(cfg, false), ConfigError);
    cfg.eta_herald = 0.5;
    cfg.herald = HeraldDetector::click();
    cfg.herald.confusion = ConfusionMatrix::identity(2);
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(RunExperiment, perfect_pnr_filtering_removes_threefolds) {
    const auto cfg = base_config(0.3, 1.0, 200'000, HeraldDetector::pnr());
    const auto counts = run_experiment(cfg, true);
    EXPECT_EQ(counts.coinc_12h, 0u);
    EXPECT_GT(counts.herald_multi, 0u);
    EXPECT_EQ(g2_empirical(counts).value, 0.0);
}

TEST(RunExperiment, filtered_over_unfiltered_matches_model) {
    const double x = 0.08;
    const double eta = 0.162;
    const auto cfg = base_config(x, eta, 300'000, HeraldDetector::pnr());
    const auto paired = run_experiment_paired(cfg);
    const auto r = g2_ratio_paired(paired);
    EXPECT_DOUBLE_EQ(r.value, g2_empirical(paired.filtered).value / g2_empirical(paired.unfiltered).value);

    const auto s = SqueezingParam::from_lambda_sq(x);
    const double model = g2_heralded(s, povm_pnr(1, eta)) / g2_heralded(s, povm_click(true, eta));
    EXPECT_NEAR(r.value, model, 3 * r.sigma);
}

TEST(G2RatioPaired, click_herald_ratio_is_exactly_one) {
    const auto paired = run_experiment_paired(base_config(0.1, 0.3, 100'000));
    const auto r = g2_ratio_paired(paired);
    EXPECT_EQ(r.value, 1.0);
    EXPECT_EQ(r.sigma, 0.0);
}

TEST(G2RatioPaired, error_matches_seed_to_seed_scatter) {
    const double x = 0.08;
    const double eta = 0.162;
    const auto s = SqueezingParam::from_lambda_sq(x);
    const double model = g2_heralded(s, povm_pnr(1, eta)) / g2_heralded(s, povm_click(true, eta));
    const int runs = 40;
    double pull_sq = 0.0;
    double spread_sq = 0.0;
    double sigma_sum = 0.0;
    for (int k = 0; k < runs; ++k) {
        auto cfg = base_config(x, eta, 1'000'000, HeraldDetector::pnr());
        cfg.rng_seed = 1000 + k;
        const auto r = g2_ratio_paired(run_experiment_paired(cfg));
        pull_sq += std::pow((r.value - model) / r.sigma, 2);
        spread_sq += std::pow(r.value - model, 2);
        sigma_sum += r.sigma;
    }
    // A chi-square with 40 degrees of freedom stays within [0.5, 1.6] per run with
    // probability above 0.99.
    EXPECT_GT(pull_sq / runs, 0.5);
    EXPECT_LT(pull_sq / runs, 1.6);
    EXPECT_NEAR(std::sqrt(spread_sq / runs) / (sigma_sum / runs), 1.0, 0.3);
}

TEST(G2RatioPaired, unnested_records_rejected) {
    PairedCounts p;
    p.unfiltered.shots = p.filtered.shots = 100;
    p.unfiltered.herald_singles = 10;
    p.unfiltered.coinc_1h = p.unfiltered.coinc_2h = 4;
    p.filtered = p.unfiltered;
    p.filtered.herald_singles = 12;
    p.filtered.coinc_1h = 5;
    EXPECT_THROW(g2_ratio_paired(p), ComputeError);
}

TEST(RunExperiment, counter_invariants_hold) {
    for (auto herald : {HeraldDetector::click(), HeraldDetector::pseudo_pnr(2),
                        HeraldDetector::pnr(ConfusionMatrix::from_pair(0.1, 0.05, 3))}) {
        for (bool filter : {false, true}) {
            auto cfg = base_config(0.3, 0.5, 50'000, herald);
            cfg.dark_click_prob = 0.01;
            const auto counts = run_experiment(cfg, filter);
            EXPECT_TRUE(counts.consistent()) << herald.describe();
            EXPECT_EQ(counts.shots, 50'000u);
        }
    }
}

TEST(RunExperiment, deterministic_and_thread_count_invariant) {
    auto cfg = base_config(0.1, 0.3, 100'000, HeraldDetector::pseudo_pnr(2));
    const auto a = run_experiment(cfg, true, 1);
    const auto b = run_experiment(cfg, true, 1);
    const auto c = run_experiment(cfg, true, 4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    cfg.rng_seed += 1;
    EXPECT_NE(a, run_experiment(cfg, true, 1));
}

TEST(RunExperiment, merge_is_associative_and_commutative) {
    auto cfg = base_config(0.2, 0.4, 10'000);
    CountRecord a = run_experiment(cfg, false);
    cfg.rng_seed = 1;
    CountRecord b = run_experiment(cfg, false);
    cfg.rng_seed = 2;
    CountRecord c = run_experiment(cfg, false);
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ(a + b, b + a);
}

TEST(RunExperiment, paired_matches_separate_runs) {
    const auto cfg = base_config(0.1, 0.3, 50'000, HeraldDetector::pnr());
    const auto paired = run_experiment_paired(cfg, 3);
    EXPECT_EQ(paired.unfiltered, run_experiment(cfg, false));
    EXPECT_EQ(paired.filtered, run_experiment(cfg, true));
}

TEST(RunExperiment, herald_events_are_the_detected_shots) {
    const auto cfg = base_config(0.1, 0.3, 20'000, HeraldDetector::pnr());
    const auto events = collect_herald_events(cfg, 2);
    const auto counts = run_experiment(cfg, false);
    EXPECT_EQ(events.size(), counts.herald_singles);
    for (const auto &e : events) EXPECT_EQ(e.outcome, run_shot(cfg, e.shot_index));
}

TEST(G2Empirical, direct_formula) {
    CountRecord r;
    r.herald_singles = 1000;
    r.coinc_1h = 100;
    r.coinc_2h = 100;
    r.coinc_12h = 10;
    const auto g = g2_empirical(r);
    EXPECT_DOUBLE_EQ(g.value, 1.0);
    // (sigma/g)^2 = 1/1000 + 1/10 + 1/100 + 1/100
    EXPECT_NEAR(g.sigma, std::sqrt(0.121), 1e-12);
}

TEST(G2Empirical, zero_threefolds) {
    CountRecord r;
    r.herald_singles = 1000;
    r.coinc_1h = 100;
    r.coinc_2h = 80;
    const auto g = g2_empirical(r);
    EXPECT_EQ(g.value, 0.0);
    EXPECT_EQ(g.sigma, 0.0);
}

TEST(G2Empirical, insufficient_counts) {
    CountRecord r;
    r.herald_singles = 10;
    r.coinc_1h = 5;
    EXPECT_THROW(g2_empirical(r), ComputeError);
}

TEST(G2Empirical, coherent_stand_in_gives_one) {
    // Herald independent of a Poissonian (coherent) signal with mean 0.1.
    StreamRng rng(2024);
    CountRecord counts;
    const double mean = 0.1;
    for (int i = 0; i < 2'000'000; ++i) {
        ShotOutcome shot;
        shot.herald_report = rng.bernoulli(0.3) ? 1 : 0;
        // Poisson by inversion.
        int n = 0;
        double p = std::exp(-mean), cdf = p, u = rng.uniform();
        while (u > cdf) {
            ++n;
            p *= mean / n;
            cdf += p;
        }
        for (int k = 0; k < n; ++k) (rng.bernoulli(0.5) ? shot.d1_click : shot.d2_click) = true;
        counts.add_shot(shot, false);
    }
    const auto g = g2_empirical(counts);
    EXPECT_NEAR(g.value, 1.0, 3 * g.sigma);
}

TEST(Klyshko, lossless_herald_tends_to_one) {
    auto cfg = base_config(0.001, 1.0, 1'000'000);
    cfg.eta_signal = 1.0;
    EXPECT_NEAR(klyshko_efficiency(run_experiment(cfg, false)), 1.0, 1e-12);
}

TEST(Klyshko, small_squeezing_estimate_within_bias_band) {
    const double eta_h = 0.162;
    for (double x : {0.005, 0.02}) {
        const auto cfg = base_config(x, eta_h, 1'000'000);
        const auto counts = run_experiment(cfg, false);
        const auto expected =
            oracle::expected_rates(x, eta_h, cfg.eta_signal, 1.0, 1.0, oracle::accept_click);
        const double k = klyshko_efficiency(counts);
        const double sigma =
            binomial_sigma(expected.klyshko(), static_cast<double>(counts.singles_1 + counts.singles_2));
        EXPECT_NEAR(k, expected.klyshko(), 3 * sigma) << "x=" << x;
        // Bias above eta_h is O(lambda^2).
        EXPECT_GT(expected.klyshko(), eta_h);
        EXPECT_LT(expected.klyshko() - eta_h, 2 * x);
    }
}

TEST(Klyshko, no_signal_counts) {
    EXPECT_THROW(klyshko_efficiency(CountRecord{}), ComputeError);
}

TEST(KlyshkoIntercept, constant_points) {
    const std::vector<PowerPoint> pts{{1, 0.3}, {2, 0.3}, {5, 0.3}};
    const auto fit = klyshko_intercept(pts);
    EXPECT_NEAR(fit.intercept, 0.3, 1e-14);
    EXPECT_NEAR(fit.slope, 0.0, 1e-14);
}

TEST(KlyshkoIntercept, exact_line) {
    const std::vector<PowerPoint> pts{{1, 0.17}, {2, 0.18}, {3, 0.19}};
    const auto fit = klyshko_intercept(pts);
    EXPECT_NEAR(fit.intercept, 0.16, 1e-14);
    EXPECT_NEAR(fit.slope, 0.01, 1e-14);
    EXPECT_NEAR(fit.intercept_sigma, 0.0, 1e-12);
}

TEST(KlyshkoIntercept, degenerate) {
    const std::vector<PowerPoint> one{{1, 0.2}};
    const std::vector<PowerPoint> same{{2, 0.2}, {2, 0.3}};
    EXPECT_THROW(klyshko_intercept(one), ComputeError);
    EXPECT_THROW(klyshko_intercept(same), ComputeError);
}

// Property: herald rate equals the analytic heralding probability for every
// detector model, 4 sigma at 1e6 shots.
TEST(McProperties, herald_rate_matches_povm_model) {
    const auto confusion = ConfusionMatrix::from_pair(0.0447, 0.002, 4);
    for (double x : {0.01, 0.05, 0.1, 0.3}) {
        for (double eta : {0.16, 0.3, 0.8}) {
            const auto s = SqueezingParam::from_lambda_sq(x);
            struct Case {
                HeraldDetector herald;
                bool filter;
                Povm povm;
            };
            const std::vector<Case> cases{
                {HeraldDetector::click(), false, povm_click(true, eta)},
                {HeraldDetector::pseudo_pnr(2), true, povm_ppnr(1, eta, 2)},
                {HeraldDetector::pnr(), true, povm_pnr(1, eta)},
                {HeraldDetector::pnr(confusion), true, pnr_reported_povm(1, eta, confusion)},
            };
            for (const auto &c : cases) {
                auto cfg = base_config(x, eta, 1'000'000, c.herald);
                cfg.rng_seed = 77;
                const auto counts = run_experiment(cfg, c.filter);
                const double p = herald_probability(s, c.povm);
                const double rate = static_cast<double>(counts.herald_singles) / 1e6;
                EXPECT_NEAR(rate, p, 4 * binomial_sigma(p, 1e6))
                    << c.herald.describe() << " x=" << x << " eta=" << eta;
            }
        }
    }
}

TEST(McProperties, unfiltered_click_g2_converges_at_low_squeezing) {
    for (double x : {0.01, 0.05}) {
        for (double eta : {0.16, 0.3}) {
            const auto cfg = base_config(x, eta, 1'000'000);
            const auto g = g2_empirical(run_experiment(cfg, false));
            const double model = g2_heralded(SqueezingParam::from_lambda_sq(x), povm_click(true, eta));
            EXPECT_NEAR(g.value, model, 4 * g.sigma) << "x=" << x << " eta=" << eta;
        }
    }
}

TEST(McProperties, estimator_matches_series_oracle_expectation) {
    // The coincidence estimator's large-count limit is computed independently
    // and must sit within 4 sigma of the simulation, including at high squeezing
    // where it departs from the exact heralded g2.
    for (double x : {0.05, 0.3}) {
        const double eta = 0.3;
        const auto cfg = base_config(x, eta, 1'000'000);
        const auto g = g2_empirical(run_experiment(cfg, false));
        const auto expected = oracle::expected_rates(x, eta, cfg.eta_signal, 1.0, 1.0,
                                                     oracle::accept_click);
        EXPECT_NEAR(g.value, expected.g2_estimator(), 4 * g.sigma) << "x=" << x;
    }
}

TEST(McProperties, filtering_does_not_raise_g2) {
    for (double eta : {0.16, 0.5, 0.9}) {
        const auto cfg = base_config(0.1, eta, 1'000'000, HeraldDetector::pnr());
        const auto paired = run_experiment_paired(cfg);
        const auto gf = g2_empirical(paired.filtered);
        const auto gu = g2_empirical(paired.unfiltered);
        EXPECT_LE(gf.value, gu.value + 3 * std::hypot(gf.sigma, gu.sigma)) << "eta=" << eta;
    }
}

TEST(McProperties, confusion_sampling_matches_apply_confusion) {
    // Reported-2 rate as well as reported-1, against the confusion-channel POVMs.
    const auto confusion = ConfusionMatrix::from_pair(0.2, 0.1, 3);
    const double x = 0.3, eta = 0.6;
    const auto s = SqueezingParam::from_lambda_sq(x);
    const auto cfg = base_config(x, eta, 1'000'000, HeraldDetector::pnr(confusion));
    std::vector<std::uint64_t> reported(4, 0);
    for (std::uint64_t i = 0; i < cfg.num_shots; ++i) {
        const int r = run_shot(cfg, i).herald_report;
        ASSERT_LE(r, 3);
        ++reported[r];
    }
    for (int r = 1; r <= 3; ++r) {
        const double p = herald_probability(s, pnr_reported_povm(r, eta, confusion));
        EXPECT_NEAR(reported[r] / 1e6, p, 4 * binomial_sigma(p, 1e6)) << "r=" << r;
    }
}
