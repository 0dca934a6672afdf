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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "heraldsim/data_table.hpp"
#include "heraldsim/mc_experiment.hpp"
#include "heraldsim/photon_stats.hpp"
#include "heraldsim/rng.hpp"
#include "heraldsim/scenario.hpp"
#include "heraldsim/trace_lab.hpp"

using namespace heraldsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char *format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("heraldsim_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

ScenarioConfig shipped_config(const std::string &name, const fs::path &out) {
    ScenarioConfig c = load_scenario_config(fs::path(HERALDSIM_CONFIG_DIR) / (name + ".toml"));
    c.out_dir = out;
    c.threads = 1;
    return c;
}

double summary(const RunManifest &m, const std::string &key) {
    for (const auto &[k, v] : m.summary) {
        if (k == key) return v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t seed_for(int criterion, int index) { return mix64(0xacce97ULL + 1000ULL * criterion + index); }

Verdict ideal_pnr_zero() {
    double worst = 0.0;
    for (double x : {0.01, 0.1, 0.5, 0.9}) {
        const auto sq = SqueezingParam::from_lambda_sq(x);
        const double g2 = g2_heralded(sq, povm_pnr(1, 1.0, FockTruncation::sufficient_for(sq)));
        worst = std::max(worst, std::abs(g2));
    }
    return {worst < 1e-12, fmt("max |g2| = %.3g (< 1e-12)", worst)};
}

Verdict ratio_anchor() {
    const auto sq = SqueezingParam::from_lambda_sq(1e-4);
    const double r = improvement_ratio(sq, 0.8, FockTruncation{50});
    return {std::abs(r - 3.0) <= 0.02, fmt("r(eta=0.8, lambda^2=1e-4, n_max=50) = %.5f (3.00 +/- 0.02)", r)};
}

Verdict curve_ordering() {
    int violations = 0;
    int points = 0;
    for (double x : linspace(0.01, 0.9, 20)) {
        const auto sq = SqueezingParam::from_lambda_sq(x);
        const auto t = FockTruncation::sufficient_for(sq);
        for (double eta : linspace(0.05, 1.0, 20)) {
            const double pnr = g2_heralded(sq, povm_pnr(1, eta, t));
            const double ppnr = g2_heralded(sq, povm_ppnr(1, eta, 2, t));
            const double click = g2_heralded(sq, povm_click(true, eta, t));
            const double slack = 1e-12 * std::max(1.0, click);
            if (pnr > ppnr + slack || ppnr > click + slack) ++violations;
            ++points;
        }
    }
    return {violations == 0, fmt("%d of %d grid points out of order (g2 PNR <= PPNR(2) <= click)", violations, points)};
}

Verdict monte_carlo_agreement() {
    int tests = 0;
    int outliers = 0;
    double worst = 0.0;
    int index = 0;
    for (double x : {0.02, 0.08}) {
        for (double eta : {0.162, 0.296}) {
            ExperimentConfig cfg;
            cfg.squeezing = SqueezingParam::from_lambda_sq(x);
            cfg.eta_herald = eta;
            cfg.herald = HeraldDetector::click();
            cfg.num_shots = 1000000;
            cfg.rng_seed = seed_for(4, index++);
            const CountRecord rec = run_experiment(cfg, false);
            const auto povm = povm_click(true, eta, FockTruncation::sufficient_for(cfg.squeezing));
            const double n = static_cast<double>(rec.shots);
            const double p = herald_probability(cfg.squeezing, povm);
            const double rate_z = (static_cast<double>(rec.herald_singles) / n - p) / std::sqrt(p * (1 - p) / n);
            const G2Estimate g2 = g2_empirical(rec);
            const double g2_z = (g2.value - g2_heralded(cfg.squeezing, povm)) / g2.sigma;
            for (double z : {rate_z, g2_z}) {
                ++tests;
                worst = std::max(worst, std::abs(z));
                if (!(std::abs(z) <= 4.0)) ++outliers;
            }
        }
    }
    const bool ok = static_cast<double>(outliers) <= 0.01 * tests;
    return {ok, fmt("%d of %d z-scores beyond 4 sigma (budget 1%%), max |z| = %.2f", outliers, tests, worst)};
}

double model_ratio(double lambda_sq, double eta, const ConfusionMatrix &confusion) {
    const auto sq = SqueezingParam::from_lambda_sq(lambda_sq);
    const auto t = FockTruncation::sufficient_for(sq);
    return g2_heralded(sq, pnr_reported_povm(1, eta, confusion, t)) / g2_heralded(sq, povm_click(true, eta, t));
}

Verdict reduction_bracket() {
    const auto confusion = ConfusionMatrix::from_pair(0.0447, 0.002);
    ExperimentConfig cfg;
    cfg.squeezing = SqueezingParam::from_lambda_sq(0.08);
    cfg.eta_herald = 0.162;
    cfg.herald = HeraldDetector::pnr(confusion);
    cfg.num_shots = 300000;
    cfg.rng_seed = seed_for(5, 0);
    const PairedCounts paired = run_experiment_paired(cfg);
    const G2Estimate paired_ratio = g2_ratio_paired(paired);
    const double ratio = paired_ratio.value;
    const double sigma = paired_ratio.sigma;
    const double model = model_ratio(0.08, 0.162, confusion);
    const double reduction = 1.0 - model_ratio(0.08, 0.2961, confusion);
    const bool within = std::abs(ratio - model) <= 3.0 * sigma;
    const bool band = reduction >= 0.08 && reduction <= 0.18;
    return {within && band,
            fmt("MC ratio %.4f +/- %.4f vs model %.4f at eta_h=0.162 (|dz| = %.2f <= 3); "
                "model reduction %.2f%% at eta_h=0.2961 in [8%%, 18%%] (eta_h=0.162: %.2f%%)",
                ratio, sigma, model, std::abs(ratio - model) / sigma, 100 * reduction,
                100 * (1.0 - model))};
}

Verdict klyshko_intercept_recovery() {
    std::vector<PowerPoint> points;
    for (int i = 0; i < 8; ++i) {
        const double power = 0.5 * (i + 1);
        ExperimentConfig cfg;
        cfg.squeezing = squeezing_from_pump(power, 0.02);
        cfg.eta_herald = 0.2961;
        cfg.herald = HeraldDetector::click();
        cfg.num_shots = 1000000;
        cfg.rng_seed = seed_for(6, i);
        points.push_back({power, klyshko_efficiency(run_experiment(cfg, false))});
    }
    const LineFit fit = klyshko_intercept(points);
    const double error = fit.intercept - 0.2961;
    return {std::abs(error) < 0.005,
            fmt("intercept %.5f +/- %.5f, error %+.5f (< 0.005)", fit.intercept, fit.intercept_sigma, error)};
}

Verdict waveform_round_trip() {
    const fs::path dir = scratch("waveforms");
    ScenarioConfig c = shipped_config("fig2b_histogram", dir);
    c.num_traces = 300000;
    c.synthesize_traces = true;
    const RunManifest m = run_scenario(c);
    const double tv = summary(m, "tv_binned");
    const double tv_click = summary(m, "tv_click");
    fs::remove_all(dir);
    return {tv < 4e-3 && tv_click > 1.5e-2,
            fmt("%.0f traces, %.0f components: TV(binned) = %.3g (< 4e-3), TV(click) = %.3g (> 1.5e-2)",
                summary(m, "traces"), summary(m, "components"), tv, tv_click)};
}

Verdict confusion_cdf() {
    GaussianMixture mixture;
    mixture.components = {{1000.0, 0.0, 1.0}, {1000.0, 2.0, 1.0}};
    mixture.total_mass = 2000.0;
    BinEdges edges;
    edges.edges = {1.0};
    edges.fallback = {false};
    const ConfusionMatrix conf = confusion_from_mixture(mixture, edges);
    const double p = conf(2, 1);
    const double oracle = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
    return {std::abs(p - 0.1587) <= 0.0005,
            fmt("P(1|2) = %.6f (0.1587 +/- 0.0005, normal CDF %.6f)", p, oracle)};
}

Verdict sweep_shape() {
    const fs::path dir = scratch("sweep");
    const ScenarioConfig c = shipped_config("fig3b_sweep", dir);
    const RunManifest m = run_scenario(c);
    const DataTable t = load_csv(dir / "fig3b_sweep.csv");
    fs::remove_all(dir);
    const auto edge = t.column("edge_mV_per_ns");
    const auto kept = t.column("retained_fraction");
    const auto g2 = t.column("g2");
    const auto sig = t.column("g2_sigma");
    if (t.size() < 2) return {false, fmt("only %zu sweep rows", t.size())};
    int not_decreasing = 0;
    int rising = 0;
    for (std::size_t r = 1; r < t.size(); ++r) {
        // Row r - 1 is the tighter edge.
        if (!(t.number(r - 1, edge) < t.number(r, edge))) return {false, "edges not ascending"};
        if (!(t.number(r - 1, kept) < t.number(r, kept))) ++not_decreasing;
        if (t.number(r - 1, g2) > t.number(r, g2) + 3.0 * t.number(r - 1, sig)) ++rising;
    }
    const std::size_t loose = t.size() - 1;
    const double g2_loose = t.number(loose, g2);
    const double g2_ref = summary(m, "g2_unfiltered");
    const double tol = 3.0 * std::hypot(t.number(loose, sig), summary(m, "g2_unfiltered_sigma"));
    const bool converges = std::abs(g2_loose - g2_ref) <= tol;
    return {not_decreasing == 0 && rising == 0 && converges,
            fmt("%zu edges: %d retained-fraction steps not strictly decreasing, %d g2 rises beyond 3 sigma; "
                "loose-end g2 %.4f vs unfiltered %.4f (tol %.4f)",
                t.size(), not_decreasing, rising, g2_loose, g2_ref, tol)};
}

Verdict determinism() {
    int compared = 0;
    std::vector<std::string> mismatched;
    for (const char *name : {"fig3a_curves", "fig3a_points", "fig3b_sweep", "fig4_surface", "fig2b_histogram",
                             "klyshko_calibration", "custom"}) {
        const fs::path a = scratch(std::string(name) + "_a");
        const fs::path b = scratch(std::string(name) + "_b");
        const RunManifest ma = run_scenario(shipped_config(name, a));
        ScenarioConfig cb = shipped_config(name, b);
        cb.threads = 2;
        const RunManifest mb = run_scenario(cb);
        std::map<std::string, std::string> sums;
        for (const auto &o : ma.outputs) sums[o.file] = o.checksum;
        for (const auto &o : mb.outputs) {
            if (o.file.ends_with(".svg")) continue;
            ++compared;
            if (sums[o.file] != o.checksum) mismatched.push_back(o.file);
        }
        if (ma.config_hash != mb.config_hash) mismatched.push_back(std::string(name) + " config hash");
        fs::remove_all(a);
        fs::remove_all(b);
    }
    std::string detail = fmt("%d CSV/JSON files over 7 scenarios, reruns at 1 and 2 threads: %zu mismatches",
                             compared, mismatched.size());
    for (const auto &f : mismatched) detail += " " + f;
    return {mismatched.empty() && compared > 0, detail};
}

struct Criterion {
    int id;
    const char *name;
    double budget_s;  // <= 0 means no runtime bound
    std::function<Verdict()> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "ideal_pnr_zero", 1.0, ideal_pnr_zero},
        {2, "improvement_ratio_anchor", 1.0, ratio_anchor},
        {3, "curve_ordering", 5.0, curve_ordering},
        {4, "monte_carlo_vs_analytic", 120.0, monte_carlo_agreement},
        {5, "g2_reduction_bracket", 60.0, reduction_bracket},
        {6, "klyshko_intercept", 300.0, klyshko_intercept_recovery},
        {7, "waveform_round_trip", 300.0, waveform_round_trip},
        {8, "confusion_cdf", 1.0, confusion_cdf},
        {9, "threshold_sweep_shape", 120.0, sweep_shape},
        {10, "determinism", 0.0, determinism},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception &e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.budget_s <= 0.0 || secs < c.budget_s;
        const bool pass = v.passed && in_time;
        if (!pass) ++failed;
        std::string timing = fmt("%.2f s", secs);
        if (c.budget_s > 0.0) timing += fmt(" (budget %.0f s)", c.budget_s);
        std::printf("%s %2d %s: %s; %s\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
