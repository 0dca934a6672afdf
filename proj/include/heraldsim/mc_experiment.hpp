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

// Shot-level Monte Carlo of a heralded source with a Hanbury-Brown-Twiss
// signal arm: thermal pair generation, lumped binomial losses, herald
// detection under a chosen detector model, and a 50:50 split onto two click
// detectors. Also hosts the coincidence-based estimators.

#ifndef HERALDSIM_MC_EXPERIMENT_HPP
#define HERALDSIM_MC_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heraldsim/confusion.hpp"
#include "heraldsim/photon_stats.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

struct HeraldDetector {
    enum class Kind { kClick, kPseudoPnr, kPnr };

    Kind kind = Kind::kClick;
    int num_detectors = 1;                   // M, pseudo-PNR only
    std::optional<ConfusionMatrix> confusion;  // PNR only

    static HeraldDetector click() { return {}; }
    static HeraldDetector pseudo_pnr(int num_detectors) {
        return {Kind::kPseudoPnr, num_detectors, std::nullopt};
    }
    static HeraldDetector pnr(std::optional<ConfusionMatrix> confusion = std::nullopt) {
        return {Kind::kPnr, 1, std::move(confusion)};
    }

    std::string describe() const;
};

struct ExperimentConfig {
    SqueezingParam squeezing = SqueezingParam::from_lambda(0.0);
    double eta_herald = 1.0;  // lumped herald-arm efficiency
    double eta_signal = 1.0;  // lumped signal-arm efficiency up to the splitter
    double eta_d1 = 1.0;
    double eta_d2 = 1.0;
    std::uint64_t num_shots = 1;
    std::uint64_t rng_seed = 0;
    HeraldDetector herald;
    double dark_click_prob = 0.0;  // per pulse, signal detectors only

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

/// lambda^2 = slope * pump_power.
SqueezingParam squeezing_from_pump(double pump_power, double slope);

struct ShotOutcome {
    int pairs_generated = 0;
    int herald_photons_detected = 0;
    int herald_report = 0;
    bool d1_click = false;
    bool d2_click = false;

    friend bool operator==(const ShotOutcome &, const ShotOutcome &) = default;
};

/// Coincidence tallies of one run. Merging is associative and commutative.
struct CountRecord {
    std::uint64_t shots = 0;
    std::uint64_t herald_singles = 0;  // S_h, accepted herald events
    std::uint64_t coinc_1h = 0;        // C_1h
    std::uint64_t coinc_2h = 0;        // C_2h
    std::uint64_t coinc_12h = 0;       // C_12h
    std::uint64_t singles_1 = 0;       // S_1, regardless of herald
    std::uint64_t singles_2 = 0;       // S_2
    std::uint64_t herald_multi = 0;    // herald reports > 1 discarded by filtering

    /// Tallies one shot. See run_experiment for the herald acceptance rule.
    void add_shot(const ShotOutcome &shot, bool filter_multiphoton);

    CountRecord &operator+=(const CountRecord &other);
    friend CountRecord operator+(CountRecord a, const CountRecord &b) { return a += b; }
    friend bool operator==(const CountRecord &, const CountRecord &) = default;

    /// C_12h <= min(C_1h, C_2h) <= S_h <= shots and S_1, S_2 <= shots.
    bool consistent() const;
};

/// One shot drawn from `rng`.
ShotOutcome run_shot(const ExperimentConfig &config, StreamRng &rng);

/// Shot `index` of the run, on its own stream derived from the config seed.
ShotOutcome run_shot(const ExperimentConfig &config, std::uint64_t index);

/// Aggregates `config.num_shots` shots. With `filter_multiphoton` only herald
/// reports equal to 1 count as heralds; otherwise any report >= 1 does.
CountRecord run_experiment(const ExperimentConfig &config, bool filter_multiphoton,
                           int threads = 1);

/// Filtered and unfiltered tallies of the same shots.
struct PairedCounts {
    CountRecord unfiltered;
    CountRecord filtered;
};

PairedCounts run_experiment_paired(const ExperimentConfig &config, int threads = 1);

/// A shot whose herald detector registered at least one photon.
struct HeraldEvent {
    std::uint64_t shot_index = 0;
    ShotOutcome outcome;
};

/// All shots with a detected herald photon, in shot order.
std::vector<HeraldEvent> collect_herald_events(const ExperimentConfig &config, int threads = 1);

/// Detected herald photon numbers (>= 1) of the first `count` heralded shots,
/// in shot order. Shots are drawn until enough heralds have occurred.
std::vector<int> heralded_photon_numbers(const ExperimentConfig &config, std::uint64_t count,
                                         int threads = 1);

struct G2Estimate {
    double value = 0.0;
    double sigma = 0.0;
};

/// g2 ≈ S_h C_12h / (C_1h C_2h), with first-order propagation of independent
/// Poisson errors sigma_N = sqrt(N). Correlations between the tallies are
/// ignored.
G2Estimate g2_empirical(const CountRecord &counts);

/// g2(filtered) / g2(unfiltered) of one paired run. The filtered heralds are a
/// subset of the unfiltered ones, so the error is propagated over independent
/// Poisson tallies of the disjoint outcome classes (d1 only, d2 only, both,
/// neither) of the accepted and the discarded heralds. Throws ComputeError when
/// either g2 is undefined or the records are not nested.
G2Estimate g2_ratio_paired(const PairedCounts &counts);

/// Klyshko herald efficiency (C_1h + C_2h) / (S_1 + S_2).
double klyshko_efficiency(const CountRecord &counts);

struct PowerPoint {
    double pump_power = 0.0;
    double klyshko_estimate = 0.0;
};

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_sigma = 0.0;  // from the residual-scaled OLS covariance
    double slope_sigma = 0.0;
};

/// Ordinary least-squares line through (pump power, Klyshko estimate); the
/// intercept is the squeezing-independent herald efficiency.
LineFit klyshko_intercept(std::span<const PowerPoint> points);

}  // namespace heraldsim

#endif  // HERALDSIM_MC_EXPERIMENT_HPP
