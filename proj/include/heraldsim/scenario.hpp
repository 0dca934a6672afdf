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

// Configuration-driven scenario runs: analytic curves, Monte Carlo points,
// threshold sweeps, the improvement-ratio surface, slope histograms and
// Klyshko calibration, each written as CSV/JSON tables plus SVG figures and a
// JSON run manifest.

#ifndef HERALDSIM_SCENARIO_HPP
#define HERALDSIM_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heraldsim/data_table.hpp"
#include "heraldsim/mc_experiment.hpp"
#include "heraldsim/trace_lab.hpp"

namespace heraldsim {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

enum class ScenarioKind {
    kFig3aCurves,
    kFig3aPoints,
    kFig3bSweep,
    kFig4Surface,
    kFig2bHistogram,
    kKlyshkoCalibration,
    kCustom,
};

std::string_view to_string(ScenarioKind kind);
/// Throws ConfigError for unknown names.
ScenarioKind scenario_from_string(std::string_view name);

enum class OutputFormat { kCsv, kJson };

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::kCustom;
    std::uint64_t seed = 1;
    int threads = 1;

    // Source. Either lambda_sq directly, or pump powers mapped through lambda^2 = slope * power.
    std::vector<double> lambda_sq;
    std::vector<double> pump_power;
    double pump_slope = 0.0;
    double eta_signal = 1.0;
    double eta_d1 = 1.0;
    double eta_d2 = 1.0;
    double dark_click_prob = 0.0;
    int fock_cutoff = 0;  // 0 picks a cutoff whose thermal tail is below 1e-12

    // Herald arm.
    std::vector<double> eta_herald;
    std::vector<HeraldDetector> detectors;  // curves and Monte Carlo runs
    std::optional<ConfusionMatrix> confusion;

    std::uint64_t shots = 100000;  // per grid point

    // Waveform pipeline.
    TraceSynthConfig synth;
    SlopeOptions slope;
    MixtureOptions mixture;
    std::uint64_t num_traces = 100000;
    bool synthesize_traces = true;  // false draws slopes directly from the class Gaussians
    std::vector<double> sweep_edges;
    bool write_slopes = true;

    // Improvement-ratio calibration against a target reduction.
    std::vector<double> calibration_lambda_sq;
    double target_reduction = 0.13;

    std::filesystem::path out_dir = "out";
    std::vector<OutputFormat> formats{OutputFormat::kCsv};
    bool plots = true;

    /// Squeezing grid in lambda^2, from lambda_sq or the pump-power list.
    std::vector<double> squeezing_grid() const;
    /// Throws ConfigError when a parameter leaves its domain or the scenario lacks inputs.
    void validate() const;
    /// Files the scenario writes, relative to out_dir, manifest excluded.
    std::vector<std::string> expected_outputs() const;
    /// Stable JSON rendering of every field that affects the data outputs.
    std::string canonical_json() const;
};

/// TOML document; `origin` names the source in error messages. Throws ConfigError.
ScenarioConfig parse_scenario_config(std::string_view text, const std::string &origin = "config");
/// Throws IoError when unreadable, ConfigError when invalid.
ScenarioConfig load_scenario_config(const std::filesystem::path &path);

struct OutputRecord {
    std::string file;      // relative to the output directory
    std::string checksum;  // FNV-1a 64, hex
    std::uint64_t bytes = 0;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct RunManifest {
    std::string scenario;
    std::string version{kArtifactVersion};
    std::string config_hash;  // FNV-1a 64 of canonical_json()
    std::string config_json;
    std::vector<std::uint64_t> seeds;
    int threads = 1;
    std::vector<OutputRecord> outputs;
    std::vector<std::pair<std::string, double>> timings_s;
    std::vector<std::pair<std::string, double>> summary;
    std::vector<CheckResult> checks;

    bool passed() const;
    std::string to_json() const;
};

std::string fnv1a64_hex(std::string_view bytes);

/// Writes the scenario outputs and manifest.json under config.out_dir. When an
/// agreement check fails the outputs and manifest are still written, then a
/// ComputeError is thrown.
RunManifest run_scenario(const ScenarioConfig &config);

}  // namespace heraldsim

#endif  // HERALDSIM_SCENARIO_HPP
