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

// Detector-pulse analysis: waveform synthesis, rising-edge slope extraction,
// sum-of-Gaussians binning of the slope histogram, confusion estimation and
// the herald discrimination-threshold sweep.
//
// Units: voltages in mV, times in ps for sampling, slopes in mV/ns.

#ifndef HERALDSIM_TRACE_LAB_HPP
#define HERALDSIM_TRACE_LAB_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heraldsim/confusion.hpp"
#include "heraldsim/mc_experiment.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

/// Uniformly sampled detector waveform.
struct Trace {
    Eigen::VectorXd samples;      // mV
    double dt_ps = 40.0;
    std::optional<int> label;     // true photon number, synthetic traces only

    /// >= 2 samples, dt > 0, all samples finite.
    void validate() const;
};

struct TraceSynthConfig {
    double rise_time_ps = 400.0;       // shortest edge duration among the modelled classes
    std::vector<double> slope_means{0.40, 0.75, 1.10, 1.45};    // mV/ns, index n - 1
    std::vector<double> slope_sigmas{0.0625, 0.10, 0.11, 0.12};  // mV/ns
    double amplitude_mv = 0.0;         // 0 selects slope_means.back() * rise_time
    double noise_rms_mv = 0.0;
    double sample_rate_hz = 25e9;
    double pre_trigger_ps = 1000.0;
    double decay_time_ps = 3000.0;
    int samples_per_trace = 0;         // 0 sizes the record to hold the slowest edge

    double dt_ps() const { return 1e12 / sample_rate_hz; }
    double effective_amplitude() const;
    /// pre_trigger_ps, lengthened so at least the leading quarter of the record is baseline.
    double effective_pre_trigger_ps() const;
    int effective_samples() const;
    /// Mean and spread for photon number n; n beyond the table reuses the last entry.
    double slope_mean(int n) const;
    double slope_sigma(int n) const;

    /// Strictly increasing means, sigmas >= 0, at least 5 samples on the fastest edge.
    void validate() const;
};

/// Linear rise (slope ~ Normal(mean_n, sigma_n)) from a zero baseline up to the
/// amplitude, exponential tail, additive white noise. The edge start carries a
/// random sub-sample phase.
Trace synthesize_trace(const TraceSynthConfig &config, int photon_number, StreamRng &rng);

/// Batch synthesis; trace i draws from stream (seed, i).
std::vector<Trace> synthesize_traces(const TraceSynthConfig &config,
                                     std::span<const int> photon_numbers, std::uint64_t seed,
                                     int threads = 1);

struct SlopeOptions {
    double lower_frac = 0.10;
    double upper_frac = 0.60;
    double baseline_frac = 0.20;   // leading fraction of the record used for the baseline
    double min_edge_height = 0.0;  // mV; 0 selects 8x the baseline noise estimate
};

struct SlopeSample {
    double slope = 0.0;             // mV/ns
    double fit_intercept = 0.0;     // mV, at t = 0 of the record
    double fit_residual_rms = 0.0;  // mV
    std::int64_t source_trace_id = -1;
    int points_used = 0;
};

/// Straight-line fit to the first rising edge between the lower and upper
/// fractional levels of the baseline-to-peak range. Throws ComputeError on a
/// missing edge or fewer than 3 points in the window.
SlopeSample extract_slope(const Trace &trace, const SlopeOptions &options = {},
                          std::int64_t trace_id = -1);

/// Slopes for every trace; traces without a usable edge are skipped and their
/// ids reported in `rejected`.
struct SlopeBatch {
    std::vector<SlopeSample> slopes;
    std::vector<std::int64_t> rejected;
};
SlopeBatch extract_slopes(std::span<const Trace> traces, const SlopeOptions &options = {},
                          int threads = 1);

struct Histogram {
    double origin = 0.0;
    double bin_width = 1.0;
    Eigen::VectorXd counts;

    Eigen::Index size() const { return counts.size(); }
    double center(Eigen::Index i) const { return origin + (static_cast<double>(i) + 0.5) * bin_width; }
    double total() const { return counts.sum(); }
};

/// Freedman-Diaconis bin width 2 IQR n^(-1/3) over [min, max].
Histogram make_histogram(std::span<const double> values, std::optional<double> bin_width = {});

struct GaussianComponent {
    double weight = 0.0;  // number of samples under the component
    double mean = 0.0;
    double sigma = 0.0;

    /// weight * N(x; mean, sigma)
    double density(double x) const;
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;  // strictly increasing means
    double total_mass = 0.0;                    // samples in the fitted data
    double fit_quality = 0.0;                   // reduced chi-square on the histogram
    Histogram histogram;

    int size() const { return static_cast<int>(components.size()); }
    double density(double x) const;
};

enum class MixtureBackend { kHistogramLeastSquares, kExpectationMaximization };

struct MixtureOptions {
    std::optional<int> num_components;  // empty selects automatic peak counting
    MixtureBackend backend = MixtureBackend::kHistogramLeastSquares;
    std::size_t min_samples = 100;
    std::optional<double> bin_width;    // default Freedman-Diaconis
    int max_iterations = 300;
};

/// Peak centres of the smoothed histogram that are prominent above counting
/// noise and survive a coarser smoothing scale.
std::vector<double> detect_peaks(const Histogram &histogram);

GaussianMixture fit_mixture(std::span<const double> slopes, const MixtureOptions &options = {});
GaussianMixture fit_mixture(std::span<const SlopeSample> slopes, const MixtureOptions &options = {});

struct BinEdges {
    std::vector<double> edges;      // strictly increasing
    std::vector<bool> fallback;     // true where no density crossing existed between the means

    int num_classes() const { return static_cast<int>(edges.size()) + 1; }
};

/// Edge k is where weight_k N_k(x) = weight_{k+1} N_{k+1}(x) between the two
/// means. With two crossings the one nearer the mixture valley is taken; with
/// none, the equal-Mahalanobis point is used and flagged.
BinEdges compute_bin_edges(const GaussianMixture &mixture);

/// Closed-right bins: a slope in (edge_{k-1}, edge_k] gets photon number k, the
/// first bin also takes everything at or below edge_1, the last everything above.
std::vector<int> assign_photon_numbers(std::span<const double> slopes, const BinEdges &edges);

/// P(report m | true n) from the normal CDF of each component over each bin,
/// rows renormalized over the resolved range (at most `max_resolved` classes).
ConfusionMatrix confusion_from_mixture(const GaussianMixture &mixture, const BinEdges &edges,
                                       int max_resolved = 4);

/// D(p, q) = 1/2 sum |p_i - q_i|; the shorter input is zero padded.
double total_variation_distance(std::span<const double> p, std::span<const double> q);
double total_variation_distance(const PhotonDistribution &p, const PhotonDistribution &q);

/// Normalized histogram of integer labels over 0..max_label.
Eigen::VectorXd label_distribution(std::span<const int> labels, int max_label);

/// One herald trace with the signal-arm outcome of the same pulse.
struct SweepEvent {
    double slope = 0.0;
    bool d1_click = false;
    bool d2_click = false;
};

struct SweepPoint {
    double edge = 0.0;
    double g2 = 0.0;
    double g2_sigma = 0.0;
    double retained_fraction = 0.0;
    std::uint64_t accepted = 0;
};

/// For each candidate edge, accepts heralds with slope <= edge and evaluates the
/// coincidence g2 and the fraction of herald events kept. Throws ComputeError
/// when an edge accepts no events (or no twofold coincidences).
std::vector<SweepPoint> threshold_sweep(std::span<const SweepEvent> events,
                                        std::span<const double> edges);

/// `steps` evenly spaced edges from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int steps);

}  // namespace heraldsim

#endif  // HERALDSIM_TRACE_LAB_HPP
