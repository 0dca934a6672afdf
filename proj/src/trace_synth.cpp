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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heraldsim/error.hpp"
#include "heraldsim/trace_lab.hpp"
#include "parallel.hpp"

namespace heraldsim {

void Trace::validate() const {
    if (samples.size() < 2) {
        throw ConfigError("trace needs at least two samples");
    }
    if (!(dt_ps > 0.0) || !std::isfinite(dt_ps)) {
        throw ConfigError("trace time step must be positive");
    }
    if (!samples.allFinite()) {
        throw ConfigError("trace contains non-finite samples");
    }
}

double TraceSynthConfig::effective_amplitude() const {
    if (amplitude_mv > 0.0) {
        return amplitude_mv;
    }
    return slope_means.empty() ? 0.0 : slope_means.back() * rise_time_ps * 1e-3;
}

double TraceSynthConfig::slope_mean(int n) const {
    return slope_means[std::min<std::size_t>(n - 1, slope_means.size() - 1)];
}

double TraceSynthConfig::slope_sigma(int n) const {
    return slope_sigmas[std::min<std::size_t>(n - 1, slope_sigmas.size() - 1)];
}

namespace {

double pulse_span_ps(const TraceSynthConfig &c) {
    const double slowest =
        std::max(c.slope_means.front() - 3.0 * c.slope_sigmas.front(), 0.25 * c.slope_means.front());
    return 1.5 * c.effective_amplitude() / slowest * 1e3 + c.decay_time_ps;
}

}  // namespace

double TraceSynthConfig::effective_pre_trigger_ps() const {
    return std::max(pre_trigger_ps, pulse_span_ps(*this) / 3.0);
}

int TraceSynthConfig::effective_samples() const {
    if (samples_per_trace > 0) {
        return samples_per_trace;
    }
    return static_cast<int>(std::ceil((effective_pre_trigger_ps() + pulse_span_ps(*this)) / dt_ps()));
}

void TraceSynthConfig::validate() const {
    if (slope_means.empty() || slope_means.size() != slope_sigmas.size()) {
        throw ConfigError("slope_means and slope_sigmas must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < slope_means.size(); ++i) {
        if (!(slope_means[i] > 0.0)) throw ConfigError("slope means must be positive");
        if (i > 0 && !(slope_means[i] > slope_means[i - 1])) {
            throw ConfigError("slope means must be strictly increasing in photon number");
        }
        if (!(slope_sigmas[i] >= 0.0)) throw ConfigError("slope sigmas must be non-negative");
    }
    if (!(sample_rate_hz > 0.0) || !(rise_time_ps > 0.0) || !(decay_time_ps > 0.0) ||
        !(pre_trigger_ps >= 0.0) || !(noise_rms_mv >= 0.0) || amplitude_mv < 0.0) {
        throw ConfigError("trace timing, amplitude and noise parameters must be positive");
    }
    const double fastest_edge_samples =
        effective_amplitude() / slope_means.back() * 1e3 / dt_ps();
    if (fastest_edge_samples < 5.0) {
        std::ostringstream msg;
        msg << "fastest rising edge spans only " << fastest_edge_samples
            << " samples; at least 5 are required";
        throw ConfigError(msg.str());
    }
    if (effective_samples() < 2) {
        throw ConfigError("trace record too short");
    }
}

Trace synthesize_trace(const TraceSynthConfig &config, int photon_number, StreamRng &rng) {
    if (photon_number < 1) {
        throw ConfigError("synthetic traces need photon_number >= 1");
    }
    const double dt = config.dt_ps();
    const double amplitude = config.effective_amplitude();
    const double floor_slope = 0.05 * config.slope_means.front();
    const double slope =
        std::max(rng.normal(config.slope_mean(photon_number), config.slope_sigma(photon_number)),
                 floor_slope);
    const double t0 = config.effective_pre_trigger_ps() + rng.uniform() * dt;
    const double t_peak = t0 + amplitude / slope * 1e3;

    Trace trace;
    trace.dt_ps = dt;
    trace.label = photon_number;
    const int n = config.effective_samples();
    trace.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        double v = 0.0;
        if (t >= t_peak) {
            v = amplitude * std::exp(-(t - t_peak) / config.decay_time_ps);
        } else if (t >= t0) {
            v = slope * (t - t0) * 1e-3;
        }
        if (config.noise_rms_mv > 0.0) {
            v += config.noise_rms_mv * rng.normal();
        }
        trace.samples(i) = v;
    }
    return trace;
}

std::vector<Trace> synthesize_traces(const TraceSynthConfig &config,
                                     std::span<const int> photon_numbers, std::uint64_t seed,
                                     int threads) {
    config.validate();
    auto parts = detail::parallel_chunks<std::vector<Trace>>(
        photon_numbers.size(), threads, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<Trace> local;
            local.reserve(end - begin);
            for (std::uint64_t i = begin; i < end; ++i) {
                StreamRng rng(seed, i);
                local.push_back(synthesize_trace(config, photon_numbers[i], rng));
            }
            return local;
        });
    std::vector<Trace> traces;
    traces.reserve(photon_numbers.size());
    for (auto &p : parts) {
        std::move(p.begin(), p.end(), std::back_inserter(traces));
    }
    return traces;
}

namespace {

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) {
        return *mid;
    }
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

SlopeSample extract_slope(const Trace &trace, const SlopeOptions &options, std::int64_t trace_id) {
    trace.validate();
    if (!(options.lower_frac >= 0.0 && options.lower_frac < options.upper_frac &&
          options.upper_frac <= 1.0)) {
        throw ConfigError("slope window needs 0 <= lower_frac < upper_frac <= 1");
    }
    const Eigen::Index n = trace.samples.size();
    const Eigen::Index n_base =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(options.baseline_frac * n));
    std::vector<double> head(trace.samples.data(), trace.samples.data() + n_base);
    const double baseline = median(head);
    for (double &v : head) v = std::abs(v - baseline);
    const double noise = 1.4826 * median(head);

    Eigen::Index peak_index = 0;
    const double peak = trace.samples.maxCoeff(&peak_index);
    const double range = peak - baseline;
    const double threshold =
        options.min_edge_height > 0.0 ? options.min_edge_height : std::max(8.0 * noise, 1e-12);
    if (!(range > threshold)) {
        throw ComputeError("no edge found: peak does not clear the baseline threshold");
    }

    const double lo = baseline + options.lower_frac * range;
    const double hi = baseline + options.upper_frac * range;
    Eigen::Index start = peak_index;
    while (start > 0 && trace.samples(start - 1) >= lo) --start;
    if (start == 0) {
        throw ComputeError("no edge found: rising edge starts before the record");
    }

    std::vector<Eigen::Index> window;
    for (Eigen::Index i = start; i < peak_index && trace.samples(i) <= hi; ++i) {
        window.push_back(i);
    }
    if (window.size() < 3) {
        std::ostringstream msg;
        msg << "too few points on the rising edge (" << window.size() << " < 3)";
        throw ComputeError(msg.str());
    }

    const Eigen::Index m = static_cast<Eigen::Index>(window.size());
    Eigen::VectorXd t(m), v(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        t(k) = static_cast<double>(window[k]) * trace.dt_ps * 1e-3;  // ns
        v(k) = trace.samples(window[k]);
    }
    const double t_mean = t.mean();
    const double v_mean = v.mean();
    const Eigen::VectorXd tc = t.array() - t_mean;
    const double slope = tc.dot((v.array() - v_mean).matrix()) / tc.squaredNorm();
    const double intercept = v_mean - slope * t_mean;
    const Eigen::ArrayXd resid = v.array() - (slope * t.array() + intercept);

    SlopeSample out;
    out.slope = slope;
    out.fit_intercept = intercept;
    out.fit_residual_rms = std::sqrt(resid.square().mean());
    out.source_trace_id = trace_id;
    out.points_used = static_cast<int>(m);
    return out;
}

SlopeBatch extract_slopes(std::span<const Trace> traces, const SlopeOptions &options, int threads) {
    auto parts = detail::parallel_chunks<SlopeBatch>(
        traces.size(), threads, [&](std::uint64_t begin, std::uint64_t end) {
            SlopeBatch local;
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto id = static_cast<std::int64_t>(i);
                try {
                    local.slopes.push_back(extract_slope(traces[i], options, id));
                } catch (const ComputeError &) {
                    local.rejected.push_back(id);
                }
            }
            return local;
        });
    SlopeBatch batch;
    for (auto &p : parts) {
        batch.slopes.insert(batch.slopes.end(), p.slopes.begin(), p.slopes.end());
        batch.rejected.insert(batch.rejected.end(), p.rejected.begin(), p.rejected.end());
    }
    return batch;
}

}  // namespace heraldsim
