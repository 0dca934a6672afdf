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
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "heraldsim/error.hpp"
#include "heraldsim/plot.hpp"
#include "heraldsim/scenario.hpp"
#include "heraldsim/trace_io.hpp"
#include "parallel.hpp"

namespace heraldsim {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOutlierZ = 4.0;
constexpr double kOutlierBudget = 0.01;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

FockTruncation truncation_for(const ScenarioConfig &c, const SqueezingParam &sq) {
    if (c.fock_cutoff > 0) {
        FockTruncation t{c.fock_cutoff};
        t.require_covers(sq);
        return t;
    }
    return FockTruncation::sufficient_for(sq);
}

// POVM of the accepted herald outcome. Unfiltered runs accept any report >= 1,
// which is a click; filtered runs accept exactly one reported photon.
Povm herald_povm(const HeraldDetector &d, double eta, const FockTruncation &t, bool filtered) {
    if (!filtered) return povm_click(true, eta, t);
    switch (d.kind) {
        case HeraldDetector::Kind::kClick: return povm_click(true, eta, t);
        case HeraldDetector::Kind::kPseudoPnr: return povm_ppnr(1, eta, d.num_detectors, t);
        case HeraldDetector::Kind::kPnr:
            return d.confusion ? pnr_reported_povm(1, eta, *d.confusion, t) : povm_pnr(1, eta, t);
    }
    throw ConfigError("unknown detector kind");
}

ExperimentConfig experiment(const ScenarioConfig &c, double lambda_sq, double eta, const HeraldDetector &d,
                            std::uint64_t seed) {
    ExperimentConfig e;
    e.squeezing = SqueezingParam::from_lambda_sq(lambda_sq);
    e.eta_herald = eta;
    e.eta_signal = c.eta_signal;
    e.eta_d1 = c.eta_d1;
    e.eta_d2 = c.eta_d2;
    e.dark_click_prob = c.dark_click_prob;
    e.num_shots = c.shots;
    e.rng_seed = seed;
    e.herald = d;
    return e;
}

Cell number_or_sentinel(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

class Outputs {
  public:
    Outputs(const ScenarioConfig &c, RunManifest &m) : config_(c), manifest_(m) {}

    void table(const std::string &stem, const DataTable &t) {
        for (auto f : config_.formats) {
            if (f == OutputFormat::kCsv) {
                write(stem + ".csv", to_csv(t));
            } else {
                write(stem + ".json", to_json(t));
            }
        }
    }

    void plot(const DataTable &t, const PlotSpec &spec) {
        if (config_.plots) write(std::string(to_string(config_.scenario)) + ".svg", emit_plot(t, spec));
    }

    void write(const std::string &file, const std::string &content) {
        const auto path = config_.out_dir / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            throw IoError("failed writing " + path.string());
        }
        manifest_.outputs.push_back({file, fnv1a64_hex(content), content.size()});
    }

  private:
    const ScenarioConfig &config_;
    RunManifest &manifest_;
};

void run_fig3a_curves(const ScenarioConfig &c, Outputs &out, RunManifest &) {
    DataTable t("heraldsim.fig3a_curves/1", {"detector", "eta_h", "lambda_sq", "herald_probability", "g2"});
    for (const auto &d : c.detectors) {
        for (double eta : c.eta_herald) {
            for (double x : c.squeezing_grid()) {
                const auto sq = SqueezingParam::from_lambda_sq(x);
                const Povm povm = herald_povm(d, eta, truncation_for(c, sq), true);
                t.add_row({d.describe(), eta, x, herald_probability(sq, povm), g2_heralded(sq, povm)});
            }
        }
    }
    out.table("fig3a_curves", t);
    out.plot(t, plot_preset("fig3a_curves"));
}

struct PointStats {
    double rate = 0.0;
    double rate_model = 0.0;
    double rate_z = kNaN;
    G2Estimate g2;
    double g2_model = 0.0;
    double g2_z = kNaN;
};

PointStats point_stats(const CountRecord &rec, const SqueezingParam &sq, const Povm &povm) {
    PointStats s;
    const double n = static_cast<double>(rec.shots);
    s.rate = static_cast<double>(rec.herald_singles) / n;
    s.rate_model = herald_probability(sq, povm);
    if (s.rate_model > 0.0 && s.rate_model < 1.0) {
        s.rate_z = (s.rate - s.rate_model) / std::sqrt(s.rate_model * (1.0 - s.rate_model) / n);
    }
    s.g2 = g2_empirical(rec);
    s.g2_model = g2_heralded(sq, povm);
    // No threefold coincidences leaves the Poisson error at zero and z undefined.
    if (s.g2.sigma > 0.0) s.g2_z = (s.g2.value - s.g2_model) / s.g2.sigma;
    return s;
}

void run_fig3a_points(const ScenarioConfig &c, Outputs &out, RunManifest &m) {
    DataTable pts("heraldsim.fig3a_points/1",
                  {"detector", "eta_h", "lambda_sq", "mode", "shots", "heralds", "herald_rate",
                   "herald_rate_model", "herald_z", "g2", "g2_sigma", "g2_model", "g2_z"});
    DataTable ratio("heraldsim.fig3a_ratio/1",
                    {"detector", "eta_h", "lambda_sq", "ratio", "ratio_sigma", "ratio_model", "z"});
    std::uint64_t index = 0;
    std::size_t points = 0;
    std::size_t outliers = 0;
    std::size_t undefined = 0;
    for (const auto &d : c.detectors) {
        for (double eta : c.eta_herald) {
            for (double x : c.squeezing_grid()) {
                const std::uint64_t seed = derive_seed(c.seed, index++);
                m.seeds.push_back(seed);
                const auto cfg = experiment(c, x, eta, d, seed);
                const auto trunc = truncation_for(c, cfg.squeezing);
                const auto paired = run_experiment_paired(cfg, c.threads);
                PointStats s[2];
                for (int filtered = 0; filtered < 2; ++filtered) {
                    const auto &rec = filtered ? paired.filtered : paired.unfiltered;
                    s[filtered] = point_stats(rec, cfg.squeezing, herald_povm(d, eta, trunc, filtered));
                    const auto &p = s[filtered];
                    pts.add_row({d.describe(), eta, x, std::string(filtered ? "filtered" : "unfiltered"),
                                 static_cast<std::int64_t>(rec.shots), static_cast<std::int64_t>(rec.herald_singles),
                                 p.rate, p.rate_model, number_or_sentinel(p.rate_z), p.g2.value, p.g2.sigma,
                                 p.g2_model, number_or_sentinel(p.g2_z)});
                    ++points;
                    if (std::isnan(p.g2_z)) ++undefined;
                    if (std::abs(p.rate_z) > kOutlierZ || std::abs(p.g2_z) > kOutlierZ) ++outliers;
                }
                const G2Estimate paired_ratio = g2_ratio_paired(paired);
                const double r = paired_ratio.value;
                const double r_sigma = paired_ratio.sigma;
                const double r_model = s[1].g2_model / s[0].g2_model;
                ratio.add_row({d.describe(), eta, x, r, r_sigma, r_model,
                               number_or_sentinel(r_sigma > 0 ? (r - r_model) / r_sigma : kNaN)});
            }
        }
    }
    out.table("fig3a_points", pts);
    out.table("fig3a_ratio", ratio);
    out.plot(pts, plot_preset("fig3a_points"));
    const double fraction = points ? static_cast<double>(outliers) / static_cast<double>(points) : 0.0;
    m.summary.emplace_back("points", static_cast<double>(points));
    m.summary.emplace_back("z_outliers", static_cast<double>(outliers));
    m.summary.emplace_back("z_undefined", static_cast<double>(undefined));
    m.checks.push_back({"analytic_agreement", fraction <= kOutlierBudget,
                        std::to_string(outliers) + " of " + std::to_string(points) +
                            " points exceed |z| = 4 (budget 1%)"});
}

// Slope per herald event, from a synthesized waveform or straight from the
// class Gaussian. Empty when the waveform was rejected.
std::optional<SlopeSample> event_slope(const ScenarioConfig &c, int photons, std::uint64_t seed, std::uint64_t id) {
    StreamRng rng(seed, id);
    if (!c.synthesize_traces) {
        SlopeSample s;
        s.slope = rng.normal(c.synth.slope_mean(photons), c.synth.slope_sigma(photons));
        s.source_trace_id = static_cast<std::int64_t>(id);
        return s;
    }
    const Trace t = synthesize_trace(c.synth, photons, rng);
    try {
        return extract_slope(t, c.slope, static_cast<std::int64_t>(id));
    } catch (const ComputeError &) {
        return std::nullopt;
    }
}

void run_fig3b_sweep(const ScenarioConfig &c, Outputs &out, RunManifest &m) {
    const double x = c.squeezing_grid().front();
    const double eta = c.eta_herald.front();
    const std::uint64_t mc_seed = derive_seed(c.seed, 0);
    const std::uint64_t trace_seed = derive_seed(c.seed, 1);
    m.seeds = {mc_seed, trace_seed};
    const auto heralds = collect_herald_events(experiment(c, x, eta, HeraldDetector::pnr(), mc_seed), c.threads);
    const auto parts = detail::parallel_chunks<std::vector<std::optional<SweepEvent>>>(
        heralds.size(), c.threads, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<std::optional<SweepEvent>> local;
            local.reserve(end - begin);
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto &h = heralds[i];
                const auto s = event_slope(c, h.outcome.herald_photons_detected, trace_seed, h.shot_index);
                local.push_back(s ? std::optional<SweepEvent>(SweepEvent{s->slope, h.outcome.d1_click,
                                                                         h.outcome.d2_click})
                                  : std::nullopt);
            }
            return local;
        });
    std::vector<SweepEvent> events;
    std::size_t rejected = 0;
    for (const auto &p : parts) {
        for (const auto &e : p) {
            if (e) {
                events.push_back(*e);
            } else {
                ++rejected;
            }
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> loose{inf};
    const SweepPoint reference = threshold_sweep(events, loose).front();
    std::vector<double> edges = c.sweep_edges;
    std::sort(edges.begin(), edges.end());
    std::vector<SweepPoint> sweep;
    std::size_t skipped = 0;
    try {
        sweep = threshold_sweep(events, edges);
    } catch (const ComputeError &) {
        for (double e : edges) {
            try {
                sweep.push_back(threshold_sweep(events, std::span<const double>(&e, 1)).front());
            } catch (const ComputeError &) {
                ++skipped;
            }
        }
    }
    DataTable t("heraldsim.fig3b_sweep/1", {"edge_mV_per_ns", "g2", "g2_sigma", "retained_fraction", "accepted",
                                            "g2_unfiltered", "g2_unfiltered_sigma"});
    for (const auto &p : sweep) {
        t.add_row({p.edge, p.g2, p.g2_sigma, p.retained_fraction, static_cast<std::int64_t>(p.accepted),
                   reference.g2, reference.g2_sigma});
    }
    out.table("fig3b_sweep", t);
    out.plot(t, plot_preset("fig3b_sweep"));
    m.summary.emplace_back("herald_events", static_cast<double>(heralds.size()));
    m.summary.emplace_back("rejected_traces", static_cast<double>(rejected));
    m.summary.emplace_back("edges_without_data", static_cast<double>(skipped));
    m.summary.emplace_back("g2_unfiltered", reference.g2);
    m.summary.emplace_back("g2_unfiltered_sigma", reference.g2_sigma);
}

void run_fig4_surface(const ScenarioConfig &c, Outputs &out, RunManifest &) {
    DataTable t("heraldsim.fig4_surface/1", {"lambda_sq", "eta_h", "r"});
    for (double x : c.squeezing_grid()) {
        const auto sq = SqueezingParam::from_lambda_sq(x);
        const auto trunc = truncation_for(c, sq);
        for (double eta : c.eta_herald) {
            t.add_row({x, eta, number_or_sentinel(improvement_ratio(sq, eta, trunc))});
        }
    }
    out.table("fig4_surface", t);
    out.plot(t, plot_preset("fig4_surface"));
}

void run_fig2b_histogram(const ScenarioConfig &c, Outputs &out, RunManifest &m) {
    const double x = c.squeezing_grid().front();
    const double eta = c.eta_herald.front();
    const std::uint64_t mc_seed = derive_seed(c.seed, 0);
    const std::uint64_t trace_seed = derive_seed(c.seed, 1);
    m.seeds = {mc_seed, trace_seed};
    auto t0 = Clock::now();
    const auto labels =
        heralded_photon_numbers(experiment(c, x, eta, HeraldDetector::pnr(), mc_seed), c.num_traces, c.threads);
    m.timings_s.emplace_back("herald_events", seconds_since(t0));

    t0 = Clock::now();
    const auto parts = detail::parallel_chunks<std::vector<std::optional<SlopeSample>>>(
        labels.size(), c.threads, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<std::optional<SlopeSample>> local;
            local.reserve(end - begin);
            for (std::uint64_t i = begin; i < end; ++i) local.push_back(event_slope(c, labels[i], trace_seed, i));
            return local;
        });
    std::vector<SlopeSample> slopes;
    std::vector<int> kept_labels;
    std::size_t rejected = 0;
    std::size_t i = 0;
    for (const auto &p : parts) {
        for (const auto &s : p) {
            if (s) {
                slopes.push_back(*s);
                kept_labels.push_back(labels[i]);
            } else {
                ++rejected;
            }
            ++i;
        }
    }
    m.timings_s.emplace_back("slopes", seconds_since(t0));

    t0 = Clock::now();
    const GaussianMixture mixture = fit_mixture(std::span<const SlopeSample>(slopes), c.mixture);
    const BinEdges edges = compute_bin_edges(mixture);
    std::vector<double> values;
    values.reserve(slopes.size());
    for (const auto &s : slopes) values.push_back(s.slope);
    const auto assigned = assign_photon_numbers(values, edges);
    const ConfusionMatrix confusion = confusion_from_mixture(mixture, edges);
    m.timings_s.emplace_back("fit", seconds_since(t0));

    const Histogram &h = mixture.histogram;
    DataTable hist("heraldsim.fig2b_histogram/1", {"slope_mV_per_ns", "count", "fit_count"});
    for (Eigen::Index b = 0; b < h.size(); ++b) {
        hist.add_row({h.center(b), h.counts(b), mixture.density(h.center(b)) * h.bin_width});
    }
    DataTable comps("heraldsim.fig2b_mixture/1",
                    {"component", "weight", "mean", "sigma", "upper_edge", "edge_fallback"});
    for (int k = 0; k < mixture.size(); ++k) {
        const auto &g = mixture.components[k];
        const bool last = k + 1 == mixture.size();
        comps.add_row({static_cast<std::int64_t>(k + 1), g.weight, g.mean, g.sigma,
                       last ? Cell(std::string("inf")) : Cell(edges.edges[k]),
                       static_cast<std::int64_t>(!last && edges.fallback[k])});
    }
    DataTable conf("heraldsim.fig2b_confusion/1", {"true_n", "reported_n", "probability"});
    for (int truth = confusion.first_label(); truth <= confusion.last_label(); ++truth) {
        for (int rep = confusion.first_label(); rep <= confusion.last_label(); ++rep) {
            conf.add_row({static_cast<std::int64_t>(truth), static_cast<std::int64_t>(rep), confusion(truth, rep)});
        }
    }
    const int max_label = std::max(4, edges.num_classes());
    const Eigen::VectorXd truth = label_distribution(kept_labels, max_label);
    const Eigen::VectorXd binned = label_distribution(assigned, max_label);
    DataTable dist("heraldsim.fig2b_distribution/1", {"n", "true_fraction", "binned_fraction"});
    for (int n = 1; n <= max_label; ++n) {
        dist.add_row({static_cast<std::int64_t>(n), truth(n), binned(n)});
    }
    const double tv = total_variation_distance(std::span<const double>(truth.data(), truth.size()),
                                               std::span<const double>(binned.data(), binned.size()));
    out.table("fig2b_histogram", hist);
    out.table("fig2b_mixture", comps);
    out.table("fig2b_confusion", conf);
    out.table("fig2b_distribution", dist);
    if (c.write_slopes) {
        std::ostringstream s;
        write_slopes_csv(s, slopes, assigned);
        out.write("fig2b_slopes.csv", s.str());
    }
    out.plot(hist, plot_preset("fig2b_histogram"));
    m.summary.emplace_back("traces", static_cast<double>(labels.size()));
    m.summary.emplace_back("rejected_traces", static_cast<double>(rejected));
    m.summary.emplace_back("components", mixture.size());
    m.summary.emplace_back("fit_reduced_chi_square", mixture.fit_quality);
    m.summary.emplace_back("tv_binned", tv);
    m.summary.emplace_back("tv_click", 1.0 - truth(1));
    if (confusion.dim() >= 2) {
        m.summary.emplace_back("p_1_given_2", confusion(2, 1));
        m.summary.emplace_back("p_2_given_1", confusion(1, 2));
    }
}

// Linear interpolation of the first crossing of `target`, NaN when none.
double crossing(const std::vector<double> &x, const std::vector<double> &y, double target) {
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double a = y[i - 1] - target;
        const double b = y[i] - target;
        if (a == 0.0) return x[i - 1];
        if ((a < 0.0) != (b < 0.0)) return x[i - 1] + (x[i] - x[i - 1]) * a / (a - b);
    }
    return kNaN;
}

void run_klyshko(const ScenarioConfig &c, Outputs &out, RunManifest &m) {
    const double eta = c.eta_herald.front();
    DataTable pts("heraldsim.klyshko_points/1",
                  {"pump_power", "lambda_sq", "klyshko_estimate", "klyshko_sigma", "fit"});
    std::vector<PowerPoint> power_points;
    std::vector<double> sigmas;
    for (std::size_t i = 0; i < c.pump_power.size(); ++i) {
        const std::uint64_t seed = derive_seed(c.seed, i);
        m.seeds.push_back(seed);
        const double x = squeezing_from_pump(c.pump_power[i], c.pump_slope).lambda_sq();
        const CountRecord rec = run_experiment(experiment(c, x, eta, HeraldDetector::click(), seed), false, c.threads);
        const double k = klyshko_efficiency(rec);
        power_points.push_back({c.pump_power[i], k});
        sigmas.push_back(std::sqrt(k * (1.0 - k) / static_cast<double>(rec.singles_1 + rec.singles_2)));
    }
    const LineFit fit = klyshko_intercept(power_points);
    for (std::size_t i = 0; i < power_points.size(); ++i) {
        const double p = power_points[i].pump_power;
        pts.add_row({p, c.pump_slope * p, power_points[i].klyshko_estimate, sigmas[i], fit.intercept + fit.slope * p});
    }
    DataTable fit_table("heraldsim.klyshko_fit/1",
                        {"eta_h_configured", "intercept", "intercept_sigma", "slope", "slope_sigma"});
    fit_table.add_row({eta, fit.intercept, fit.intercept_sigma, fit.slope, fit.slope_sigma});

    std::vector<double> grid = c.calibration_lambda_sq;
    if (grid.empty()) {
        for (double e : linspace(-3.0, std::log10(0.3), 41)) grid.push_back(std::pow(10.0, e));
    }
    DataTable calib("heraldsim.reduction_calibration/1", {"eta_h", "lambda_sq", "ratio_model", "reduction"});
    const HeraldDetector pnr = HeraldDetector::pnr(c.confusion);
    for (double e : c.eta_herald) {
        std::vector<double> reductions;
        for (double x : grid) {
            const auto sq = SqueezingParam::from_lambda_sq(x);
            const auto trunc = truncation_for(c, sq);
            const double r = g2_heralded(sq, herald_povm(pnr, e, trunc, true)) /
                             g2_heralded(sq, herald_povm(pnr, e, trunc, false));
            calib.add_row({e, x, r, 1.0 - r});
            reductions.push_back(1.0 - r);
        }
        m.summary.emplace_back("lambda_sq_at_target_eta_" + format_number(e),
                               crossing(grid, reductions, c.target_reduction));
    }
    out.table("klyshko_points", pts);
    out.table("klyshko_fit", fit_table);
    out.table("reduction_calibration", calib);
    out.plot(pts, plot_preset("klyshko_calibration"));
    m.summary.emplace_back("intercept", fit.intercept);
    m.summary.emplace_back("intercept_sigma", fit.intercept_sigma);
    m.summary.emplace_back("intercept_error", fit.intercept - eta);
}

void run_custom(const ScenarioConfig &c, Outputs &out, RunManifest &m) {
    DataTable t("heraldsim.custom/1",
                {"detector", "eta_h", "lambda_sq", "shots", "herald_rate", "herald_rate_model", "g2_unfiltered",
                 "g2_unfiltered_sigma", "g2_unfiltered_model", "g2_filtered", "g2_filtered_sigma",
                 "g2_filtered_model", "klyshko"});
    std::uint64_t index = 0;
    for (const auto &d : c.detectors) {
        for (double eta : c.eta_herald) {
            for (double x : c.squeezing_grid()) {
                const std::uint64_t seed = derive_seed(c.seed, index++);
                m.seeds.push_back(seed);
                const auto cfg = experiment(c, x, eta, d, seed);
                const auto trunc = truncation_for(c, cfg.squeezing);
                const auto paired = run_experiment_paired(cfg, c.threads);
                const auto u = point_stats(paired.unfiltered, cfg.squeezing, herald_povm(d, eta, trunc, false));
                const auto f = point_stats(paired.filtered, cfg.squeezing, herald_povm(d, eta, trunc, true));
                t.add_row({d.describe(), eta, x, static_cast<std::int64_t>(c.shots), u.rate, u.rate_model,
                           u.g2.value, u.g2.sigma, u.g2_model, f.g2.value, f.g2.sigma, f.g2_model,
                           klyshko_efficiency(paired.unfiltered)});
            }
        }
    }
    out.table("custom", t);
}

nlohmann::ordered_json number_json(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(format_number(v));
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool RunManifest::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["artifact"] = "heraldsim";
    j["version"] = version;
    j["scenario"] = scenario;
    j["config_hash"] = config_hash;
    j["config"] = nlohmann::ordered_json::parse(config_json);
    j["seeds"] = seeds;
    j["threads"] = threads;
    auto outs = nlohmann::ordered_json::array();
    for (const auto &o : outputs) outs.push_back({{"file", o.file}, {"fnv1a64", o.checksum}, {"bytes", o.bytes}});
    j["outputs"] = outs;
    auto times = nlohmann::ordered_json::object();
    for (const auto &[k, v] : timings_s) times[k] = v;
    j["timings_s"] = times;
    auto summ = nlohmann::ordered_json::object();
    for (const auto &[k, v] : summary) summ[k] = number_json(v);
    j["summary"] = summ;
    auto checks_json = nlohmann::ordered_json::array();
    for (const auto &c : checks) checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks_json;
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

RunManifest run_scenario(const ScenarioConfig &config) {
    config.validate();
    const auto t0 = Clock::now();
    RunManifest m;
    m.scenario = std::string(to_string(config.scenario));
    m.config_json = config.canonical_json();
    m.config_hash = fnv1a64_hex(m.config_json);
    m.threads = config.threads;
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec || !std::filesystem::is_directory(config.out_dir)) {
        throw IoError("cannot create output directory " + config.out_dir.string() +
                      (ec ? ": " + ec.message() : std::string()));
    }
    Outputs out(config, m);
    switch (config.scenario) {
        case ScenarioKind::kFig3aCurves: run_fig3a_curves(config, out, m); break;
        case ScenarioKind::kFig3aPoints: run_fig3a_points(config, out, m); break;
        case ScenarioKind::kFig3bSweep: run_fig3b_sweep(config, out, m); break;
        case ScenarioKind::kFig4Surface: run_fig4_surface(config, out, m); break;
        case ScenarioKind::kFig2bHistogram: run_fig2b_histogram(config, out, m); break;
        case ScenarioKind::kKlyshkoCalibration: run_klyshko(config, out, m); break;
        case ScenarioKind::kCustom: run_custom(config, out, m); break;
    }
    if (m.seeds.empty()) m.seeds.push_back(config.seed);
    m.timings_s.emplace_back("total", seconds_since(t0));
    out.write("manifest.json", m.to_json());
    m.outputs.pop_back();
    if (!m.passed()) {
        std::string failed;
        for (const auto &c : m.checks) {
            if (!c.passed) failed += (failed.empty() ? "" : "; ") + c.name + ": " + c.detail;
        }
        throw ComputeError("scenario check failed: " + failed);
    }
    return m;
}

}  // namespace heraldsim
