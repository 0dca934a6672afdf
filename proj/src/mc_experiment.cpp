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

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace heraldsim {

namespace {

void require_unit(double v, const char *name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << name << " must lie in [0, 1], got " << v;
        throw ConfigError(msg.str());
    }
}

int sample_report(const HeraldDetector &herald, int detected, StreamRng &rng) {
    switch (herald.kind) {
        case HeraldDetector::Kind::kClick:
            return detected > 0 ? 1 : 0;
        case HeraldDetector::Kind::kPseudoPnr: {
            // Balanced splitter tree: each detected photon lands in one of M bins.
            std::uint64_t occupied_mask = 0;
            std::vector<bool> occupied_wide;
            const int M = herald.num_detectors;
            if (M <= 64) {
                for (int i = 0; i < detected; ++i) occupied_mask |= 1ULL << rng.below(M);
                return __builtin_popcountll(occupied_mask);
            }
            occupied_wide.assign(M, false);
            for (int i = 0; i < detected; ++i) occupied_wide[rng.below(M)] = true;
            return static_cast<int>(std::count(occupied_wide.begin(), occupied_wide.end(), true));
        }
        case HeraldDetector::Kind::kPnr: {
            if (detected == 0 || !herald.confusion) {
                return detected;
            }
            const ConfusionMatrix &cm = *herald.confusion;
            const int row = cm.row_index(detected);
            double u = rng.uniform();
            for (int col = 0; col < cm.dim(); ++col) {
                u -= cm.matrix()(row, col);
                if (u < 0.0) return cm.first_label() + col;
            }
            // Rounding left a sliver of mass: take the last non-zero column.
            for (int col = cm.dim() - 1; col >= 0; --col) {
                if (cm.matrix()(row, col) > 0.0) return cm.first_label() + col;
            }
            return detected;
        }
    }
    return detected;
}

bool accepted_herald(int report, bool filter_multiphoton) {
    return filter_multiphoton ? report == 1 : report >= 1;
}

}  // namespace

std::string HeraldDetector::describe() const {
    switch (kind) {
        case Kind::kClick: return "click";
        case Kind::kPseudoPnr: return "ppnr(" + std::to_string(num_detectors) + ")";
        case Kind::kPnr: return confusion ? "pnr+confusion" : "pnr";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    require_unit(eta_herald, "eta_herald");
    require_unit(eta_signal, "eta_signal");
    require_unit(eta_d1, "eta_d1");
    require_unit(eta_d2, "eta_d2");
    if (num_shots < 1) {
        throw ConfigError("num_shots must be at least 1");
    }
    if (!(dark_click_prob >= 0.0 && dark_click_prob < 1.0)) {
        throw ConfigError("dark_click_prob must lie in [0, 1)");
    }
    if (herald.kind == HeraldDetector::Kind::kPseudoPnr && herald.num_detectors < 1) {
        throw ConfigError("pseudo-PNR herald needs at least one detector");
    }
    if (herald.confusion && herald.kind != HeraldDetector::Kind::kPnr) {
        throw ConfigError("a confusion matrix is only meaningful for a PNR herald");
    }
    if (herald.confusion && herald.confusion->first_label() != 1) {
        throw ConfigError("herald confusion matrix must start at photon number 1");
    }
}

SqueezingParam squeezing_from_pump(double pump_power, double slope) {
    if (!(pump_power >= 0.0) || !(slope >= 0.0)) {
        throw ConfigError("pump power and squeezing slope must be non-negative");
    }
    return SqueezingParam::from_lambda_sq(slope * pump_power);
}

void CountRecord::add_shot(const ShotOutcome &shot, bool filter_multiphoton) {
    ++shots;
    singles_1 += shot.d1_click;
    singles_2 += shot.d2_click;
    if (accepted_herald(shot.herald_report, filter_multiphoton)) {
        ++herald_singles;
        coinc_1h += shot.d1_click;
        coinc_2h += shot.d2_click;
        coinc_12h += shot.d1_click && shot.d2_click;
    } else if (filter_multiphoton && shot.herald_report > 1) {
        ++herald_multi;
    }
}

CountRecord &CountRecord::operator+=(const CountRecord &o) {
    shots += o.shots;
    herald_singles += o.herald_singles;
    coinc_1h += o.coinc_1h;
    coinc_2h += o.coinc_2h;
    coinc_12h += o.coinc_12h;
    singles_1 += o.singles_1;
    singles_2 += o.singles_2;
    herald_multi += o.herald_multi;
    return *this;
}

bool CountRecord::consistent() const {
    return coinc_12h <= std::min(coinc_1h, coinc_2h) && std::max(coinc_1h, coinc_2h) <= herald_singles &&
           herald_singles + herald_multi <= shots && singles_1 <= shots && singles_2 <= shots &&
           coinc_1h <= singles_1 && coinc_2h <= singles_2;
}

ShotOutcome run_shot(const ExperimentConfig &config, StreamRng &rng) {
    ShotOutcome shot;
    shot.pairs_generated = rng.geometric(config.squeezing.lambda_sq());
    shot.herald_photons_detected = rng.binomial_small(shot.pairs_generated, config.eta_herald);
    shot.herald_report = sample_report(config.herald, shot.herald_photons_detected, rng);

    const int survivors = rng.binomial_small(shot.pairs_generated, config.eta_signal);
    int at_d1 = 0;
    int at_d2 = 0;
    for (int i = 0; i < survivors; ++i) {
        if (rng.bernoulli(0.5)) {
            at_d1 += rng.bernoulli(config.eta_d1);
        } else {
            at_d2 += rng.bernoulli(config.eta_d2);
        }
    }
    shot.d1_click = at_d1 > 0;
    shot.d2_click = at_d2 > 0;
    if (config.dark_click_prob > 0.0) {
        shot.d1_click = rng.bernoulli(config.dark_click_prob) || shot.d1_click;
        shot.d2_click = rng.bernoulli(config.dark_click_prob) || shot.d2_click;
    }
    return shot;
}

ShotOutcome run_shot(const ExperimentConfig &config, std::uint64_t index) {
    StreamRng rng(config.rng_seed, index);
    return run_shot(config, rng);
}

PairedCounts run_experiment_paired(const ExperimentConfig &config, int threads) {
    config.validate();
    const auto parts = detail::parallel_chunks<PairedCounts>(
        config.num_shots, threads, [&](std::uint64_t begin, std::uint64_t end) {
            PairedCounts local;
            for (std::uint64_t i = begin; i < end; ++i) {
                const ShotOutcome shot = run_shot(config, i);
                local.unfiltered.add_shot(shot, false);
                local.filtered.add_shot(shot, true);
            }
            return local;
        });
    PairedCounts total;
    for (const auto &p : parts) {
        total.unfiltered += p.unfiltered;
        total.filtered += p.filtered;
    }
    return total;
}

CountRecord run_experiment(const ExperimentConfig &config, bool filter_multiphoton, int threads) {
    config.validate();
    const auto parts = detail::parallel_chunks<CountRecord>(
        config.num_shots, threads, [&](std::uint64_t begin, std::uint64_t end) {
            CountRecord local;
            for (std::uint64_t i = begin; i < end; ++i) {
                local.add_shot(run_shot(config, i), filter_multiphoton);
            }
            return local;
        });
    CountRecord total;
    for (const auto &p : parts) total += p;
    return total;
}

std::vector<HeraldEvent> collect_herald_events(const ExperimentConfig &config, int threads) {
    config.validate();
    auto parts = detail::parallel_chunks<std::vector<HeraldEvent>>(
        config.num_shots, threads, [&](std::uint64_t begin, std::uint64_t end) {
            std::vector<HeraldEvent> local;
            for (std::uint64_t i = begin; i < end; ++i) {
                const ShotOutcome shot = run_shot(config, i);
                if (shot.herald_photons_detected > 0) local.push_back({i, shot});
            }
            return local;
        });
    std::vector<HeraldEvent> events;
    for (auto &p : parts) events.insert(events.end(), p.begin(), p.end());
    return events;
}

std::vector<int> heralded_photon_numbers(const ExperimentConfig &cfg, std::uint64_t count, int threads) {
    const double p = herald_probability(cfg.squeezing, povm_click(true, cfg.eta_herald,
                                                                  FockTruncation::sufficient_for(cfg.squeezing)));
    if (!(p * 1e11 > static_cast<double>(count))) {
        throw ComputeError("herald probability too small to collect the requested traces");
    }
    const std::uint64_t block = std::max<std::uint64_t>(1 << 16, static_cast<std::uint64_t>(1.1 * count / p / 8));
    std::vector<int> labels;
    labels.reserve(count);
    for (std::uint64_t start = 0; labels.size() < count; start += block) {
        const auto parts = detail::parallel_chunks<std::vector<int>>(
            block, threads, [&](std::uint64_t begin, std::uint64_t end) {
                std::vector<int> local;
                for (std::uint64_t i = start + begin; i < start + end; ++i) {
                    const int n = run_shot(cfg, i).herald_photons_detected;
                    if (n > 0) local.push_back(n);
                }
                return local;
            });
        for (const auto &part : parts) labels.insert(labels.end(), part.begin(), part.end());
    }
    labels.resize(count);
    return labels;
}

G2Estimate g2_empirical(const CountRecord &counts) {
    if (counts.coinc_1h == 0 || counts.coinc_2h == 0) {
        throw ComputeError("insufficient counts: g2 needs non-zero twofold coincidences");
    }
    const double sh = static_cast<double>(counts.herald_singles);
    const double c1 = static_cast<double>(counts.coinc_1h);
    const double c2 = static_cast<double>(counts.coinc_2h);
    const double c12 = static_cast<double>(counts.coinc_12h);
    const double g = sh * c12 / (c1 * c2);
    // sum_N (dg/dN)^2 N for independent Poisson tallies.
    const double d_sh = c12 / (c1 * c2);
    const double d_c12 = sh / (c1 * c2);
    const double d_c1 = g / c1;
    const double d_c2 = g / c2;
    const double var = d_sh * d_sh * sh + d_c12 * d_c12 * c12 + d_c1 * d_c1 * c1 + d_c2 * d_c2 * c2;
    return {g, std::sqrt(var)};
}

namespace {

// Herald events split by which signal detectors fired.
struct OutcomeClasses {
    double only_1 = 0.0;
    double only_2 = 0.0;
    double both = 0.0;
    double neither = 0.0;

    explicit OutcomeClasses(const CountRecord &c)
        : only_1(static_cast<double>(c.coinc_1h - c.coinc_12h)),
          only_2(static_cast<double>(c.coinc_2h - c.coinc_12h)),
          both(static_cast<double>(c.coinc_12h)),
          neither(static_cast<double>(c.herald_singles - c.coinc_1h - c.coinc_2h + c.coinc_12h)) {}
};

// d ln g2 / d N for each class count, in OutcomeClasses order.
std::array<double, 4> log_g2_gradient(const CountRecord &c) {
    const double sh = static_cast<double>(c.herald_singles);
    const double c1 = static_cast<double>(c.coinc_1h);
    const double c2 = static_cast<double>(c.coinc_2h);
    const double c12 = static_cast<double>(c.coinc_12h);
    return {1 / sh - 1 / c1, 1 / sh - 1 / c2, 1 / c12 + 1 / sh - 1 / c1 - 1 / c2, 1 / sh};
}

bool nested(const CountRecord &inner, const CountRecord &outer) {
    return inner.shots == outer.shots && inner.herald_singles <= outer.herald_singles &&
           inner.coinc_1h <= outer.coinc_1h && inner.coinc_2h <= outer.coinc_2h &&
           inner.coinc_12h <= outer.coinc_12h &&
           inner.coinc_1h - inner.coinc_12h <= outer.coinc_1h - outer.coinc_12h &&
           inner.coinc_2h - inner.coinc_12h <= outer.coinc_2h - outer.coinc_12h;
}

}  // namespace

G2Estimate g2_ratio_paired(const PairedCounts &counts) {
    const CountRecord &f = counts.filtered;
    const CountRecord &u = counts.unfiltered;
    if (!nested(f, u) || !f.consistent() || !u.consistent()) {
        throw ComputeError("paired records are not nested: filtered heralds must be a subset of unfiltered");
    }
    const double ratio = g2_empirical(f).value / g2_empirical(u).value;
    if (f.coinc_12h == 0 || u.coinc_12h == 0) return {ratio, 0.0};
    const OutcomeClasses kept(f);
    const OutcomeClasses all(u);
    const std::array<double, 4> n_kept{kept.only_1, kept.only_2, kept.both, kept.neither};
    const std::array<double, 4> n_dropped{all.only_1 - kept.only_1, all.only_2 - kept.only_2,
                                          all.both - kept.both, all.neither - kept.neither};
    const auto gf = log_g2_gradient(f);
    const auto gu = log_g2_gradient(u);
    double var = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        // A kept event enters both numerator and denominator; a dropped one only the denominator.
        var += (gf[k] - gu[k]) * (gf[k] - gu[k]) * n_kept[k] + gu[k] * gu[k] * n_dropped[k];
    }
    return {ratio, ratio * std::sqrt(var)};
}

double klyshko_efficiency(const CountRecord &counts) {
    const std::uint64_t singles = counts.singles_1 + counts.singles_2;
    if (singles == 0) {
        throw ComputeError("no signal counts: Klyshko efficiency undefined");
    }
    return static_cast<double>(counts.coinc_1h + counts.coinc_2h) / static_cast<double>(singles);
}

LineFit klyshko_intercept(std::span<const PowerPoint> points) {
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = points[i].pump_power;
        y(i) = points[i].klyshko_estimate;
    }
    const bool distinct =
        n >= 2 && (design.col(1).array() != design(0, 1)).any();
    if (!distinct) {
        throw ComputeError("degenerate fit: need at least two distinct pump powers");
    }
    const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
    LineFit fit;
    fit.intercept = beta(0);
    fit.slope = beta(1);
    if (n > 2) {
        const double rss = (y - design * beta).squaredNorm();
        const Eigen::Matrix2d cov =
            (design.transpose() * design).inverse() * (rss / static_cast<double>(n - 2));
        fit.intercept_sigma = std::sqrt(cov(0, 0));
        fit.slope_sigma = std::sqrt(cov(1, 1));
    }
    return fit;
}

}  // namespace heraldsim
