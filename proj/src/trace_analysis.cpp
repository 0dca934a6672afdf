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
#include <numeric>
#include <sstream>

#include "heraldsim/error.hpp"
#include "heraldsim/trace_lab.hpp"

namespace heraldsim {

double total_variation_distance(std::span<const double> p, std::span<const double> q) {
    const std::size_t n = std::max(p.size(), q.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        sum += std::abs(a - b);
    }
    return 0.5 * sum;
}

double total_variation_distance(const PhotonDistribution &p, const PhotonDistribution &q) {
    return total_variation_distance(std::span<const double>(p.probs().data(), p.probs().size()),
                                    std::span<const double>(q.probs().data(), q.probs().size()));
}

Eigen::VectorXd label_distribution(std::span<const int> labels, int max_label) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(max_label + 1);
    for (int l : labels) {
        if (l < 0) throw ConfigError("labels must be non-negative");
        p(std::min(l, max_label)) += 1.0;
    }
    if (!labels.empty()) p /= static_cast<double>(labels.size());
    return p;
}

std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) throw ConfigError("linspace needs at least one step");
    std::vector<double> out(steps);
    for (int i = 0; i < steps; ++i) {
        out[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    }
    return out;
}

std::vector<SweepPoint> threshold_sweep(std::span<const SweepEvent> events,
                                        std::span<const double> edges) {
    if (events.empty()) {
        throw ComputeError("empty acceptance: no herald events");
    }
    std::vector<SweepEvent> sorted(events.begin(), events.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepEvent &a, const SweepEvent &b) { return a.slope < b.slope; });
    // Prefix tallies over events sorted by slope.
    const std::size_t n = sorted.size();
    std::vector<std::uint64_t> c1(n + 1, 0), c2(n + 1, 0), c12(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        c1[i + 1] = c1[i] + sorted[i].d1_click;
        c2[i + 1] = c2[i] + sorted[i].d2_click;
        c12[i + 1] = c12[i] + (sorted[i].d1_click && sorted[i].d2_click);
    }
    std::vector<SweepPoint> out;
    out.reserve(edges.size());
    for (double edge : edges) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), edge,
                                         [](double e, const SweepEvent &ev) { return e < ev.slope; });
        const auto accepted = static_cast<std::size_t>(it - sorted.begin());
        if (accepted == 0) {
            std::ostringstream msg;
            msg << "empty acceptance: no herald slope at or below edge " << edge;
            throw ComputeError(msg.str());
        }
        CountRecord rec;
        rec.shots = n;
        rec.herald_singles = accepted;
        rec.coinc_1h = c1[accepted];
        rec.coinc_2h = c2[accepted];
        rec.coinc_12h = c12[accepted];
        const auto g = g2_empirical(rec);
        out.push_back({edge, g.value, g.sigma,
                       static_cast<double>(accepted) / static_cast<double>(n), accepted});
    }
    return out;
}

}  // namespace heraldsim
