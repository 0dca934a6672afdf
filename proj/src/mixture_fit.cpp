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

// Sum-of-Gaussians model of the slope histogram.
//
// The default backend is a Levenberg-Marquardt weighted least-squares fit of
//   f(x) = sum_k A_k exp(-(x - mu_k)^2 / (2 sigma_k^2))
// to the bin counts, parameterized by (log A_k, mu_k, log sigma_k) so that
// amplitudes and widths stay positive. Several starting points are tried and
// the lowest-cost valid fit wins.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "heraldsim/error.hpp"
#include "heraldsim/trace_lab.hpp"

namespace heraldsim {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double quantile(std::vector<double> sorted_values, double q) {
    // `sorted_values` must already be sorted.
    const double pos = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    return sorted_values[lo] + (pos - static_cast<double>(lo)) * (sorted_values[hi] - sorted_values[lo]);
}

Eigen::VectorXd smooth(const Eigen::VectorXd &counts, double sigma_bins) {
    const int half = static_cast<int>(std::ceil(4.0 * sigma_bins));
    Eigen::VectorXd kernel(2 * half + 1);
    for (int j = -half; j <= half; ++j) {
        kernel(j + half) = std::exp(-0.5 * j * j / (sigma_bins * sigma_bins));
    }
    kernel /= kernel.sum();
    const Eigen::Index n = counts.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0, norm = 0.0;
        for (int j = -half; j <= half; ++j) {
            const Eigen::Index k = i + j;
            if (k < 0 || k >= n) continue;
            acc += kernel(j + half) * counts(k);
            norm += kernel(j + half);
        }
        out(i) = acc / norm;
    }
    return out;
}

struct Peak {
    Eigen::Index index;
    double height;
    double prominence;
};

std::vector<Peak> prominent_peaks(const Eigen::VectorXd &s, double sigma_bins) {
    // Counting noise of a Gaussian-smoothed Poisson histogram is reduced by the
    // effective number of averaged bins, 2 sqrt(pi) sigma.
    const double averaged_bins = std::max(1.0, 2.0 * std::sqrt(std::numbers::pi) * sigma_bins);
    std::vector<Peak> peaks;
    const Eigen::Index n = s.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || s(i) > s(i - 1);
        const bool right_ok = i == n - 1 || s(i) >= s(i + 1);
        if (!left_ok || !right_ok) continue;
        double left_min = s(i), right_min = s(i);
        Eigen::Index k = i;
        while (k > 0 && s(k - 1) <= s(i)) left_min = std::min(left_min, s(--k));
        const bool left_bounded = k > 0;
        k = i;
        while (k < n - 1 && s(k + 1) <= s(i)) right_min = std::min(right_min, s(++k));
        const bool right_bounded = k < n - 1;
        // An unbounded side contributes its minimum (the histogram edge).
        double base;
        if (left_bounded && right_bounded) {
            base = std::max(left_min, right_min);
        } else if (left_bounded) {
            base = left_min;
        } else if (right_bounded) {
            base = right_min;
        } else {
            base = std::min(left_min, right_min);
        }
        const double prominence = s(i) - base;
        const double noise = std::sqrt(std::max(s(i), 1.0) / averaged_bins);
        if (prominence > 5.0 * noise) {
            peaks.push_back({i, s(i), prominence});
        }
    }
    return peaks;
}

using Params = Eigen::VectorXd;  // [log A, mu, log sigma] per component

struct LmResult {
    Params params;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

Eigen::VectorXd model(const Params &p, const Eigen::VectorXd &x) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index k = 0; k < p.size() / 3; ++k) {
        const double a = std::exp(p(3 * k));
        const double mu = p(3 * k + 1);
        const double sigma = std::exp(p(3 * k + 2));
        f.array() += a * (-0.5 * ((x.array() - mu) / sigma).square()).exp();
    }
    return f;
}

// No component spreads past the nearest neighbouring mean.
bool classes_resolved(const Params &p) {
    std::vector<std::pair<double, double>> ms;
    for (Eigen::Index k = 0; k < p.size() / 3; ++k) ms.push_back({p(3 * k + 1), std::exp(p(3 * k + 2))});
    std::sort(ms.begin(), ms.end());
    for (std::size_t k = 0; k < ms.size(); ++k) {
        double gap = std::numeric_limits<double>::infinity();
        if (k > 0) gap = ms[k].first - ms[k - 1].first;
        if (k + 1 < ms.size()) gap = std::min(gap, ms[k + 1].first - ms[k].first);
        if (!(gap > ms[k].second)) return false;
    }
    return true;
}

// Steps that would merge resolved classes are refused once the iterate is resolved.
LmResult levenberg_marquardt(Params p, const Eigen::VectorXd &x, const Eigen::VectorXd &y,
                             const Eigen::ArrayXd &w, int max_iterations) {
    const Eigen::Index n_par = p.size();
    auto cost_of = [&](const Params &q) { return (w * (y - model(q, x)).array().square()).sum(); };

    LmResult result;
    double cost = cost_of(p);
    double damping = 1e-3;
    int quiet_steps = 0;
    bool resolved = classes_resolved(p);
    for (int iter = 0; iter < max_iterations; ++iter) {
        Eigen::MatrixXd jac(x.size(), n_par);
        for (Eigen::Index k = 0; k < n_par / 3; ++k) {
            const double a = std::exp(p(3 * k));
            const double mu = p(3 * k + 1);
            const double sigma = std::exp(p(3 * k + 2));
            const Eigen::ArrayXd z = (x.array() - mu) / sigma;
            const Eigen::ArrayXd g = a * (-0.5 * z.square()).exp();
            jac.col(3 * k) = g.matrix();
            jac.col(3 * k + 1) = (g * z / sigma).matrix();
            jac.col(3 * k + 2) = (g * z.square()).matrix();
        }
        const Eigen::VectorXd r = y - model(p, x);
        const Eigen::MatrixXd jtw = jac.transpose() * w.matrix().asDiagonal();
        const Eigen::MatrixXd normal = jtw * jac;
        const Eigen::VectorXd gradient = jtw * r;

        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            Eigen::MatrixXd lhs = normal;
            lhs.diagonal() += damping * normal.diagonal().cwiseMax(1e-12);
            const Params step = lhs.ldlt().solve(gradient);
            if (!step.allFinite()) {
                damping *= 10.0;
                continue;
            }
            const Params trial = p + step;
            const double trial_cost = cost_of(trial);
            const bool keeps_classes = !resolved || classes_resolved(trial);
            if (std::isfinite(trial_cost) && trial_cost < cost && keeps_classes) {
                const double relative = (cost - trial_cost) / std::max(cost, 1e-300);
                p = trial;
                cost = trial_cost;
                damping = std::max(damping / 3.0, 1e-12);
                improved = true;
                quiet_steps = relative < 1e-10 ? quiet_steps + 1 : 0;
                resolved = resolved || classes_resolved(p);
            } else {
                damping *= 4.0;
            }
        }
        if (!improved || quiet_steps >= 3) {
            result.converged = true;
            break;
        }
    }
    result.params = p;
    result.cost = cost;
    return result;
}

std::vector<GaussianComponent> to_components(const Params &p, double bin_width) {
    std::vector<GaussianComponent> comps;
    for (Eigen::Index k = 0; k < p.size() / 3; ++k) {
        const double a = std::exp(p(3 * k));
        const double sigma = std::exp(p(3 * k + 2));
        comps.push_back({a * sigma * kSqrt2Pi / bin_width, p(3 * k + 1), sigma});
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto &l, const auto &r) { return l.mean < r.mean; });
    return comps;
}

Params to_params(const std::vector<GaussianComponent> &comps, double bin_width) {
    Params p(3 * static_cast<Eigen::Index>(comps.size()));
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const double a = comps[k].weight * bin_width / (comps[k].sigma * kSqrt2Pi);
        p(3 * k) = std::log(std::max(a, 1e-300));
        p(3 * k + 1) = comps[k].mean;
        p(3 * k + 2) = std::log(comps[k].sigma);
    }
    return p;
}

bool resolvable(const std::vector<GaussianComponent> &comps, const Histogram &h) {
    const double range = h.bin_width * static_cast<double>(h.size());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto &c = comps[k];
        if (!std::isfinite(c.mean) || !std::isfinite(c.sigma) || !std::isfinite(c.weight) ||
            !(c.sigma >= 0.5 * h.bin_width) || !(c.sigma <= range) || !(c.weight >= 5.0) ||
            c.mean < h.origin || c.mean > h.origin + range) {
            return false;
        }
        // Each component is one class: its spread must not reach past the
        // nearest neighbouring mean.
        double gap = std::numeric_limits<double>::infinity();
        if (k > 0) gap = c.mean - comps[k - 1].mean;
        if (k + 1 < comps.size()) gap = std::min(gap, comps[k + 1].mean - c.mean);
        if (!(gap > c.sigma) || !(gap > 1e-6 * range)) {
            return false;
        }
    }
    return true;
}

// Half width at half maximum of the smoothed histogram around a peak, in bins,
// from the narrower side so a neighbouring peak does not widen it.
double half_width_bins(const Eigen::VectorXd &s, Eigen::Index peak) {
    const double half = 0.5 * s(peak);
    Eigen::Index l = peak, r = peak;
    while (l > 0 && s(l) > half) --l;
    while (r < s.size() - 1 && s(r) > half) ++r;
    const bool left_ok = s(l) <= half;
    const bool right_ok = s(r) <= half;
    double width;
    if (left_ok && right_ok) {
        width = static_cast<double>(std::min(peak - l, r - peak));
    } else if (left_ok) {
        width = static_cast<double>(peak - l);
    } else if (right_ok) {
        width = static_cast<double>(r - peak);
    } else {
        width = 0.25 * static_cast<double>(s.size());
    }
    return std::max(1.0, width);
}

struct Candidate {
    std::vector<GaussianComponent> comps;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Poisson deviance of the model against the bin counts; comparable across fits.
double deviance(const Params &p, const Histogram &h, const Eigen::VectorXd &centers) {
    const Eigen::ArrayXd f = model(p, centers).array().max(1e-300);
    const Eigen::ArrayXd y = h.counts.array();
    const Eigen::ArrayXd log_term = (y > 0.0).select(y * (y / f).log(), 0.0);
    return 2.0 * (f - y + log_term).sum();
}

// Counts-weighted fit, then two passes reweighted by the fitted model so the
// weights no longer follow the counting noise of individual bins.
Candidate fit_from(const std::vector<GaussianComponent> &init, const Histogram &h,
                   const Eigen::VectorXd &centers, int max_iterations) {
    auto lm = levenberg_marquardt(to_params(init, h.bin_width), centers, h.counts,
                                  1.0 / h.counts.array().max(1.0), max_iterations);
    for (int pass = 0; pass < 2 && lm.params.allFinite(); ++pass) {
        const Eigen::ArrayXd w = 1.0 / model(lm.params, centers).array().max(1.0);
        lm = levenberg_marquardt(lm.params, centers, h.counts, w, max_iterations);
    }
    return {to_components(lm.params, h.bin_width), deviance(lm.params, h, centers), lm.converged};
}

// Peak-seeded start, topped up greedily at the largest smoothed residual
// until `k` components are present.
std::vector<GaussianComponent> greedy_init(const Histogram &h, const Eigen::VectorXd &centers,
                                           int k, int max_iterations) {
    const Eigen::VectorXd s = smooth(h.counts, 2.0);
    std::vector<std::pair<double, Eigen::Index>> seeds;
    for (double c : detect_peaks(h)) {
        const auto i = std::clamp<Eigen::Index>(
            static_cast<Eigen::Index>(std::floor((c - h.origin) / h.bin_width)), 0, h.size() - 1);
        seeds.push_back({s(i), i});
    }
    if (seeds.empty()) {
        Eigen::Index imax = 0;
        s.maxCoeff(&imax);
        seeds.push_back({s(imax), imax});
    }
    std::sort(seeds.begin(), seeds.end(), std::greater<>());
    std::vector<GaussianComponent> comps;
    for (const auto &[height, i] : seeds) {
        if (static_cast<int>(comps.size()) == k) break;
        const double sigma = half_width_bins(s, i) * h.bin_width / 1.1774;
        comps.push_back({height * sigma * kSqrt2Pi / h.bin_width, h.center(i), sigma});
    }
    while (static_cast<int>(comps.size()) < k) {
        auto fitted = fit_from(comps, h, centers, max_iterations).comps;
        const Eigen::VectorXd f = model(to_params(fitted, h.bin_width), centers);
        const Eigen::VectorXd excess = smooth(h.counts - f, 2.0).cwiseMax(0.0);
        const Eigen::ArrayXd z = excess.array() / smooth(f, 2.0).array().max(1.0).sqrt();
        Eigen::Index imax = 0;
        z.maxCoeff(&imax);
        const double height = std::max(excess(imax), 1.0);
        const double sigma = half_width_bins(excess, imax) * h.bin_width / 1.1774;
        fitted.push_back({height * sigma * kSqrt2Pi / h.bin_width, h.center(imax), sigma});
        comps = std::move(fitted);
    }
    return comps;
}

std::vector<GaussianComponent> quantile_init(const std::vector<double> &sorted, const Histogram &h,
                                             int k) {
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    const double sigma = std::max(iqr / (1.349 * k), 2.0 * h.bin_width);
    const double mass = static_cast<double>(sorted.size()) / k;
    std::vector<GaussianComponent> comps;
    for (int j = 0; j < k; ++j) {
        comps.push_back({mass, quantile(sorted, (j + 0.5) / k), sigma});
    }
    return comps;
}

// Means evenly spaced from the strongest peak to the upper tail, for spectra
// whose higher classes show only as shoulders.
std::vector<GaussianComponent> spread_init(const std::vector<double> &sorted, const Histogram &h,
                                           int k) {
    const auto peaks = detect_peaks(h);
    const Eigen::VectorXd s = smooth(h.counts, 2.0);
    Eigen::Index imax = 0;
    s.maxCoeff(&imax);
    const double lo = peaks.empty() ? h.center(imax) : peaks.front();
    const double hi = quantile(sorted, 0.999);
    const double step = k > 1 ? (hi - lo) / (k - 1) : 0.0;
    const double sigma = std::max(k > 1 ? 0.3 * step : half_width_bins(s, imax) * h.bin_width / 1.1774,
                                  2.0 * h.bin_width);
    std::vector<GaussianComponent> comps;
    double mass = static_cast<double>(sorted.size());
    for (int j = 0; j < k; ++j) {
        mass *= 0.5;
        comps.push_back({j + 1 == k ? 2.0 * mass : mass, lo + step * j, sigma});
    }
    return comps;
}

// Detected peaks extended by their last spacing, with geometrically falling
// weights, for spectra whose classes sit on a roughly even ladder.
std::vector<GaussianComponent> ladder_init(const Histogram &h, int k) {
    const auto peaks = detect_peaks(h);
    if (peaks.size() < 2 || static_cast<int>(peaks.size()) >= k) return {};
    const Eigen::VectorXd s = smooth(h.counts, 2.0);
    auto bin_of = [&](double x) {
        return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((x - h.origin) / h.bin_width)),
                                        0, h.size() - 1);
    };
    std::vector<GaussianComponent> comps;
    for (double c : peaks) {
        const auto i = bin_of(c);
        const double sigma = half_width_bins(s, i) * h.bin_width / 1.1774;
        comps.push_back({s(i) * sigma * kSqrt2Pi / h.bin_width, c, sigma});
    }
    const auto &a = comps[comps.size() - 2];
    const auto &b = comps.back();
    const double step = b.mean - a.mean;
    const double ratio = std::clamp(b.weight / a.weight, 0.01, 0.9);
    const double widen = std::clamp(b.sigma / a.sigma, 1.0, 2.0);
    while (static_cast<int>(comps.size()) < k) {
        const auto last = comps.back();
        comps.push_back({last.weight * ratio, last.mean + step, last.sigma * widen});
    }
    return comps;
}

double reduced_chi_square(const std::vector<GaussianComponent> &comps, const Histogram &h) {
    Eigen::VectorXd centers(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) centers(i) = h.center(i);
    const Eigen::VectorXd f = model(to_params(comps, h.bin_width), centers);
    const double chi2 = ((h.counts - f).array().square() / h.counts.array().max(1.0)).sum();
    const double dof = std::max<double>(1.0, static_cast<double>(h.size()) - 3.0 * comps.size());
    return chi2 / dof;
}

std::vector<GaussianComponent> expectation_maximization(const std::vector<double> &values,
                                                        std::vector<GaussianComponent> comps,
                                                        int max_iterations, double *log_likelihood) {
    const std::size_t n = values.size();
    const std::size_t k = comps.size();
    const double total = static_cast<double>(n);
    for (auto &c : comps) c.weight = std::max(c.weight, 1e-3 * total / k);
    double previous = -std::numeric_limits<double>::infinity();
    std::vector<double> resp(k);
    double ll = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        std::vector<double> sw(k, 0.0), sx(k, 0.0), sxx(k, 0.0);
        ll = 0.0;
        double weight_sum = 0.0;
        for (const auto &c : comps) weight_sum += c.weight;
        for (double v : values) {
            double norm = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double z = (v - comps[j].mean) / comps[j].sigma;
                resp[j] = comps[j].weight / weight_sum / (comps[j].sigma * kSqrt2Pi) *
                          std::exp(-0.5 * z * z);
                norm += resp[j];
            }
            norm = std::max(norm, 1e-300);
            ll += std::log(norm);
            for (std::size_t j = 0; j < k; ++j) {
                const double r = resp[j] / norm;
                sw[j] += r;
                sx[j] += r * v;
                sxx[j] += r * v * v;
            }
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (sw[j] <= 1e-9) continue;
            const double mean = sx[j] / sw[j];
            const double var = std::max(sxx[j] / sw[j] - mean * mean, 1e-18);
            comps[j] = {sw[j], mean, std::sqrt(var)};
        }
        if (std::abs(ll - previous) < 1e-10 * std::max(1.0, std::abs(ll))) break;
        previous = ll;
    }
    if (log_likelihood) *log_likelihood = ll;
    std::sort(comps.begin(), comps.end(),
              [](const auto &l, const auto &r) { return l.mean < r.mean; });
    return comps;
}

double normal_cdf(double x, double mean, double sigma) {
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::numbers::sqrt2));
}

}  // namespace

double GaussianComponent::density(double x) const {
    const double z = (x - mean) / sigma;
    return weight / (sigma * kSqrt2Pi) * std::exp(-0.5 * z * z);
}

double GaussianMixture::density(double x) const {
    double d = 0.0;
    for (const auto &c : components) d += c.density(x);
    return d;
}

Histogram make_histogram(std::span<const double> values, std::optional<double> bin_width) {
    if (values.size() < 2) {
        throw ComputeError("histogram needs at least two values");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    double width;
    if (bin_width) {
        width = *bin_width;
    } else {
        const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
        width = 2.0 * iqr * std::cbrt(1.0 / static_cast<double>(sorted.size()));
        if (!(width > 0.0)) {
            width = (hi - lo) / std::sqrt(static_cast<double>(sorted.size()));
        }
    }
    if (!(width > 0.0) || !std::isfinite(width)) {
        width = 1.0;
    }
    const auto bins = static_cast<Eigen::Index>(
        std::clamp(std::floor((hi - lo) / width) + 1.0, 1.0, 20000.0));
    if ((hi - lo) / width + 1.0 > 20000.0) {
        width = (hi - lo) / static_cast<double>(bins - 1);
    }
    Histogram h;
    h.bin_width = width;
    h.origin = lo - 0.5 * width;
    h.counts = Eigen::VectorXd::Zero(bins);
    for (double v : sorted) {
        const auto i = std::clamp<Eigen::Index>(
            static_cast<Eigen::Index>(std::floor((v - h.origin) / width)), 0, bins - 1);
        h.counts(i) += 1.0;
    }
    return h;
}

std::vector<double> detect_peaks(const Histogram &histogram) {
    // A peak counts when it is prominent at some smoothing scale and still
    // present at the next coarser one. Finer scales win when peaks coincide.
    const double scales[] = {1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<std::vector<Peak>> found;
    for (double sc : scales) found.push_back(prominent_peaks(smooth(histogram.counts, sc), sc));
    std::vector<Eigen::Index> accepted;
    for (std::size_t k = 0; k + 1 < found.size(); ++k) {
        const double reach = 2.0 * scales[k + 1];
        for (const auto &p : found[k]) {
            const bool persists = std::any_of(found[k + 1].begin(), found[k + 1].end(), [&](const Peak &q) {
                return std::abs(q.index - p.index) <= reach;
            });
            const bool known = std::any_of(accepted.begin(), accepted.end(), [&](Eigen::Index a) {
                return std::abs(a - p.index) <= 2.0 * scales[k];
            });
            if (persists && !known) accepted.push_back(p.index);
        }
    }
    std::sort(accepted.begin(), accepted.end());
    std::vector<double> centers;
    for (auto i : accepted) centers.push_back(histogram.center(i));
    return centers;
}

GaussianMixture fit_mixture(std::span<const double> slopes, const MixtureOptions &options) {
    if (options.num_components && *options.num_components < 1) {
        throw ConfigError("num_components must be positive");
    }
    if (slopes.size() < std::max<std::size_t>(options.min_samples, 2)) {
        std::ostringstream msg;
        msg << "too few samples for a mixture fit: " << slopes.size() << " < " << options.min_samples;
        throw ComputeError(msg.str());
    }
    std::vector<double> sorted(slopes.begin(), slopes.end());
    std::sort(sorted.begin(), sorted.end());
    const Histogram h = make_histogram(sorted, options.bin_width);
    Eigen::VectorXd centers(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) centers(i) = h.center(i);

    auto fit_k = [&](int k) -> std::optional<Candidate> {
        std::vector<std::vector<GaussianComponent>> starts{
            greedy_init(h, centers, k, options.max_iterations), quantile_init(sorted, h, k),
            spread_init(sorted, h, k)};
        if (auto ladder = ladder_init(h, k); !ladder.empty()) starts.push_back(std::move(ladder));
        std::optional<Candidate> best;
        for (const auto &start : starts) {
            Candidate cand;
            if (options.backend == MixtureBackend::kHistogramLeastSquares) {
                cand = fit_from(start, h, centers, options.max_iterations);
            } else {
                double ll = 0.0;
                const auto warm = fit_from(start, h, centers, options.max_iterations).comps;
                cand.comps = expectation_maximization(sorted, warm, options.max_iterations * 4, &ll);
                cand.cost = -2.0 * ll;
                cand.converged = true;
            }
            if (!resolvable(cand.comps, h)) continue;
            if (!best || cand.cost < best->cost) best = std::move(cand);
        }
        return best;
    };

    std::optional<Candidate> best;
    if (options.num_components) {
        best = fit_k(*options.num_components);
    } else {
        // Start from the persistent peaks, then add shoulder components while
        // the Bayesian information criterion keeps improving.
        const int peaks = std::max<int>(1, static_cast<int>(detect_peaks(h).size()));
        const double penalty = 3.0 * std::log(static_cast<double>(sorted.size()));
        best = fit_k(peaks);
        int best_k = peaks;
        for (int k = peaks + 1; best && k <= peaks + 4; ++k) {
            auto more = fit_k(k);
            if (!more || !more->converged) continue;  // no resolvable fit at this size
            if (best->cost - more->cost <= penalty * (k - best_k)) break;
            best = std::move(more);
            best_k = k;
        }
    }
    if (!best) {
        throw ComputeError("mixture fit failed: components collapsed or diverged");
    }
    if (!best->converged) {
        throw ComputeError("mixture fit failed to converge");
    }

    GaussianMixture mixture;
    mixture.components = std::move(best->comps);
    mixture.total_mass = static_cast<double>(sorted.size());
    mixture.histogram = h;
    mixture.fit_quality = reduced_chi_square(mixture.components, h);
    return mixture;
}

GaussianMixture fit_mixture(std::span<const SlopeSample> slopes, const MixtureOptions &options) {
    std::vector<double> values;
    values.reserve(slopes.size());
    for (const auto &s : slopes) values.push_back(s.slope);
    return fit_mixture(std::span<const double>(values), options);
}

BinEdges compute_bin_edges(const GaussianMixture &mixture) {
    BinEdges out;
    const auto &c = mixture.components;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        const auto &a = c[k];
        const auto &b = c[k + 1];
        if (!(b.mean > a.mean)) {
            throw ComputeError("degenerate components: means are not strictly increasing");
        }
        // log(w_a N_a) - log(w_b N_b) = q2 x^2 + q1 x + q0
        const double va = a.sigma * a.sigma;
        const double vb = b.sigma * b.sigma;
        const double q2 = -0.5 / va + 0.5 / vb;
        const double q1 = a.mean / va - b.mean / vb;
        const double q0 = std::log(a.weight / a.sigma) - std::log(b.weight / b.sigma) -
                          0.5 * a.mean * a.mean / va + 0.5 * b.mean * b.mean / vb;
        std::vector<double> roots;
        const double scale = std::abs(q1) + std::abs(q2) * (std::abs(a.mean) + std::abs(b.mean));
        if (std::abs(q2) * (b.mean - a.mean) < 1e-12 * scale) {
            if (q1 != 0.0) roots.push_back(-q0 / q1);
        } else {
            const double disc = q1 * q1 - 4.0 * q2 * q0;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double t = -0.5 * (q1 + std::copysign(sq, q1));
                if (t != 0.0) {
                    roots.push_back(t / q2);
                    roots.push_back(q0 / t);
                } else {
                    roots.push_back(-q1 / (2.0 * q2));
                }
            }
        }
        std::vector<double> inside;
        for (double r : roots) {
            if (r > a.mean && r < b.mean) inside.push_back(r);
        }
        if (inside.empty()) {
            out.edges.push_back((a.mean * b.sigma + b.mean * a.sigma) / (a.sigma + b.sigma));
            out.fallback.push_back(true);
            continue;
        }
        if (inside.size() > 1) {
            // Valley of the two-component density between the means.
            double valley = a.mean;
            double lowest = std::numeric_limits<double>::infinity();
            const int steps = 2000;
            for (int i = 1; i < steps; ++i) {
                const double xv = a.mean + (b.mean - a.mean) * i / steps;
                const double d = a.density(xv) + b.density(xv);
                if (d < lowest) {
                    lowest = d;
                    valley = xv;
                }
            }
            std::sort(inside.begin(), inside.end(), [&](double l, double r) {
                return std::abs(l - valley) < std::abs(r - valley);
            });
        }
        out.edges.push_back(inside.front());
        out.fallback.push_back(false);
    }
    return out;
}

std::vector<int> assign_photon_numbers(std::span<const double> slopes, const BinEdges &edges) {
    std::vector<int> out;
    out.reserve(slopes.size());
    for (double s : slopes) {
        const auto it = std::lower_bound(edges.edges.begin(), edges.edges.end(), s);
        out.push_back(static_cast<int>(it - edges.edges.begin()) + 1);
    }
    return out;
}

ConfusionMatrix confusion_from_mixture(const GaussianMixture &mixture, const BinEdges &edges,
                                       int max_resolved) {
    if (mixture.size() < 1) {
        throw ConfigError("confusion needs at least one mixture component");
    }
    if (static_cast<int>(edges.edges.size()) != mixture.size() - 1) {
        throw ConfigError("bin edges do not match the mixture");
    }
    const int classes = std::min(mixture.size(), std::max(1, max_resolved));
    constexpr double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd m(classes, classes);
    for (int n = 0; n < classes; ++n) {
        const auto &comp = mixture.components[n];
        for (int r = 0; r < classes; ++r) {
            const double lo = r == 0 ? -inf : edges.edges[r - 1];
            const double hi = r == classes - 1 ? inf : edges.edges[r];
            m(n, r) = std::max(0.0, normal_cdf(hi, comp.mean, comp.sigma) -
                                        normal_cdf(lo, comp.mean, comp.sigma));
        }
        m.row(n) /= m.row(n).sum();
    }
    return ConfusionMatrix(std::move(m), 1);
}

}  // namespace heraldsim
