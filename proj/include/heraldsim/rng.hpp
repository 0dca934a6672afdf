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

#ifndef HERALDSIM_RNG_HPP
#define HERALDSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace heraldsim {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Splittable SplitMix64 stream. `StreamRng(seed, index)` gives an independent,
/// reproducible stream per work item (shot, trace), so results do not depend on
/// execution order or worker count.
///
/// Samplers are implemented here rather than through <random> distributions,
/// whose algorithms differ between standard libraries.
class StreamRng {
  public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() { return 1.0 - uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Number of successes in `trials` independent Bernoulli(p) draws.
    int binomial_small(int trials, double p) {
        int k = 0;
        for (int i = 0; i < trials; ++i) {
            k += bernoulli(p);
        }
        return k;
    }

    /// P(k) = (1 - x) x^k by inversion.
    int geometric(double x) {
        if (x <= 0.0) {
            return 0;
        }
        return static_cast<int>(std::floor(std::log(uniform_open_zero()) / std::log(x)));
    }

    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(uniform() * n); }

    /// Standard normal via Box-Muller (one variate per call).
    double normal() {
        const double u1 = uniform_open_zero();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

  private:
    std::uint64_t state_;
};

}  // namespace heraldsim

#endif  // HERALDSIM_RNG_HPP
