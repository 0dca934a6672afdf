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

// Test-only series oracle for the expected per-shot tallies of the Monte Carlo
// experiment. Sums directly over pair number n and detected herald count d
// with explicit binomial weights; shares no code with the POVM routines.

#ifndef HERALDSIM_TESTS_MC_ORACLE_HPP
#define HERALDSIM_TESTS_MC_ORACLE_HPP

#include <cmath>
#include <functional>

namespace heraldsim::oracle {

inline double binom_pmf(int n, int k, double p) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
           std::pow(p, k) * std::pow(1.0 - p, n - k);
}

struct ExpectedRates {
    double herald = 0.0;  // E[S_h] / shots
    double c1 = 0.0;
    double c2 = 0.0;
    double c12 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    /// Expected value of the coincidence estimator in the large-count limit.
    double g2_estimator() const { return herald * c12 / (c1 * c2); }
    double klyshko() const { return (c1 + c2) / (s1 + s2); }
};

/// `accept(d)` is the probability that a detected herald count d is accepted.
inline ExpectedRates expected_rates(double lambda_sq, double eta_h, double eta_s, double eta_d1,
                                    double eta_d2, const std::function<double(int)> &accept,
                                    int n_max = 400) {
    ExpectedRates r;
    const double q1 = eta_s * eta_d1 / 2.0;
    const double q2 = eta_s * eta_d2 / 2.0;
    for (int n = 0; n <= n_max; ++n) {
        const double pn = (1.0 - lambda_sq) * std::pow(lambda_sq, n);
        if (pn < 1e-300) break;
        double a = 0.0;
        for (int d = 0; d <= n; ++d) a += binom_pmf(n, d, eta_h) * accept(d);
        const double p1 = 1.0 - std::pow(1.0 - q1, n);
        const double p2 = 1.0 - std::pow(1.0 - q2, n);
        const double p12 = 1.0 - std::pow(1.0 - q1, n) - std::pow(1.0 - q2, n) +
                           std::pow(1.0 - q1 - q2, n);
        r.herald += pn * a;
        r.c1 += pn * a * p1;
        r.c2 += pn * a * p2;
        r.c12 += pn * a * p12;
        r.s1 += pn * p1;
        r.s2 += pn * p2;
    }
    return r;
}

inline double accept_click(int d) { return d >= 1 ? 1.0 : 0.0; }
inline double accept_exactly_one(int d) { return d == 1 ? 1.0 : 0.0; }

}  // namespace heraldsim::oracle

#endif  // HERALDSIM_TESTS_MC_ORACLE_HPP
