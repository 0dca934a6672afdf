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

// Truncated-series photon statistics of a single-mode two-mode squeezed
// vacuum source: thermal pair statistics, diagonal detector POVMs, heralding
// probability, heralded signal state and its zero-delay g2.
//
// Every POVM here is diagonal in the Fock basis, so an outcome is a vector of
// coefficients c_n and states are photon-number distributions. All routines
// are templated on the scalar type; `double` aliases are provided at the end.

#ifndef HERALDSIM_PHOTON_STATS_HPP
#define HERALDSIM_PHOTON_STATS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "heraldsim/confusion.hpp"
#include "heraldsim/error.hpp"

namespace heraldsim {

template <typename Scalar>
using FockVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Neumaier-compensated sum of a dense expression.
template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived> &values) {
    using Scalar = typename Derived::Scalar;
    Scalar sum(0);
    Scalar carry(0);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Scalar v = values.derived().coeff(i);
        const Scalar t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

/// Squeezing amplitude lambda of the two-mode squeezed vacuum, 0 <= lambda < 1.
template <typename Scalar>
class Squeezing {
  public:
    static Squeezing from_lambda(Scalar lambda) {
        if (!(lambda >= Scalar(0) && lambda < Scalar(1))) {
            std::ostringstream msg;
            msg << "squeezing parameter must satisfy 0 <= lambda < 1, got " << lambda;
            throw ConfigError(msg.str());
        }
        return Squeezing(lambda, lambda * lambda);
    }

    static Squeezing from_lambda_sq(Scalar lambda_sq) {
        if (!(lambda_sq >= Scalar(0) && lambda_sq < Scalar(1))) {
            std::ostringstream msg;
            msg << "lambda^2 must lie in [0, 1), got " << lambda_sq;
            throw ConfigError(msg.str());
        }
        using std::sqrt;
        return Squeezing(sqrt(lambda_sq), lambda_sq);
    }

    Scalar lambda() const { return lambda_; }
    /// Per-pulse geometric parameter x = lambda^2.
    Scalar lambda_sq() const { return lambda_sq_; }
    /// Mean number of pairs per pulse, x / (1 - x).
    Scalar mean_pairs() const { return lambda_sq_ / (Scalar(1) - lambda_sq_); }

  private:
    Squeezing(Scalar lambda, Scalar lambda_sq) : lambda_(lambda), lambda_sq_(lambda_sq) {}
    Scalar lambda_;
    Scalar lambda_sq_;
};

/// Fock-space cutoff. Series run over n = 0..n_max inclusive.
struct FockTruncation {
    int n_max = 50;
    double tail_tolerance = 1e-12;

    int size() const { return n_max + 1; }

    /// Thermal probability mass above n_max, x^(n_max + 1).
    template <typename Scalar>
    Scalar tail_mass(const Squeezing<Scalar> &squeezing) const {
        using std::pow;
        return pow(squeezing.lambda_sq(), Scalar(n_max + 1));
    }

    /// Smallest cutoff (never below `floor`) whose thermal tail is below `tolerance`.
    template <typename Scalar>
    static FockTruncation sufficient_for(const Squeezing<Scalar> &squeezing,
                                         double tolerance = 1e-12, int floor = 50) {
        FockTruncation t{floor, tolerance};
        const double x = static_cast<double>(squeezing.lambda_sq());
        if (x > 0.0) {
            const double needed = std::ceil(std::log(tolerance) / std::log(x));
            t.n_max = std::max(floor, static_cast<int>(needed));
        }
        return t;
    }

    template <typename Scalar>
    void require_covers(const Squeezing<Scalar> &squeezing) const {
        if (n_max < 0) {
            throw ConfigError("Fock truncation must be non-negative");
        }
        const double tail = static_cast<double>(tail_mass(squeezing));
        if (!(tail < tail_tolerance)) {
            std::ostringstream msg;
            msg << "truncation too small: thermal tail mass " << tail << " above n_max = " << n_max
                << " exceeds tolerance " << tail_tolerance;
            throw ConfigError(msg.str());
        }
    }
};

template <typename Scalar>
class PhotonNumberDistribution {
  public:
    /// Validates non-negativity and normalization (within 1e-10).
    explicit PhotonNumberDistribution(FockVector<Scalar> probs) : probs_(std::move(probs)) {
        if (probs_.size() == 0) {
            throw ConfigError("photon-number distribution must be non-empty");
        }
        if ((probs_.array() < Scalar(0)).any()) {
            throw ConfigError("photon-number probabilities must be non-negative");
        }
        using std::abs;
        const Scalar total = compensated_sum(probs_);
        if (!(abs(total - Scalar(1)) <= Scalar(1e-10))) {
            std::ostringstream msg;
            msg << "photon-number distribution sums to " << total;
            throw ConfigError(msg.str());
        }
    }

    const FockVector<Scalar> &probs() const { return probs_; }
    int n_max() const { return static_cast<int>(probs_.size()) - 1; }
    Scalar operator[](int n) const { return n <= n_max() ? probs_(n) : Scalar(0); }

    Scalar mean() const {
        const auto n = FockVector<Scalar>::LinSpaced(probs_.size(), Scalar(0), Scalar(n_max()));
        return compensated_sum(n.cwiseProduct(probs_));
    }

    /// Second factorial moment <n(n-1)>.
    Scalar factorial_moment2() const {
        const auto n = FockVector<Scalar>::LinSpaced(probs_.size(), Scalar(0), Scalar(n_max()));
        return compensated_sum(
            (n.array() * (n.array() - Scalar(1)) * probs_.array()).matrix());
    }

  private:
    FockVector<Scalar> probs_;
};

enum class PovmFamily {
    kClickVacuum,
    kClickFire,
    kPseudoPnr,
    kPnr,
    kReported,  // outcome after a confusion channel
};

/// Diagonal POVM element for one detector outcome.
template <typename Scalar>
struct PovmCoefficients {
    PovmFamily family = PovmFamily::kPnr;
    int outcome = 0;           // m for PNR/PPNR/reported; 0 or 1 for click
    Scalar efficiency{};       // eta
    int num_detectors = 1;     // M for pseudo-PNR
    FockTruncation truncation;
    FockVector<Scalar> c;      // length n_max + 1

    int n_max() const { return static_cast<int>(c.size()) - 1; }
};

template <typename Scalar>
struct HeraldedState {
    PhotonNumberDistribution<Scalar> distribution;
    Scalar herald_probability;
};

namespace detail {

template <typename Scalar>
void require_efficiency(Scalar eta) {
    if (!(eta >= Scalar(0) && eta <= Scalar(1))) {
        std::ostringstream msg;
        msg << "efficiency must lie in [0, 1], got " << eta;
        throw ConfigError(msg.str());
    }
}

inline void require_truncation(const FockTruncation &trunc) {
    if (trunc.n_max < 0) {
        throw ConfigError("Fock truncation must be non-negative");
    }
}

/// x^n for n = 0..n_max.
template <typename Scalar>
FockVector<Scalar> powers(Scalar x, int n_max) {
    FockVector<Scalar> p(n_max + 1);
    using std::pow;
    for (int n = 0; n <= n_max; ++n) {
        p(n) = pow(x, Scalar(n));
    }
    return p;
}

template <typename Scalar>
FockVector<Scalar> fock_index(int n_max) {
    return FockVector<Scalar>::LinSpaced(n_max + 1, Scalar(0), Scalar(n_max));
}

template <typename Scalar>
Scalar binomial(int n, int k) {
    if (k < 0 || k > n) {
        return Scalar(0);
    }
    k = std::min(k, n - k);
    Scalar result(1);
    for (int i = 1; i <= k; ++i) {
        result = result * Scalar(n - k + i) / Scalar(i);
    }
    return result;
}

/// The three weighted moments sum c_n x^n, sum n c_n x^n, sum n(n-1) c_n x^n.
template <typename Scalar>
struct HeraldMoments {
    Scalar zeroth;
    Scalar first;
    Scalar second_factorial;
};

template <typename Scalar>
HeraldMoments<Scalar> herald_moments(const Squeezing<Scalar> &squeezing,
                                     const PovmCoefficients<Scalar> &povm) {
    povm.truncation.require_covers(squeezing);
    const int n_max = povm.n_max();
    const FockVector<Scalar> w = povm.c.cwiseProduct(powers(squeezing.lambda_sq(), n_max));
    const FockVector<Scalar> n = fock_index<Scalar>(n_max);
    return {compensated_sum(w), compensated_sum(n.cwiseProduct(w)),
            compensated_sum((n.array() * (n.array() - Scalar(1)) * w.array()).matrix())};
}

}  // namespace detail

/// Truncated thermal pair-number distribution P(k) = (1 - x) x^k, renormalized
/// over 0..n_max. Throws ConfigError when the tail above n_max is too heavy.
template <typename Scalar>
PhotonNumberDistribution<Scalar> thermal_distribution(const Squeezing<Scalar> &squeezing,
                                                      const FockTruncation &trunc = {}) {
    trunc.require_covers(squeezing);
    FockVector<Scalar> p =
        (Scalar(1) - squeezing.lambda_sq()) * detail::powers(squeezing.lambda_sq(), trunc.n_max);
    p /= compensated_sum(p);
    return PhotonNumberDistribution<Scalar>(std::move(p));
}

/// Click detector: no-fire c_n = (1-eta)^n, fire c_n = 1 - (1-eta)^n.
template <typename Scalar>
PovmCoefficients<Scalar> povm_click(bool fire, Scalar eta, const FockTruncation &trunc = {}) {
    detail::require_efficiency(eta);
    detail::require_truncation(trunc);
    PovmCoefficients<Scalar> povm;
    povm.family = fire ? PovmFamily::kClickFire : PovmFamily::kClickVacuum;
    povm.outcome = fire ? 1 : 0;
    povm.efficiency = eta;
    povm.truncation = trunc;
    const FockVector<Scalar> no_click = detail::powers(Scalar(1) - eta, trunc.n_max);
    povm.c = fire ? FockVector<Scalar>((Scalar(1) - no_click.array()).matrix()) : no_click;
    return povm;
}

/// Pseudo-PNR outcome "m of M click detectors fired" behind a balanced split:
///
///   c_n = C(M, m) sum_j (-1)^j C(m, j) ((1 - eta) + eta (m - j) / M)^n,  n >= m.
template <typename Scalar>
PovmCoefficients<Scalar> povm_ppnr(int m, Scalar eta, int num_detectors,
                                   const FockTruncation &trunc = {}) {
    detail::require_efficiency(eta);
    detail::require_truncation(trunc);
    if (num_detectors < 1) {
        throw ConfigError("pseudo-PNR needs at least one detector");
    }
    if (m < 0 || m > num_detectors) {
        std::ostringstream msg;
        msg << "invalid pseudo-PNR outcome m = " << m << " for M = " << num_detectors;
        throw ConfigError(msg.str());
    }
    PovmCoefficients<Scalar> povm;
    povm.family = PovmFamily::kPseudoPnr;
    povm.outcome = m;
    povm.efficiency = eta;
    povm.num_detectors = num_detectors;
    povm.truncation = trunc;
    povm.c = FockVector<Scalar>::Zero(trunc.n_max + 1);

    const Scalar prefactor = detail::binomial<Scalar>(num_detectors, m);
    for (int n = m; n <= trunc.n_max; ++n) {
        FockVector<Scalar> terms(m + 1);
        for (int j = 0; j <= m; ++j) {
            using std::pow;
            const Scalar base =
                (Scalar(1) - eta) + eta * Scalar(m - j) / Scalar(num_detectors);
            const Scalar sign = (j % 2 == 0) ? Scalar(1) : Scalar(-1);
            terms(j) = sign * detail::binomial<Scalar>(m, j) * pow(base, Scalar(n));
        }
        // Alternating sums lose a few ulps; clamp back into [0, 1].
        povm.c(n) = std::clamp(prefactor * compensated_sum(terms), Scalar(0), Scalar(1));
    }
    return povm;
}

/// Ideal photon-number-resolving outcome m: c_n = C(n, m) (1-eta)^(n-m) eta^m.
template <typename Scalar>
PovmCoefficients<Scalar> povm_pnr(int m, Scalar eta, const FockTruncation &trunc = {}) {
    detail::require_efficiency(eta);
    detail::require_truncation(trunc);
    if (m < 0) {
        throw ConfigError("PNR outcome must be non-negative");
    }
    PovmCoefficients<Scalar> povm;
    povm.family = PovmFamily::kPnr;
    povm.outcome = m;
    povm.efficiency = eta;
    povm.truncation = trunc;
    povm.c = FockVector<Scalar>::Zero(trunc.n_max + 1);
    if (m > trunc.n_max) {
        return povm;
    }
    using std::pow;
    Scalar value = pow(eta, Scalar(m));
    const Scalar loss = Scalar(1) - eta;
    for (int n = m; n <= trunc.n_max; ++n) {
        povm.c(n) = value;
        value = value * Scalar(n + 1) / Scalar(n + 1 - m) * loss;
    }
    return povm;
}

/// PNR outcomes m = first .. first + count - 1, the last one lumping every
/// count at or above it. Together with outcomes below `first` the set is complete.
template <typename Scalar>
std::vector<PovmCoefficients<Scalar>> pnr_outcome_set(Scalar eta, int first, int count,
                                                      const FockTruncation &trunc = {}) {
    if (first < 0 || count < 1) {
        throw ConfigError("PNR outcome set needs first >= 0 and count >= 1");
    }
    std::vector<PovmCoefficients<Scalar>> set;
    set.reserve(count);
    for (int m = first; m < first + count; ++m) {
        set.push_back(povm_pnr(m, eta, trunc));
    }
    auto &last = set.back();
    for (int m = first + count; m <= trunc.n_max; ++m) {
        last.c += povm_pnr(m, eta, trunc).c;
    }
    return set;
}

/// Heralding probability P_h = (1 - x) sum_n c_n x^n.
template <typename Scalar>
Scalar herald_probability(const Squeezing<Scalar> &squeezing,
                          const PovmCoefficients<Scalar> &povm) {
    return (Scalar(1) - squeezing.lambda_sq()) * detail::herald_moments(squeezing, povm).zeroth;
}

/// Signal-arm state conditioned on the herald outcome, P(n) ∝ c_n x^n.
template <typename Scalar>
HeraldedState<Scalar> heralded_state(const Squeezing<Scalar> &squeezing,
                                     const PovmCoefficients<Scalar> &povm) {
    povm.truncation.require_covers(squeezing);
    const FockVector<Scalar> w =
        povm.c.cwiseProduct(detail::powers(squeezing.lambda_sq(), povm.n_max()));
    const Scalar norm = compensated_sum(w);
    if (!(norm > Scalar(0))) {
        throw ComputeError("zero herald probability: outcome cannot occur for this source");
    }
    return {PhotonNumberDistribution<Scalar>(w / norm),
            (Scalar(1) - squeezing.lambda_sq()) * norm};
}

/// g2(0) = <n(n-1)> / <n>^2.
template <typename Scalar>
Scalar g2_of_distribution(const PhotonNumberDistribution<Scalar> &dist) {
    const Scalar mean = dist.mean();
    if (!(mean > Scalar(0))) {
        throw ComputeError("g2 undefined: mean photon number is zero");
    }
    return dist.factorial_moment2() / (mean * mean);
}

/// Heralded g2 straight from the weighted series, without forming the state.
template <typename Scalar>
Scalar g2_heralded(const Squeezing<Scalar> &squeezing, const PovmCoefficients<Scalar> &povm) {
    const auto m = detail::herald_moments(squeezing, povm);
    if (!(m.zeroth > Scalar(0))) {
        throw ComputeError("zero herald probability: outcome cannot occur for this source");
    }
    if (!(m.first > Scalar(0))) {
        throw ComputeError("g2 undefined: heralded mean photon number is zero");
    }
    return m.zeroth * m.second_factorial / (m.first * m.first);
}

/// Small-squeezing limit of g2_click / g2_pnr: (2 - eta) / (2 (1 - eta)).
template <typename Scalar>
Scalar improvement_ratio_limit(Scalar eta) {
    detail::require_efficiency(eta);
    if (eta == Scalar(1)) {
        return std::numeric_limits<Scalar>::infinity();
    }
    return (Scalar(2) - eta) / (Scalar(2) * (Scalar(1) - eta));
}

/// Ratio of click-heralded to single-photon-PNR-heralded g2 at matched source
/// and herald efficiency.
///
/// Returns +infinity at eta = 1, where the PNR g2 vanishes. At eta = 0 both
/// POVMs reduce to c_n ∝ n eta, so the ratio's limit 1 is returned. At
/// lambda = 0 the small-squeezing limit is returned.
template <typename Scalar>
Scalar improvement_ratio(const Squeezing<Scalar> &squeezing, Scalar eta,
                         const FockTruncation &trunc = {}) {
    detail::require_efficiency(eta);
    if (eta == Scalar(1)) {
        return std::numeric_limits<Scalar>::infinity();
    }
    if (eta == Scalar(0)) {
        return Scalar(1);
    }
    if (squeezing.lambda_sq() == Scalar(0)) {
        return improvement_ratio_limit(eta);
    }
    const Scalar click = g2_heralded(squeezing, povm_click(true, eta, trunc));
    const Scalar pnr = g2_heralded(squeezing, povm_pnr(1, eta, trunc));
    return click / pnr;
}

template <typename Scalar>
bool is_divergent_ratio(Scalar r) {
    return std::isinf(static_cast<double>(r));
}

/// Pushes a POVM set through a classification channel:
///
///   c'_n(reported r) = sum_d P(r | d) c_n(d)
///
/// `povm_set[i]` is the outcome labelled `confusion.first_label() + i`.
/// Completeness of the input set is preserved.
template <typename Scalar>
std::vector<PovmCoefficients<Scalar>> apply_confusion(
    std::span<const PovmCoefficients<Scalar>> povm_set, const ConfusionMatrix &confusion) {
    if (static_cast<int>(povm_set.size()) != confusion.dim()) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << povm_set.size() << " POVM outcomes vs "
            << confusion.dim() << "x" << confusion.dim() << " confusion matrix";
        throw ConfigError(msg.str());
    }
    for (const auto &povm : povm_set) {
        if (povm.c.size() != povm_set.front().c.size()) {
            throw ConfigError("dimension mismatch: POVM outcomes use different truncations");
        }
    }
    std::vector<PovmCoefficients<Scalar>> reported;
    reported.reserve(povm_set.size());
    for (int r = 0; r < confusion.dim(); ++r) {
        PovmCoefficients<Scalar> out = povm_set.front();
        out.family = PovmFamily::kReported;
        out.outcome = confusion.first_label() + r;
        out.c.setZero();
        for (int d = 0; d < confusion.dim(); ++d) {
            out.c += Scalar(confusion.matrix()(d, r)) * povm_set[d].c;
        }
        reported.push_back(std::move(out));
    }
    return reported;
}

/// Reported-outcome POVM of a PNR detector whose detected count is classified
/// through `confusion`. Counts above the resolved range share the last row.
template <typename Scalar>
PovmCoefficients<Scalar> pnr_reported_povm(int reported, Scalar eta,
                                           const ConfusionMatrix &confusion,
                                           const FockTruncation &trunc = {}) {
    if (reported < confusion.first_label() || reported > confusion.last_label()) {
        throw ConfigError("reported outcome outside the confusion matrix range");
    }
    const auto set = pnr_outcome_set(eta, confusion.first_label(), confusion.dim(), trunc);
    auto out = apply_confusion<Scalar>(std::span(set), confusion);
    return out[reported - confusion.first_label()];
}

using SqueezingParam = Squeezing<double>;
using Povm = PovmCoefficients<double>;
using PhotonDistribution = PhotonNumberDistribution<double>;

}  // namespace heraldsim

#endif  // HERALDSIM_PHOTON_STATS_HPP
