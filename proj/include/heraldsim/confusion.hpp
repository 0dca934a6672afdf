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

#ifndef HERALDSIM_CONFUSION_HPP
#define HERALDSIM_CONFUSION_HPP

#include <Eigen/Dense>

#include <string>

namespace heraldsim {

/// Row-stochastic matrix P(report m | true n) over the resolved photon-number
/// range. Row/column i corresponds to photon number `first_label() + i`.
///
/// The last class is inclusive: a true count above the resolved range uses the
/// last row, and reports in the last column mean "at least that many".
class ConfusionMatrix {
  public:
    ConfusionMatrix() = default;

    /// Validates that entries are non-negative and rows sum to one within 1e-9.
    explicit ConfusionMatrix(Eigen::MatrixXd probabilities, int first_label = 1);

    static ConfusionMatrix identity(int dim, int first_label = 1);

    /// Confusion between the two lowest classes only; higher classes are
    /// resolved perfectly. `p_1_given_2` is P(report 1 | true 2).
    static ConfusionMatrix from_pair(double p_1_given_2, double p_2_given_1, int dim = 4);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    int first_label() const { return first_label_; }
    int last_label() const { return first_label_ + dim() - 1; }

    /// P(report `reported` | true `truth`), labels in photon-number units.
    /// A `truth` above the resolved range maps onto the last row.
    double operator()(int truth, int reported) const;

    int row_index(int truth) const;

    const Eigen::MatrixXd &matrix() const { return matrix_; }

  private:
    Eigen::MatrixXd matrix_;
    int first_label_ = 1;
};

std::string to_string(const ConfusionMatrix &confusion);

}  // namespace heraldsim

#endif  // HERALDSIM_CONFUSION_HPP
