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

#include "heraldsim/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heraldsim/error.hpp"

namespace heraldsim {

ConfusionMatrix::ConfusionMatrix(Eigen::MatrixXd probabilities, int first_label)
    : matrix_(std::move(probabilities)), first_label_(first_label) {
    if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
        throw ConfigError("confusion matrix must be square and non-empty");
    }
    if (first_label_ < 0) {
        throw ConfigError("confusion matrix labels must be non-negative");
    }
    if ((matrix_.array() < 0.0).any() || !matrix_.allFinite()) {
        throw ConfigError("confusion matrix entries must be finite and non-negative");
    }
    for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
        if (std::abs(matrix_.row(r).sum() - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "confusion matrix row " << r << " sums to " << matrix_.row(r).sum();
            throw ConfigError(msg.str());
        }
    }
}

ConfusionMatrix ConfusionMatrix::identity(int dim, int first_label) {
    if (dim < 1) {
        throw ConfigError("confusion matrix dimension must be positive");
    }
    return ConfusionMatrix(Eigen::MatrixXd::Identity(dim, dim), first_label);
}

ConfusionMatrix ConfusionMatrix::from_pair(double p_1_given_2, double p_2_given_1, int dim) {
    if (dim < 2) {
        throw ConfigError("pairwise confusion needs at least two classes");
    }
    if (!(p_1_given_2 >= 0.0 && p_1_given_2 <= 1.0 && p_2_given_1 >= 0.0 && p_2_given_1 <= 1.0)) {
        throw ConfigError("confusion probabilities must lie in [0, 1]");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
    m(0, 0) = 1.0 - p_2_given_1;
    m(0, 1) = p_2_given_1;
    m(1, 0) = p_1_given_2;
    m(1, 1) = 1.0 - p_1_given_2;
    return ConfusionMatrix(std::move(m), 1);
}

int ConfusionMatrix::row_index(int truth) const {
    if (truth < first_label_) {
        throw ConfigError("true count " + std::to_string(truth) + " below the resolved range");
    }
    return std::min(truth - first_label_, dim() - 1);
}

double ConfusionMatrix::operator()(int truth, int reported) const {
    const int col = reported - first_label_;
    if (col < 0 || col >= dim()) {
        return 0.0;
    }
    return matrix_(row_index(truth), col);
}

std::string to_string(const ConfusionMatrix &confusion) {
    std::ostringstream out;
    out.precision(6);
    for (int r = 0; r < confusion.dim(); ++r) {
        out << "true " << confusion.first_label() + r << ":";
        for (int c = 0; c < confusion.dim(); ++c) {
            out << ' ' << confusion.matrix()(r, c);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace heraldsim
