/*
 * Copyright 2026 The hamcert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "hamcert/common.hpp"

#include <optional>

namespace hamcert::training {

enum class LossTarget { RawGradient, SymplecticGradient };

/// Gradient-matching loss: per-sample sum_i |pred_i - target_i|^p, averaged
/// over the batch. The prediction is the network's input gradient, or the
/// structured field S * grad when matching observed time derivatives.
struct LossConfig {
    double p = 2.0;
    LossTarget target = LossTarget::RawGradient;
    std::optional<Mat> structure;  // S, required for SymplecticGradient

    void validate(int dim) const {
        require(p >= 1.0, "loss exponent p must be >= 1");
        if (target == LossTarget::SymplecticGradient) {
            require(structure.has_value(), "symplectic loss needs a structure matrix");
            require(structure->rows() == dim && structure->cols() == dim,
                    "structure matrix dimensions must match the network");
        }
    }
};

inline double pnorm_loss(const Vec& pred, const Vec& target, double p) {
    require(pred.size() == target.size(), "pnorm_loss: dimension mismatch");
    require(p >= 1.0, "pnorm_loss: p must be >= 1");
    if (p == 2.0) return (pred - target).squaredNorm();
    return (pred - target).array().abs().pow(p).sum();
}

/// d/dr of sum_i |r_i|^p; the absolute value is applied before the power so
/// odd p is valid, with subgradient 0 at exact zeros.
inline Vec pnorm_loss_grad(const Vec& residual, double p) {
    if (p == 2.0) return 2.0 * residual;
    Vec g(residual.size());
    for (long i = 0; i < residual.size(); ++i) {
        const double r = residual(i);
        if (r == 0.0) {
            g(i) = 0.0;
        } else {
            const double s = r > 0.0 ? 1.0 : -1.0;
            g(i) = p * std::pow(std::abs(r), p - 1.0) * s;
        }
    }
    return g;
}

}  // namespace hamcert::training
