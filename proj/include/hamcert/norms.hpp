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

#include "hamcert/network.hpp"

#include <random>
#include <vector>

namespace hamcert::nn {

inline constexpr int kPowerIterations = 200;
inline constexpr double kPowerTolerance = 1e-10;

/// Largest singular value via power iteration on A^T A, driven only by
/// matrix-vector products so structured layers never get materialized.
template <typename ApplyFn, typename ApplyTransposeFn>
double operator_norm_2(const ApplyFn& apply, const ApplyTransposeFn& apply_t, int in_dim) {
    require(in_dim >= 1, "operator_norm_2: empty operator");
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec x(in_dim);
    for (int i = 0; i < in_dim; ++i) x(i) = dist(rng);
    x.normalize();
    double sigma = 0.0;
    for (int it = 0; it < kPowerIterations; ++it) {
        Vec y = apply(x);
        const double s = y.norm();  // Rayleigh estimate ||A x|| with unit x
        if (s == 0.0) return 0.0;
        Vec z = apply_t(y);
        const double zn = z.norm();
        if (zn == 0.0) return s;
        x = z / zn;
        if (it > 0 && std::abs(s - sigma) <= kPowerTolerance * std::max(1.0, s)) {
            sigma = s;
            break;
        }
        sigma = s;
    }
    return sigma;
}

inline double operator_norm_2(const Mat& a) {
    return operator_norm_2([&](const Vec& v) { return Vec(a * v); },
                           [&](const Vec& v) { return Vec(a.transpose() * v); },
                           static_cast<int>(a.cols()));
}

inline double operator_norm_2(const LinearLayer& layer) {
    return operator_norm_2([&](const Vec& v) { return layer.apply_no_bias(v); },
                           [&](const Vec& v) { return layer.apply_transpose(v); },
                           layer.in_dim());
}

/// The measured constants the covering bound consumes: per-layer operator
/// norms c_{A_j}, activation constants (rho, c, rho') per activation layer,
/// the data radius c_u, the loss Lipschitz constant rho_p, and the sample
/// count of the covering estimate.
struct NormProfile {
    std::vector<double> layer_norms;          // c_{A_j}, j = 1..n_l+1
    std::vector<double> act_lipschitz;        // rho_{sigma_j}, j = 1..n_l
    std::vector<double> act_deriv_bound;      // c_{sigma_j}
    std::vector<double> act_deriv_lipschitz;  // rho'_{sigma_j}
    double input_radius = 0.0;                // c_u
    double loss_lipschitz = 0.0;              // rho_p
    long sample_count = 0;                    // n

    int linear_layers() const { return static_cast<int>(layer_norms.size()); }
    int activation_layers() const { return static_cast<int>(act_lipschitz.size()); }

    /// sup ||grad H_NN|| over the input ball: prod c_{A_j} * prod c_{sigma_j}.
    double gradient_norm_bound() const {
        double b = 1.0;
        for (double c : layer_norms) b *= c;
        for (double c : act_deriv_bound) b *= c;
        return b;
    }

    void validate() const {
        require(!layer_norms.empty(), "norm profile: no layers");
        require(activation_layers() + 1 == linear_layers(),
                "norm profile: layer/activation counts inconsistent");
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        for (double v : layer_norms)
            require(positive(v), "norm profile: layer norms must be strictly positive");
        for (int j = 0; j < activation_layers(); ++j)
            require(positive(act_lipschitz[j]) && positive(act_deriv_bound[j]) &&
                        positive(act_deriv_lipschitz[j]),
                    "norm profile: activation constants must be strictly positive "
                    "(smooth nonlinear activations only)");
        require(positive(input_radius), "norm profile: input radius must be positive");
        require(positive(loss_lipschitz), "norm profile: loss Lipschitz must be positive");
        require(sample_count >= 1, "norm profile: sample count must be >= 1");
    }
};

inline NormProfile norm_profile(const ScalarNet& net, double input_radius,
                                double loss_lipschitz, long sample_count) {
    require(input_radius > 0.0, "norm_profile: input radius must be positive");
    NormProfile p;
    for (const auto& l : net.layers()) p.layer_norms.push_back(operator_norm_2(l));
    for (const auto& a : net.activations()) {
        p.act_lipschitz.push_back(a.lipschitz);
        p.act_deriv_bound.push_back(a.deriv_bound);
        p.act_deriv_lipschitz.push_back(a.deriv_lipschitz);
    }
    p.input_radius = input_radius;
    p.loss_lipschitz = loss_lipschitz;
    p.sample_count = sample_count;
    return p;
}

}  // namespace hamcert::nn
