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

namespace hamcert::nn {

/// max |d^2 tanh / dx^2| = 4*sqrt(3)/9, attained where tanh(x) = 1/sqrt(3).
/// Obtained once by 1-D maximization; a test re-derives it numerically.
inline constexpr double kTanhCurvatureBound = 0.7698003589195010;

enum class ActKind { Tanh, Identity };

/// Pointwise activation together with the three constants the bound chain
/// consumes: the Lipschitz constant, sup of the first derivative, and the
/// Lipschitz constant of the first derivative.
struct Activation {
    ActKind kind = ActKind::Tanh;
    double lipschitz = 1.0;         // rho_sigma
    double deriv_bound = 1.0;       // c_sigma = sup |sigma'|
    double deriv_lipschitz = 0.0;   // rho'_sigma = sup |sigma''|

    static Activation tanh_act() { return {ActKind::Tanh, 1.0, 1.0, kTanhCurvatureBound}; }
    static Activation identity() { return {ActKind::Identity, 1.0, 1.0, 0.0}; }

    double value(double x) const { return kind == ActKind::Tanh ? std::tanh(x) : x; }

    double deriv(double x) const {
        if (kind == ActKind::Identity) return 1.0;
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }

    double second_deriv(double x) const {
        if (kind == ActKind::Identity) return 0.0;
        const double t = std::tanh(x);
        return -2.0 * t * (1.0 - t * t);
    }

    Vec value(const Vec& x) const {
        if (kind == ActKind::Identity) return x;
        return x.array().tanh().matrix();
    }

    Vec deriv(const Vec& x) const {
        if (kind == ActKind::Identity) return Vec::Ones(x.size());
        return (1.0 - x.array().tanh().square()).matrix();
    }

    Vec second_deriv(const Vec& x) const {
        if (kind == ActKind::Identity) return Vec::Zero(x.size());
        Eigen::ArrayXd t = x.array().tanh();
        return (-2.0 * t * (1.0 - t.square())).matrix();
    }

    bool constants_valid() const {
        auto ok = [](double c) { return std::isfinite(c) && c >= 0.0; };
        return ok(lipschitz) && ok(deriv_bound) && ok(deriv_lipschitz);
    }
};

inline std::string to_string(ActKind k) { return k == ActKind::Tanh ? "tanh" : "identity"; }

inline ActKind act_kind_from_string(const std::string& s) {
    if (s == "tanh") return ActKind::Tanh;
    if (s == "identity") return ActKind::Identity;
    throw ConfigError("unknown activation kind: " + s);
}

inline Activation make_activation(ActKind k) {
    return k == ActKind::Tanh ? Activation::tanh_act() : Activation::identity();
}

}  // namespace hamcert::nn
