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

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hamcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kSchemaVersion = 1;

/// Bad user input: malformed config, unknown keys, dimension mismatches.
/// The CLI maps this family to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime (divergence, stiffness, singular transforms).
/// The CLI maps this family to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem trouble. The CLI maps this family to exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct StiffnessError : NumericError {
    explicit StiffnessError(const std::string& what) : NumericError(what) {}
};

struct DivergenceError : NumericError {
    explicit DivergenceError(const std::string& what) : NumericError(what) {}
};

struct SingularTransformError : NumericError {
    double condition_estimate;
    SingularTransformError(const std::string& what, double cond)
        : NumericError(what), condition_estimate(cond) {}
};

struct TrainingDivergedError : NumericError {
    long iteration;
    long last_good_iteration;
    Vec last_good_params;
    TrainingDivergedError(const std::string& what, long iter, long good_iter, Vec good_params)
        : NumericError(what),
          iteration(iter),
          last_good_iteration(good_iter),
          last_good_params(std::move(good_params)) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

/// 17 significant digits: enough to round-trip an IEEE double through text.
inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace hamcert
