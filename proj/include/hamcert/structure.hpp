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

#include <string>

namespace hamcert::dynamics {

/// Periodic forward difference: (D_f u)_i = (u_{i+1} - u_i) / dx.
inline Mat forward_difference(int n, double dx) {
    require(n >= 2 && dx > 0.0, "difference operator: need n >= 2 and dx > 0");
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = -1.0 / dx;
        d(i, (i + 1) % n) = 1.0 / dx;
    }
    return d;
}

/// Periodic backward difference: (D_b u)_i = (u_i - u_{i-1}) / dx.
inline Mat backward_difference(int n, double dx) {
    require(n >= 2 && dx > 0.0, "difference operator: need n >= 2 and dx > 0");
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 1.0 / dx;
        d(i, (i - 1 + n) % n) = -1.0 / dx;
    }
    return d;
}

/// Central difference D = (D_f + D_b) / 2; skew-symmetric and circulant.
inline Mat central_difference_matrix(int n, double dx) {
    return 0.5 * (forward_difference(n, dx) + backward_difference(n, dx));
}

/// Second difference D_2 = D_f D_b; symmetric negative semidefinite.
inline Mat second_difference_matrix(int n, double dx) {
    return forward_difference(n, dx) * backward_difference(n, dx);
}

enum class StructureKind { CanonicalSymplectic, CentralDifference, SecondDifference, Custom };

inline std::string to_string(StructureKind k) {
    switch (k) {
        case StructureKind::CanonicalSymplectic: return "canonical_symplectic";
        case StructureKind::CentralDifference: return "central_difference";
        case StructureKind::SecondDifference: return "second_difference";
        default: return "custom";
    }
}

enum class StructureCharacter { Skew, NegativeSemidefinite, General };

inline std::string to_string(StructureCharacter c) {
    switch (c) {
        case StructureCharacter::Skew: return "skew";
        case StructureCharacter::NegativeSemidefinite: return "negative_semidefinite";
        default: return "general";
    }
}

/// The constant operator S (or G) in du/dt = S dH/du. The declared
/// character is verified numerically at construction so downstream
/// conservation/dissipation reasoning can rely on it.
class StructureMatrix {
  public:
    static StructureMatrix canonical_symplectic(int half_dim) {
        require(half_dim >= 1, "canonical_symplectic: half dimension must be >= 1");
        const int n = 2 * half_dim;
        Mat s = Mat::Zero(n, n);
        s.topRightCorner(half_dim, half_dim) = Mat::Identity(half_dim, half_dim);
        s.bottomLeftCorner(half_dim, half_dim) = -Mat::Identity(half_dim, half_dim);
        return StructureMatrix(StructureKind::CanonicalSymplectic, StructureCharacter::Skew,
                               std::move(s), 0.0);
    }

    static StructureMatrix central_difference(int n, double dx) {
        return StructureMatrix(StructureKind::CentralDifference, StructureCharacter::Skew,
                               central_difference_matrix(n, dx), dx);
    }

    static StructureMatrix second_difference(int n, double dx) {
        return StructureMatrix(StructureKind::SecondDifference,
                               StructureCharacter::NegativeSemidefinite,
                               second_difference_matrix(n, dx), dx);
    }

    static StructureMatrix custom(Mat m, StructureCharacter character) {
        require(m.rows() == m.cols(), "structure matrix must be square");
        return StructureMatrix(StructureKind::Custom, character, std::move(m), 0.0);
    }

    const Mat& matrix() const { return matrix_; }
    StructureKind kind() const { return kind_; }
    StructureCharacter character() const { return character_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }
    double dx() const { return dx_; }

    Vec apply(const Vec& v) const {
        require(v.size() == matrix_.rows(), "structure apply: dimension mismatch");
        return matrix_ * v;
    }

  private:
    StructureMatrix(StructureKind kind, StructureCharacter character, Mat m, double dx)
        : kind_(kind), character_(character), matrix_(std::move(m)), dx_(dx) {
        verify_character();
    }

    void verify_character() const {
        if (character_ == StructureCharacter::Skew) {
            const double asym = (matrix_ + matrix_.transpose()).cwiseAbs().maxCoeff();
            if (asym >= 1e-12)
                throw ConfigError("structure matrix declared skew but ||S + S^T|| = " +
                                  format_g17(asym));
        } else if (character_ == StructureCharacter::NegativeSemidefinite) {
            Mat sym = 0.5 * (matrix_ + matrix_.transpose());
            Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
            const double max_eig = es.eigenvalues().maxCoeff();
            if (max_eig > 1e-10)
                throw ConfigError(
                    "structure matrix declared negative semidefinite but max eigenvalue = " +
                    format_g17(max_eig));
        }
    }

    StructureKind kind_;
    StructureCharacter character_;
    Mat matrix_;
    double dx_;
};

}  // namespace hamcert::dynamics
