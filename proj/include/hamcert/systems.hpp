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
#include "hamcert/structure.hpp"

#include <functional>
#include <limits>
#include <map>
#include <string>

namespace hamcert::dynamics {

using FieldFn = std::function<Vec(const Vec&)>;
using EnergyFn = std::function<double(const Vec&)>;
using GradientFn = std::function<Vec(const Vec&)>;

// ---------------------------------------------------------------------------
// Benchmark systems
// ---------------------------------------------------------------------------

/// Planar double pendulum, state [theta1, theta2, phi1, phi2] with
/// phi = d theta / dt. Angles are measured so that theta = 0 is the upright
/// position (potential +g*cos), matching the energy below; theta = pi is the
/// rest point. The accelerations come from the Euler-Lagrange equations of
///   L = T - V,  T = (m1+m2) l1^2 phi1^2 / 2 + m2 l2^2 phi2^2 / 2
///                 + m2 l1 l2 phi1 phi2 cos(theta1 - theta2),
///   V = g (m1+m2) l1 cos(theta1) + g m2 l2 cos(theta2),
/// solved as a 2x2 linear system in (dphi1, dphi2); H = T + V is conserved
/// along the flow by construction.
struct DoublePendulumParams {
    double l1 = 1.0, l2 = 1.0, m1 = 1.0, m2 = 2.0, g = 9.8;
};

inline Vec double_pendulum_field(const DoublePendulumParams& p, const Vec& s) {
    require(s.size() == 4, "double_pendulum_field: state must be 4-dimensional");
    require(p.l1 > 0 && p.l2 > 0 && p.m1 > 0 && p.m2 > 0 && p.g > 0,
            "double_pendulum_field: parameters must be positive");
    const double th1 = s(0), th2 = s(1), f1 = s(2), f2 = s(3);
    const double delta = th1 - th2;
    const double cd = std::cos(delta), sd = std::sin(delta);
    const double msum = p.m1 + p.m2;

    Eigen::Matrix2d mass;
    mass << msum * p.l1 * p.l1, p.m2 * p.l1 * p.l2 * cd,
            p.m2 * p.l1 * p.l2 * cd, p.m2 * p.l2 * p.l2;
    Eigen::Vector2d rhs;
    rhs << -p.m2 * p.l1 * p.l2 * f2 * f2 * sd + p.g * msum * p.l1 * std::sin(th1),
           p.m2 * p.l1 * p.l2 * f1 * f1 * sd + p.g * p.m2 * p.l2 * std::sin(th2);
    const Eigen::Vector2d acc = mass.inverse() * rhs;

    Vec out(4);
    out << f1, f2, acc(0), acc(1);
    return out;
}

inline double double_pendulum_energy(const DoublePendulumParams& p, const Vec& s) {
    require(s.size() == 4, "double_pendulum_energy: state must be 4-dimensional");
    const double th1 = s(0), th2 = s(1), f1 = s(2), f2 = s(3);
    const double msum = p.m1 + p.m2;
    return 0.5 * msum * p.l1 * p.l1 * f1 * f1 + 0.5 * p.m2 * p.l2 * p.l2 * f2 * f2 +
           p.m2 * p.l1 * p.l2 * f1 * f2 * std::cos(th1 - th2) +
           p.g * msum * p.l1 * std::cos(th1) + p.g * p.m2 * p.l2 * std::cos(th2);
}

/// Two masses chained to a wall by two springs, state [q1, q2, v1, v2].
/// H(q, p) = p1^2/(2 m1) + p2^2/(2 m2) + k1 (q1 - l1)^2 / 2
///         + k2 (q2 - q1 - l2)^2 / 2 with p_i = m_i v_i.
struct MassSpringParams {
    double k1 = 1.0, k2 = 1.0, l1 = 1.0, l2 = 1.0, m1 = 1.0, m2 = 2.0;
};

inline Vec mass_spring_field(const MassSpringParams& p, const Vec& s) {
    require(s.size() == 4, "mass_spring_field: state must be 4-dimensional");
    require(p.k1 > 0 && p.k2 > 0 && p.m1 > 0 && p.m2 > 0,
            "mass_spring_field: masses and spring constants must be positive");
    const double q1 = s(0), q2 = s(1), v1 = s(2), v2 = s(3);
    Vec out(4);
    out << v1, v2,
        -p.k1 / p.m1 * (q1 - p.l1) + p.k2 / p.m1 * (q2 - q1 - p.l2),
        -p.k2 / p.m2 * (q2 - q1 - p.l2);
    return out;
}

inline double mass_spring_energy(const MassSpringParams& p, const Vec& s) {
    require(s.size() == 4, "mass_spring_energy: state must be 4-dimensional");
    const double q1 = s(0), q2 = s(1), v1 = s(2), v2 = s(3);
    const double p1 = p.m1 * v1, p2 = p.m2 * v2;
    const double d1 = q1 - p.l1, d2 = q2 - q1 - p.l2;
    return p1 * p1 / (2 * p.m1) + p2 * p2 / (2 * p.m2) + 0.5 * p.k1 * d1 * d1 +
           0.5 * p.k2 * d2 * d2;
}

/// Semi-discrete KdV on a periodic grid. The discrete energy is
///   H(u) = sum_x [ alpha u^3/6 - beta ((D_f u)^2 + (D_b u)^2)/4 ] dx,
/// its scaled variational derivative (1/dx) dH/du = alpha u^2/2 + beta D_2 u,
/// and the flow is du/dt = D (alpha u^2/2 + beta D_2 u) with the central
/// difference D, so dH/dt vanishes by skewness of D.
struct KdvParams {
    double alpha = -1.0;
    double beta = -0.022 * 0.022;
    double dx = 0.1;
};

inline Vec kdv_variational_derivative(const KdvParams& p, const Vec& u) {
    const int n = static_cast<int>(u.size());
    require(n >= 4, "kdv: grid length must be >= 4");
    const Mat d2 = second_difference_matrix(n, p.dx);
    return (0.5 * p.alpha * u.array().square()).matrix() + p.beta * (d2 * u);
}

inline Vec kdv_field(const KdvParams& p, const Vec& u) {
    const int n = static_cast<int>(u.size());
    require(n >= 4 && p.dx > 0, "kdv_field: need grid length >= 4 and dx > 0");
    const Mat d = central_difference_matrix(n, p.dx);
    return d * kdv_variational_derivative(p, u);
}

inline double kdv_energy(const KdvParams& p, const Vec& u) {
    const int n = static_cast<int>(u.size());
    require(n >= 4 && p.dx > 0, "kdv_energy: need grid length >= 4 and dx > 0");
    const Mat df = forward_difference(n, p.dx);
    const Mat db = backward_difference(n, p.dx);
    const Vec fu = df * u;
    const Vec bu = db * u;
    double h = 0.0;
    for (int i = 0; i < n; ++i)
        h += (p.alpha * u(i) * u(i) * u(i) / 6.0 -
              0.25 * p.beta * (fu(i) * fu(i) + bu(i) * bu(i))) *
             p.dx;
    return h;
}

/// Unit-mass harmonic oscillator, state [q, p], H = p^2/(2m) + k q^2/2.
struct HarmonicParams {
    double k = 1.0, m = 1.0;
};

/// An analytic benchmark: field, energy, exact energy gradient, dims, and a
/// parameter map for provenance records.
struct ReferenceSystem {
    std::string name;
    int dim = 0;
    std::map<std::string, double> params;
    FieldFn vector_field;
    EnergyFn hamiltonian;
    GradientFn hamiltonian_gradient;  // may be empty when unused
};

inline ReferenceSystem make_double_pendulum(const DoublePendulumParams& p = {}) {
    ReferenceSystem s;
    s.name = "double_pendulum";
    s.dim = 4;
    s.params = {{"l1", p.l1}, {"l2", p.l2}, {"m1", p.m1}, {"m2", p.m2}, {"g", p.g}};
    s.vector_field = [p](const Vec& u) { return double_pendulum_field(p, u); };
    s.hamiltonian = [p](const Vec& u) { return double_pendulum_energy(p, u); };
    return s;
}

inline ReferenceSystem make_mass_spring(const MassSpringParams& p = {}) {
    ReferenceSystem s;
    s.name = "mass_spring";
    s.dim = 4;
    s.params = {{"k1", p.k1}, {"k2", p.k2}, {"l1", p.l1},
                {"l2", p.l2}, {"m1", p.m1}, {"m2", p.m2}};
    s.vector_field = [p](const Vec& u) { return mass_spring_field(p, u); };
    s.hamiltonian = [p](const Vec& u) { return mass_spring_energy(p, u); };
    return s;
}

inline ReferenceSystem make_kdv(int n_sites = 20, const KdvParams& p = {}) {
    ReferenceSystem s;
    s.name = "kdv_semidiscrete";
    s.dim = n_sites;
    s.params = {{"alpha", p.alpha}, {"beta", p.beta}, {"dx", p.dx},
                {"n_sites", static_cast<double>(n_sites)}};
    s.vector_field = [p](const Vec& u) { return kdv_field(p, u); };
    s.hamiltonian = [p](const Vec& u) { return kdv_energy(p, u); };
    return s;
}

inline ReferenceSystem make_harmonic_oscillator(const HarmonicParams& p = {}) {
    ReferenceSystem s;
    s.name = "harmonic_oscillator";
    s.dim = 2;
    s.params = {{"k", p.k}, {"m", p.m}};
    s.vector_field = [p](const Vec& u) {
        require(u.size() == 2, "harmonic oscillator: state must be 2-dimensional");
        Vec out(2);
        out << u(1) / p.m, -p.k * u(0);
        return out;
    };
    s.hamiltonian = [p](const Vec& u) {
        return u(1) * u(1) / (2 * p.m) + 0.5 * p.k * u(0) * u(0);
    };
    s.hamiltonian_gradient = [p](const Vec& u) {
        Vec g(2);
        g << p.k * u(0), u(1) / p.m;
        return g;
    };
    return s;
}

// ---------------------------------------------------------------------------
// Model vector fields
// ---------------------------------------------------------------------------

inline Vec hnn_vector_field(const nn::ScalarNet& net, const StructureMatrix& s, const Vec& u) {
    require(s.dim() == net.input_dim(), "hnn_vector_field: structure/network dims disagree");
    return s.apply(nn::input_gradient(net, u));
}

inline constexpr double kMaxJacobianCondition = 1e12;

/// Pullback field (du/dx)^{-1} S (du/dx)^{-T} dH/dx evaluated with two
/// linear solves against a single LU factorization; aborts on badly
/// conditioned Jacobians instead of amplifying noise.
inline Vec transformed_vector_field(const nn::ScalarNet& hnet, const nn::VectorNet& cmap,
                                    const StructureMatrix& s, const Vec& x) {
    require(cmap.input_dim() == x.size() && cmap.output_dim() == x.size(),
            "transformed_vector_field: coordinate map must be square");
    require(hnet.input_dim() == x.size(), "transformed_vector_field: dims disagree");
    const Mat jac = nn::jacobian(cmap, x);
    Eigen::PartialPivLU<Mat> lu(jac);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || 1.0 / rcond > kMaxJacobianCondition)
        throw SingularTransformError(
            "transformed_vector_field: coordinate-map Jacobian condition estimate " +
                format_g17(rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()),
            rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    const Vec grad = nn::input_gradient(hnet, x);
    const Vec m = lu.transpose().solve(grad);
    return lu.solve(s.apply(m));
}

/// dH/dt along a field: <grad H(u), field(u)>.
inline double energy_rate(const GradientFn& grad_h, const FieldFn& field, const Vec& u) {
    return grad_h(u).dot(field(u));
}

}  // namespace hamcert::dynamics
