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

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hamcert::integrators {

using FieldFn = std::function<Vec(const Vec&)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::map<std::string, std::string> meta;

    int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
    size_t size() const { return times.size(); }
};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

namespace dp {
// Butcher tableau of the 7-stage 5(4) pair (FSAL).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Embedded 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output coefficients (quartic continuous extension).
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;
}  // namespace dp

/// One Dormand-Prince step from (t, y) with step h. k1 must hold f(t, y) on
/// entry; on exit k7 = f(t+h, y5) (FSAL). err is the 5th-minus-4th order
/// difference. Exposed separately so order tests can drive fixed steps.
struct DopriStages {
    Vec k1, k2, k3, k4, k5, k6, k7;
};

inline void dopri5_step(const FieldFn& f, const Vec& y, double h, DopriStages& s, Vec& y5,
                        Vec& err) {
    using namespace dp;
    s.k2 = f(y + h * (a21 * s.k1));
    s.k3 = f(y + h * (a31 * s.k1 + a32 * s.k2));
    s.k4 = f(y + h * (a41 * s.k1 + a42 * s.k2 + a43 * s.k3));
    s.k5 = f(y + h * (a51 * s.k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4));
    s.k6 = f(y + h * (a61 * s.k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5));
    y5 = y + h * (a71 * s.k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
    s.k7 = f(y5);
    err = h * (e1 * s.k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
}

struct Dopri45Options {
    double rtol = 1e-8;
    double atol = 1e-10;
    double safety = 0.9;
    double step_grow_exp = 0.7 / 5.0;   // PI controller, current error
    double step_shrink_exp = 0.4 / 5.0; // PI controller, previous error
    double min_factor = 0.1;
    double max_factor = 5.0;
    double initial_step = 0.0;          // 0 = choose automatically
    long max_steps = 20'000'000;
};

namespace detail {

/// Scaled error in the error-per-unit-step convention: the step is accepted
/// when ||e_i / (atol + rtol max(|y0_i|,|y1_i|))||_rms <= h, which makes the
/// global error proportional to the tolerance (slope 1 in a tol sweep).
inline double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol,
                         double atol, double h) {
    double acc = 0.0;
    for (long i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double q = err(i) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(err.size())) / h;
}

/// Standard automatic initial step: match the scale of y and f, refine with
/// one explicit Euler probe of the second derivative.
inline double initial_step(const FieldFn& f, const Vec& y0, const Vec& f0, double span,
                           double rtol, double atol) {
    auto scaled_norm = [&](const Vec& v, const Vec& ref) {
        double acc = 0.0;
        for (long i = 0; i < v.size(); ++i) {
            const double sc = atol + rtol * std::abs(ref(i));
            const double q = v(i) / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(v.size()));
    };
    const double d0 = scaled_norm(y0, y0);
    const double d1 = scaled_norm(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Vec y1 = y0 + h0 * f0;
    const Vec f1 = f(y1);
    const double d2 = scaled_norm(f1 - f0, y0) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    }
    return std::min({100.0 * h0, h1, span});
}

/// Quartic interpolant over an accepted step, theta in [0, 1].
inline Vec dense_eval(const Vec& y0, const Vec& y1, const DopriStages& s, double h,
                      double theta) {
    using namespace dp;
    const Vec ydiff = y1 - y0;
    const Vec bspl = h * s.k1 - ydiff;
    const Vec r4 = ydiff - h * s.k7 - bspl;
    const Vec r5 =
        h * (d1 * s.k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * s.k7);
    return y0 + theta * (ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)));
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control. When `dense_times` is
/// given the trajectory carries interpolated states at exactly those times
/// (which must be nondecreasing and inside [t0, t1]); otherwise it carries
/// the accepted steps.
inline Trajectory dopri45(const FieldFn& field, const Vec& u0, double t0, double t1,
                          const Dopri45Options& opt = {},
                          const std::vector<double>& dense_times = {}) {
    require(opt.rtol > 0 && opt.atol > 0, "dopri45: tolerances must be positive");
    require(t1 > t0, "dopri45: need t1 > t0");
    const double span = t1 - t0;
    for (size_t i = 0; i < dense_times.size(); ++i) {
        require(dense_times[i] >= t0 - 1e-12 && dense_times[i] <= t1 + 1e-12,
                "dopri45: dense output time outside the integration span");
        if (i > 0)
            require(dense_times[i] >= dense_times[i - 1],
                    "dopri45: dense output times must be nondecreasing");
    }

    Trajectory traj;
    const bool dense = !dense_times.empty();
    size_t next_dense = 0;
    auto emit_dense_at = [&](double t, const Vec& y) {
        while (next_dense < dense_times.size() && dense_times[next_dense] <= t + 1e-14) {
            traj.times.push_back(dense_times[next_dense]);
            traj.states.push_back(y);
            ++next_dense;
        }
    };

    double t = t0;
    Vec y = u0;
    DopriStages st;
    st.k1 = field(y);
    if (!all_finite(st.k1) || !all_finite(y))
        throw DivergenceError("dopri45: non-finite state or field at t0");

    if (!dense) {
        traj.times.push_back(t);
        traj.states.push_back(y);
    } else {
        emit_dense_at(t, y);
    }

    double h = opt.initial_step > 0 ? opt.initial_step
                                    : detail::initial_step(field, y, st.k1, span, opt.rtol,
                                                           opt.atol);
    double prev_err = 1.0;  // neutral PI memory for the first step
    Vec y5, err;
    for (long step = 0; step < opt.max_steps; ++step) {
        if (t >= t1) break;
        if (h < 1e-14 * span)
            throw StiffnessError("dopri45: step size underflow at t = " + format_g17(t));
        h = std::min(h, t1 - t);

        dopri5_step(field, y, h, st, y5, err);
        if (!all_finite(y5))
            throw DivergenceError("dopri45: non-finite state at t = " + format_g17(t));
        const double en = detail::error_norm(err, y, y5, opt.rtol, opt.atol, h);

        if (en <= 1.0) {
            if (dense) {
                // interpolate dense outputs inside (t, t+h]
                while (next_dense < dense_times.size() &&
                       dense_times[next_dense] <= t + h + 1e-14) {
                    const double theta =
                        std::clamp((dense_times[next_dense] - t) / h, 0.0, 1.0);
                    traj.times.push_back(dense_times[next_dense]);
                    traj.states.push_back(detail::dense_eval(y, y5, st, h, theta));
                    ++next_dense;
                }
            }
            t += h;
            y.swap(y5);
            st.k1.swap(st.k7);  // FSAL
            if (!dense) {
                traj.times.push_back(t);
                traj.states.push_back(y);
            }
            const double grow = std::pow(std::max(en, 1e-16), -opt.step_grow_exp) *
                                std::pow(prev_err, opt.step_shrink_exp);
            h *= std::clamp(opt.safety * grow, opt.min_factor, opt.max_factor);
            prev_err = std::max(en, 1e-16);
        } else {
            h *= std::clamp(opt.safety * std::pow(en, -opt.step_grow_exp), opt.min_factor,
                            1.0);
        }
    }
    if (t < t1)
        throw NumericError("dopri45: step budget exhausted before reaching t1");
    if (dense && next_dense < dense_times.size()) emit_dense_at(t1 + 1e-12, y);
    return traj;
}

// ---------------------------------------------------------------------------
// Classical fixed-step RK4 (cheap baseline)
// ---------------------------------------------------------------------------

inline Trajectory rk4_fixed(const FieldFn& field, const Vec& u0, double t0, double dt,
                            long n_steps) {
    require(dt > 0, "rk4_fixed: dt must be positive");
    require(n_steps >= 1, "rk4_fixed: need at least one step");
    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    Vec y = u0;
    double t = t0;
    traj.times.push_back(t);
    traj.states.push_back(y);
    for (long i = 0; i < n_steps; ++i) {
        const Vec k1 = field(y);
        const Vec k2 = field(y + 0.5 * dt * k1);
        const Vec k3 = field(y + 0.5 * dt * k2);
        const Vec k4 = field(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!all_finite(y))
            throw DivergenceError("rk4_fixed: non-finite state at step " + std::to_string(i));
        t = t0 + dt * static_cast<double>(i + 1);
        traj.times.push_back(t);
        traj.states.push_back(y);
    }
    return traj;
}

}  // namespace hamcert::integrators
