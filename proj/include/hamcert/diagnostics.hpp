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

#include "hamcert/dataset.hpp"
#include "hamcert/loss.hpp"
#include "hamcert/network.hpp"
#include "hamcert/systems.hpp"

#include <limits>
#include <vector>

namespace hamcert::diagnostics {

struct EnergyDrift {
    std::vector<double> times;
    std::vector<double> series;  // H(u(t)) - H(u(0))
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

inline EnergyDrift energy_drift(const integrators::Trajectory& traj,
                                const dynamics::EnergyFn& energy) {
    require(!traj.states.empty(), "energy_drift: empty trajectory");
    EnergyDrift d;
    d.times = traj.times;
    d.series.reserve(traj.states.size());
    const double h0 = energy(traj.states.front());
    double acc = 0.0;
    for (const auto& u : traj.states) {
        const double v = energy(u) - h0;
        d.series.push_back(v);
        d.max_abs = std::max(d.max_abs, std::abs(v));
        acc += std::abs(v);
    }
    d.mean_abs = acc / static_cast<double>(d.series.size());
    return d;
}

struct RecurrenceResult {
    double t_best = 0.0;
    double min_error = std::numeric_limits<double>::infinity();
};

/// Relative L2 distance to a reference state, minimized over the samples
/// with t in [t_center - window, t_center + window].
inline RecurrenceResult recurrence_error(const integrators::Trajectory& traj,
                                         const Vec& reference_state, double t_center,
                                         double window) {
    require(window > 0.0, "recurrence_error: window must be positive");
    require(!traj.states.empty(), "recurrence_error: empty trajectory");
    require(reference_state.size() == traj.states.front().size(),
            "recurrence_error: reference dimension mismatch");
    const double ref_norm = reference_state.norm();
    require(ref_norm > 0.0, "recurrence_error: zero reference state");
    RecurrenceResult r;
    bool found = false;
    for (size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < t_center - window || t > t_center + window) continue;
        found = true;
        const double e = (traj.states[i] - reference_state).norm() / ref_norm;
        if (e < r.min_error) {
            r.min_error = e;
            r.t_best = t;
        }
    }
    require(found, "recurrence_error: no trajectory samples inside the window");
    return r;
}

struct ErrorStats {
    double mean = 0.0;
    double max = 0.0;
};

/// Per-sample gradient-matching loss statistics over a dataset.
inline ErrorStats gradient_test_error(const nn::ScalarNet& net,
                                      const integrators::GradientDataset& dataset,
                                      const training::LossConfig& loss) {
    require(dataset.size() > 0, "gradient_test_error: empty dataset");
    loss.validate(net.input_dim());
    ErrorStats st;
    for (const auto& s : dataset.samples) {
        const Vec g = nn::input_gradient(net, s.u);
        const Vec pred =
            loss.target == training::LossTarget::SymplecticGradient ? Vec(*loss.structure * g) : g;
        const double e = training::pnorm_loss(pred, s.dudt, loss.p);
        st.mean += e;
        st.max = std::max(st.max, e);
    }
    st.mean /= static_cast<double>(dataset.size());
    return st;
}

struct AbsErrorStats {
    double mean_abs = 0.0;
    double max_abs = 0.0;
};

/// |H_true - H_NN| statistics over a grid of states. Align the network's
/// mean first (align_mean) so the gauge freedom does not pollute the error.
inline AbsErrorStats hamiltonian_value_error(const nn::ScalarNet& net,
                                             const dynamics::EnergyFn& h_true,
                                             const std::vector<Vec>& grid) {
    require(!grid.empty(), "hamiltonian_value_error: empty grid");
    AbsErrorStats st;
    for (const auto& u : grid) {
        const double e = std::abs(h_true(u) - nn::forward(net, u));
        st.mean_abs += e;
        st.max_abs = std::max(st.max_abs, e);
    }
    st.mean_abs /= static_cast<double>(grid.size());
    return st;
}

}  // namespace hamcert::diagnostics
