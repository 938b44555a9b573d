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

#include "hamcert/integrators.hpp"
#include "hamcert/systems.hpp"

#include <random>
#include <string>
#include <thread>
#include <vector>

namespace hamcert::integrators {

struct GradientSample {
    Vec u;
    Vec dudt;
    double t = 0.0;
};

struct DatasetProvenance {
    std::string system;
    std::map<std::string, double> system_params;
    int n_traj = 0;
    double t0 = 0.0, t1 = 0.0;
    int n_points = 0;
    std::string sampler;
    std::uint64_t seed = 0;
    double rtol = 1e-8, atol = 1e-10;
};

/// Sampled (state, time-derivative) pairs. Derivatives are the analytic
/// field evaluated at the sampled states, exactly as generated; the
/// recorded input_radius is max ||u||_2 over samples.
struct GradientDataset {
    std::vector<GradientSample> samples;
    DatasetProvenance provenance;
    double input_radius = 0.0;

    long size() const { return static_cast<long>(samples.size()); }
    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().u.size()); }

    double recompute_input_radius() const {
        double r = 0.0;
        for (const auto& s : samples) r = std::max(r, s.u.norm());
        return r;
    }
};

enum class InitSampler { StandardNormal, KdvCosine };

inline std::string to_string(InitSampler s) {
    return s == InitSampler::StandardNormal ? "standard_normal" : "kdv_cosine";
}

inline InitSampler sampler_from_string(const std::string& s) {
    if (s == "standard_normal") return InitSampler::StandardNormal;
    if (s == "kdv_cosine") return InitSampler::KdvCosine;
    throw ConfigError("unknown init sampler: " + s);
}

namespace detail {

inline std::vector<Vec> draw_initial_conditions(const dynamics::ReferenceSystem& system,
                                                InitSampler sampler, int n_traj,
                                                std::uint64_t seed) {
    std::vector<Vec> ics;
    ics.reserve(n_traj);
    if (sampler == InitSampler::KdvCosine) {
        const auto it = system.params.find("dx");
        require(it != system.params.end(), "kdv_cosine sampler needs a grid system with dx");
        const double dx = it->second;
        Vec u0(system.dim);
        for (int i = 0; i < system.dim; ++i) u0(i) = std::cos(M_PI * dx * i);
        for (int k = 0; k < n_traj; ++k) ics.push_back(u0);
        return ics;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int k = 0; k < n_traj; ++k) {
        Vec u0(system.dim);
        for (int i = 0; i < system.dim; ++i) u0(i) = dist(rng);
        ics.push_back(std::move(u0));
    }
    return ics;
}

}  // namespace detail

/// Integrate n_traj initial conditions, sample each orbit at n_points
/// uniform times, and attach du/dt by evaluating the analytic field at each
/// sampled state. Trajectories are integrated in parallel; results are
/// merged in initial-condition order, so output is deterministic in seed.
inline GradientDataset generate_dataset(const dynamics::ReferenceSystem& system, int n_traj,
                                        double t0, double t1, int n_points,
                                        InitSampler sampler, std::uint64_t seed,
                                        double rtol = 1e-8, double atol = 1e-10) {
    require(n_traj >= 1 && n_points >= 1, "generate_dataset: need n_traj, n_points >= 1");
    require(n_points == 1 || t1 > t0, "generate_dataset: need t1 > t0 for multiple points");

    std::vector<double> times(n_points);
    for (int i = 0; i < n_points; ++i)
        times[i] = n_points == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) /
                                            static_cast<double>(n_points - 1);

    const std::vector<Vec> ics = detail::draw_initial_conditions(system, sampler, n_traj, seed);

    std::vector<std::vector<Vec>> per_traj(n_traj);
    std::vector<std::string> failures(n_traj);
    auto run_range = [&](int begin, int end) {
        for (int k = begin; k < end; ++k) {
            try {
                if (n_points == 1) {
                    per_traj[k] = {ics[k]};
                } else {
                    Dopri45Options opt;
                    opt.rtol = rtol;
                    opt.atol = atol;
                    Trajectory traj = dopri45(system.vector_field, ics[k], t0, t1, opt, times);
                    per_traj[k] = std::move(traj.states);
                }
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        }
    };

    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_workers = std::max(1, std::min({hw > 0 ? hw : 1, n_traj, 8}));
    if (n_workers == 1) {
        run_range(0, n_traj);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_traj + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const int b = w * chunk;
            const int e = std::min(n_traj, b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
        for (auto& th : pool) th.join();
    }

    for (int k = 0; k < n_traj; ++k)
        if (!failures[k].empty())
            throw NumericError("generate_dataset: trajectory " + std::to_string(k) +
                               " (seed " + std::to_string(seed) + ") failed: " + failures[k]);

    GradientDataset ds;
    ds.provenance = {system.name, system.params, n_traj, t0, t1,
                     n_points,    to_string(sampler), seed, rtol, atol};
    ds.samples.reserve(static_cast<size_t>(n_traj) * n_points);
    for (int k = 0; k < n_traj; ++k) {
        for (int i = 0; i < n_points; ++i) {
            GradientSample s;
            s.t = times[i];
            s.u = per_traj[k][i];
            s.dudt = system.vector_field(s.u);
            ds.input_radius = std::max(ds.input_radius, s.u.norm());
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

}  // namespace hamcert::integrators
