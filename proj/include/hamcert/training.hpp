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

#include "hamcert/backprop.hpp"
#include "hamcert/dataset.hpp"
#include "hamcert/systems.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <vector>

namespace hamcert::training {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    AdamConfig adam;
    long iterations = 10000;
    long batch_size = 200;
    std::uint64_t seed = 0;
    long checkpoint_every = 100;  // snapshot cadence for divergence recovery

    void validate() const {
        require(adam.lr > 0, "train config: learning rate must be positive");
        require(iterations >= 1, "train config: iterations must be >= 1");
        require(batch_size >= 1, "train config: batch size must be >= 1");
    }
};

struct TrainReport {
    std::vector<double> loss_history;  // per-iteration batch loss
    double final_train_loss = 0.0;     // full-dataset loss of the final model
    double max_batch_loss = 0.0;
    double wall_time_seconds = 0.0;
    long skipped_samples = 0;          // singular-Jacobian skips (transformed model)
};

/// First-moment/second-moment optimizer state over one flat parameter vector.
class Adam {
  public:
    Adam(const AdamConfig& cfg, long n_params)
        : cfg_(cfg), m_(Vec::Zero(n_params)), v_(Vec::Zero(n_params)) {}

    void step(Vec& params, const Vec& grad) {
        ++t_;
        m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
        v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        params -= (cfg_.lr / bc1) * m_.cwiseQuotient(((v_ / bc2).cwiseSqrt().array() + cfg_.eps).matrix());
    }

  private:
    AdamConfig cfg_;
    Vec m_, v_;
    long t_ = 0;
};

namespace detail {

/// Uniform batching without replacement, reshuffled each epoch from the run
/// seed; identical seeds give identical batch schedules.
class BatchSchedule {
  public:
    BatchSchedule(long n_samples, long batch_size, std::uint64_t seed)
        : n_(n_samples), batch_(std::min(batch_size, n_samples)), rng_(seed), order_(n_samples) {
        std::iota(order_.begin(), order_.end(), 0);
        reshuffle();
    }

    std::vector<long> next() {
        if (cursor_ + batch_ > n_) reshuffle();
        std::vector<long> idx(order_.begin() + cursor_, order_.begin() + cursor_ + batch_);
        cursor_ += batch_;
        return idx;
    }

  private:
    void reshuffle() {
        std::shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
    }

    long n_, batch_;
    std::mt19937_64 rng_;
    std::vector<long> order_;
    long cursor_ = 0;
};

struct BatchView {
    const std::vector<integrators::GradientSample>* samples;
    const std::vector<long>* idx;
    size_t size() const { return idx->size(); }
    const integrators::GradientSample& operator[](size_t i) const {
        return (*samples)[static_cast<size_t>((*idx)[i])];
    }
    auto begin() const { return Iter{this, 0}; }
    auto end() const { return Iter{this, idx->size()}; }
    struct Iter {
        const BatchView* view;
        size_t at;
        const integrators::GradientSample& operator*() const { return (*view)[at]; }
        Iter& operator++() { ++at; return *this; }
        bool operator!=(const Iter& o) const { return at != o.at; }
    };
};

}  // namespace detail

/// Gradient-matching training of a scalar Hamiltonian network.
inline TrainReport train(nn::ScalarNet& net, const integrators::GradientDataset& dataset,
                         const LossConfig& loss, const TrainConfig& cfg) {
    cfg.validate();
    require(dataset.size() > 0, "train: dataset is empty");
    require(dataset.dim() == net.input_dim(), "train: dataset/network dims disagree");
    loss.validate(net.input_dim());
    const auto t_start = std::chrono::steady_clock::now();

    detail::BatchSchedule schedule(dataset.size(), cfg.batch_size, cfg.seed);
    Adam adam(cfg.adam, nn::param_count(net));
    nn::NetGrad grad = nn::NetGrad::zeros_like(net);
    TrainReport report;
    report.loss_history.reserve(cfg.iterations);

    Vec last_good = nn::pack_params(net);
    long last_good_iter = -1;
    for (long it = 0; it < cfg.iterations; ++it) {
        if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) {
            last_good = nn::pack_params(net);
            last_good_iter = it - 1;
        }
        const std::vector<long> idx = schedule.next();
        grad.set_zero();
        double batch_loss = std::numeric_limits<double>::quiet_NaN();
        try {
            batch_loss =
                nn::loss_param_gradient(net, detail::BatchView{&dataset.samples, &idx}, loss, grad);
        } catch (const DivergenceError&) {
        }
        if (!std::isfinite(batch_loss))
            throw TrainingDivergedError(
                "training diverged (non-finite loss) at iteration " + std::to_string(it), it,
                last_good_iter, std::move(last_good));
        Vec params = nn::pack_params(net);
        adam.step(params, grad.to_flat());
        nn::unpack_params(net, params);
        report.loss_history.push_back(batch_loss);
    }

    report.max_batch_loss =
        *std::max_element(report.loss_history.begin(), report.loss_history.end());
    {
        nn::NetGrad scratch = nn::NetGrad::zeros_like(net);
        std::vector<long> all(dataset.samples.size());
        std::iota(all.begin(), all.end(), 0);
        report.final_train_loss = nn::loss_param_gradient(
            net, detail::BatchView{&dataset.samples, &all}, loss, scratch);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

/// Mean loss of the transformed model on one batch plus parameter gradients
/// for both networks. Samples whose coordinate-map Jacobian is close to
/// singular are skipped and counted.
inline double transformed_loss_param_gradient(const nn::ScalarNet& hnet,
                                              const nn::VectorNet& cmap,
                                              const std::vector<integrators::GradientSample>& samples,
                                              const std::vector<long>& idx, double p,
                                              const Mat& structure, nn::NetGrad& hgrad,
                                              nn::NetGrad& cgrad, long& skipped) {
    double total = 0.0;
    nn::ScalarTrace trh;
    nn::VectorTrace trc;
    // First pass factors the Jacobians and decides the usable sample count
    // so the batch mean is well-defined before any gradient accumulates.
    std::vector<std::pair<long, Eigen::PartialPivLU<Mat>>> kept;
    kept.reserve(idx.size());
    for (long i : idx) {
        const auto& s = samples[static_cast<size_t>(i)];
        Eigen::PartialPivLU<Mat> lu(nn::jacobian(cmap, s.u));
        const double rcond = lu.rcond();
        if (!(rcond > 0.0) || 1.0 / rcond > dynamics::kMaxJacobianCondition) {
            ++skipped;
            continue;
        }
        kept.emplace_back(i, std::move(lu));
    }
    if (kept.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double w = 1.0 / static_cast<double>(kept.size());

    for (const auto& [i, lu] : kept) {
        const auto& s = samples[static_cast<size_t>(i)];
        const Vec g = nn::input_gradient_traced(hnet, s.u, trh);
        nn::jacobian_traced(cmap, s.u, trc);

        const Vec m = lu.transpose().solve(g);
        const Vec sv = structure * m;
        const Vec f = lu.solve(sv);
        const Vec residual = f - s.dudt;
        total += p == 2.0 ? residual.squaredNorm() : residual.array().abs().pow(p).sum();

        const Vec fbar = pnorm_loss_grad(residual, p);
        const Vec sbar = lu.transpose().solve(fbar);
        const Vec mbar = structure.transpose() * sbar;
        const Vec gbar = lu.solve(mbar);
        Mat jbar = -sbar * f.transpose();
        jbar.noalias() -= m * gbar.transpose();

        nn::accumulate_input_gradient_adjoint(hnet, trh, Vec(w * gbar), hgrad);
        jbar *= w;
        nn::accumulate_vector_adjoints(cmap, trc, nullptr, &jbar, cgrad);
    }
    return total * w;
}

/// Jointly train the Hamiltonian network and the coordinate map through the
/// pullback field. Aborts when more than 1% of visited samples in an epoch
/// hit the singular-Jacobian guard.
inline TrainReport train_transformed(nn::ScalarNet& hnet, nn::VectorNet& cmap,
                                     const integrators::GradientDataset& dataset,
                                     const LossConfig& loss, const TrainConfig& cfg,
                                     const dynamics::StructureMatrix& structure) {
    cfg.validate();
    require(dataset.size() > 0, "train_transformed: dataset is empty");
    require(loss.p >= 1.0, "train_transformed: p must be >= 1");
    require(structure.dim() == hnet.input_dim(),
            "train_transformed: structure/network dims disagree");
    const auto t_start = std::chrono::steady_clock::now();

    detail::BatchSchedule schedule(dataset.size(), cfg.batch_size, cfg.seed);
    const long nh = nn::param_count(hnet);
    const long nc = nn::param_count(cmap);
    Adam adam(cfg.adam, nh + nc);
    nn::NetGrad hgrad = nn::NetGrad::zeros_like(hnet);
    nn::NetGrad cgrad = nn::NetGrad::zeros_like(cmap);
    TrainReport report;
    report.loss_history.reserve(cfg.iterations);

    auto pack_joint = [&]() {
        Vec p(nh + nc);
        p.head(nh) = nn::pack_params(hnet);
        p.tail(nc) = nn::pack_params(cmap);
        return p;
    };
    Vec last_good = pack_joint();
    long last_good_iter = -1;

    const long epoch_len = (dataset.size() + cfg.batch_size - 1) / cfg.batch_size;
    long epoch_visited = 0, epoch_skipped = 0;

    for (long it = 0; it < cfg.iterations; ++it) {
        if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) {
            last_good = pack_joint();
            last_good_iter = it - 1;
        }
        const std::vector<long> idx = schedule.next();
        hgrad.set_zero();
        cgrad.set_zero();
        long skipped_before = report.skipped_samples;
        double batch_loss = std::numeric_limits<double>::quiet_NaN();
        try {
            batch_loss = transformed_loss_param_gradient(hnet, cmap, dataset.samples, idx,
                                                         loss.p, structure.matrix(), hgrad,
                                                         cgrad, report.skipped_samples);
        } catch (const DivergenceError&) {
        }
        epoch_visited += static_cast<long>(idx.size());
        epoch_skipped += report.skipped_samples - skipped_before;
        if (!std::isfinite(batch_loss))
            throw TrainingDivergedError(
                "transformed training diverged (non-finite loss) at iteration " +
                    std::to_string(it),
                it, last_good_iter, std::move(last_good));

        Vec params = pack_joint();
        Vec grad(nh + nc);
        grad.head(nh) = hgrad.to_flat();
        grad.tail(nc) = cgrad.to_flat();
        adam.step(params, grad);
        nn::unpack_params(hnet, Vec(params.head(nh)));
        nn::unpack_params(cmap, Vec(params.tail(nc)));
        report.loss_history.push_back(batch_loss);

        if ((it + 1) % epoch_len == 0) {
            if (epoch_skipped * 100 > epoch_visited)
                throw SingularTransformError(
                    "train_transformed: " + std::to_string(epoch_skipped) + " of " +
                        std::to_string(epoch_visited) +
                        " samples skipped in one epoch (singular coordinate-map Jacobians)",
                    dynamics::kMaxJacobianCondition);
            epoch_visited = epoch_skipped = 0;
        }
    }

    report.max_batch_loss =
        *std::max_element(report.loss_history.begin(), report.loss_history.end());
    {
        nn::NetGrad sh = nn::NetGrad::zeros_like(hnet);
        nn::NetGrad sc = nn::NetGrad::zeros_like(cmap);
        std::vector<long> all(dataset.samples.size());
        std::iota(all.begin(), all.end(), 0);
        long skip_scratch = 0;
        report.final_train_loss = transformed_loss_param_gradient(
            hnet, cmap, dataset.samples, all, loss.p, structure.matrix(), sh, sc, skip_scratch);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

/// Plain regression of a vector field f_NN(u) onto observed derivatives
/// (the neural-ODE baseline).
inline TrainReport train_vector_field(nn::VectorNet& net,
                                      const integrators::GradientDataset& dataset,
                                      const LossConfig& loss, const TrainConfig& cfg) {
    cfg.validate();
    require(dataset.size() > 0, "train_vector_field: dataset is empty");
    require(dataset.dim() == net.input_dim() && dataset.dim() == net.output_dim(),
            "train_vector_field: dataset/network dims disagree");
    const auto t_start = std::chrono::steady_clock::now();

    detail::BatchSchedule schedule(dataset.size(), cfg.batch_size, cfg.seed);
    Adam adam(cfg.adam, nn::param_count(net));
    nn::NetGrad grad = nn::NetGrad::zeros_like(net);
    nn::VectorTrace tr;
    TrainReport report;
    report.loss_history.reserve(cfg.iterations);

    auto batch_pass = [&](const std::vector<long>& idx, nn::NetGrad& g) {
        const double w = 1.0 / static_cast<double>(idx.size());
        double total = 0.0;
        for (long i : idx) {
            const auto& s = dataset.samples[static_cast<size_t>(i)];
            const Vec y = nn::forward_traced(net, s.u, tr);
            const Vec residual = y - s.dudt;
            total += loss.p == 2.0 ? residual.squaredNorm()
                                   : residual.array().abs().pow(loss.p).sum();
            const Vec ybar = w * pnorm_loss_grad(residual, loss.p);
            nn::accumulate_vector_adjoints(net, tr, &ybar, nullptr, g);
        }
        return total * w;
    };

    Vec last_good = nn::pack_params(net);
    long last_good_iter = -1;
    for (long it = 0; it < cfg.iterations; ++it) {
        if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) {
            last_good = nn::pack_params(net);
            last_good_iter = it - 1;
        }
        const std::vector<long> idx = schedule.next();
        grad.set_zero();
        const double batch_loss = batch_pass(idx, grad);
        if (!std::isfinite(batch_loss))
            throw TrainingDivergedError(
                "neural-ODE training diverged (non-finite loss) at iteration " +
                    std::to_string(it),
                it, last_good_iter, std::move(last_good));
        Vec params = nn::pack_params(net);
        adam.step(params, grad.to_flat());
        nn::unpack_params(net, params);
        report.loss_history.push_back(batch_loss);
    }

    report.max_batch_loss =
        *std::max_element(report.loss_history.begin(), report.loss_history.end());
    {
        std::vector<long> all(dataset.samples.size());
        std::iota(all.begin(), all.end(), 0);
        nn::NetGrad scratch = nn::NetGrad::zeros_like(net);
        report.final_train_loss = batch_pass(all, scratch);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

/// Mean offset between a reference energy and the network over a grid of
/// states; adding it to the output bias zeroes the mean error (gauge fix).
inline double align_mean(const nn::ScalarNet& net, const dynamics::EnergyFn& h_true,
                         const std::vector<Vec>& grid) {
    require(!grid.empty(), "align_mean: empty grid");
    double acc = 0.0;
    for (const auto& u : grid) acc += h_true(u) - nn::forward(net, u);
    return acc / static_cast<double>(grid.size());
}

}  // namespace hamcert::training
