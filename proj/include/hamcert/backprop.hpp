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

#include "hamcert/loss.hpp"
#include "hamcert/network.hpp"

#include <vector>

namespace hamcert::nn {

/// Parameter gradients aligned with a network's layer list.
struct NetGrad {
    std::vector<Mat> dW;
    std::vector<Vec> db;

    template <typename Net>
    static NetGrad zeros_like(const Net& net) {
        NetGrad g;
        g.dW.reserve(net.layers().size());
        g.db.reserve(net.layers().size());
        for (const auto& l : net.layers()) {
            g.dW.push_back(Mat::Zero(l.weights().rows(), l.weights().cols()));
            g.db.push_back(Vec::Zero(l.bias().size()));
        }
        return g;
    }

    void set_zero() {
        for (auto& m : dW) m.setZero();
        for (auto& v : db) v.setZero();
    }

    /// Flatten in the same layout as pack_params.
    Vec to_flat() const {
        long n = 0;
        for (size_t k = 0; k < dW.size(); ++k) n += dW[k].size() + db[k].size();
        Vec f(n);
        long at = 0;
        for (size_t k = 0; k < dW.size(); ++k) {
            f.segment(at, dW[k].size()) = Eigen::Map<const Vec>(dW[k].data(), dW[k].size());
            at += dW[k].size();
            f.segment(at, db[k].size()) = db[k];
            at += db[k].size();
        }
        return f;
    }
};

/// Accumulate d<gbar, grad_u H>/dparams into `grad`, where `tr` is the trace
/// of input_gradient_traced at the sample. This is the reverse sweep over
/// the closed-form gradient product (forward layers, activation-derivative
/// diagonals, transposed layers), so losses built on grad_u H get exact
/// second-order parameter gradients without nested generic autodiff.
inline void accumulate_input_gradient_adjoint(const ScalarNet& net, const ScalarTrace& tr,
                                              const Vec& gbar, NetGrad& grad) {
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    const size_t L = layers.size();

    // Reverse the backward chain back[k] = A_k^T scaled[k],
    // scaled[k] = sigma_k'(pre[k]) .* back[k+1].
    std::vector<Vec> pre_adj(L);  // adjoint injected into pre[k] via sigma''
    Vec back_adj = gbar;          // adjoint of back[k], starting at k = 0
    for (size_t k = 0; k + 1 < L; ++k) {
        Vec scaled_adj = layers[k].apply_no_bias(back_adj);
        layers[k].add_weight_grad(tr.scaled[k], back_adj, grad.dW[k]);
        pre_adj[k] = acts[k].second_deriv(tr.pre[k])
                         .cwiseProduct(tr.back[k + 1])
                         .cwiseProduct(scaled_adj);
        back_adj = acts[k].deriv(tr.pre[k]).cwiseProduct(scaled_adj);
    }
    layers[L - 1].add_weight_grad(readout_vector(net), back_adj, grad.dW[L - 1]);

    // Flush the forward-value chain; the final layer's bias never appears.
    Vec z_adj;  // adjoint of post[k]
    for (size_t k = L - 1; k-- > 0;) {
        Vec a_total = std::move(pre_adj[k]);
        if (z_adj.size() > 0) a_total += acts[k].deriv(tr.pre[k]).cwiseProduct(z_adj);
        const Vec& z_in = (k == 0) ? tr.input : tr.post[k - 1];
        layers[k].add_weight_grad(a_total, z_in, grad.dW[k]);
        layers[k].add_bias_grad(a_total, grad.db[k]);
        if (k > 0) z_adj = layers[k].apply_transpose(a_total);
    }
}

/// Forward trace only (no Jacobian partials); enough for value backprop.
inline Vec forward_traced(const VectorNet& net, const Vec& x, VectorTrace& tr) {
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    const size_t L = layers.size();
    tr.input = x;
    tr.pre.resize(L);
    tr.post.resize(L - 1);
    const Vec* z = &tr.input;
    for (size_t k = 0; k < L; ++k) {
        tr.pre[k] = layers[k].apply(*z);
        if (k + 1 < L) {
            tr.post[k] = acts[k].value(tr.pre[k]);
            z = &tr.post[k];
        }
    }
    return tr.pre[L - 1];
}

/// Accumulate parameter gradients of <ybar, f(x)> and/or <Jbar, J(x)>_F for
/// a vector net. Pass Jbar only when `tr` was filled by jacobian_traced.
inline void accumulate_vector_adjoints(const VectorNet& net, const VectorTrace& tr,
                                       const Vec* ybar, const Mat* Jbar, NetGrad& grad) {
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    const size_t L = layers.size();

    std::vector<Vec> pre_adj(L);
    if (Jbar != nullptr) {
        Mat partial_adj = *Jbar;  // adjoint of partial[k], starting at k = L-1
        for (size_t k = L - 1; k >= 1; --k) {
            // partial[k] = A_k * scaled[k-1]
            if (layers[k].kind() == LayerKind::Dense) {
                grad.dW[k].noalias() += partial_adj * tr.scaled[k - 1].transpose();
            } else {
                for (long c = 0; c < partial_adj.cols(); ++c)
                    layers[k].add_weight_grad(partial_adj.col(c), tr.scaled[k - 1].col(c),
                                              grad.dW[k]);
            }
            Mat scaled_adj(layers[k].in_dim(), partial_adj.cols());
            if (layers[k].kind() == LayerKind::Dense) {
                scaled_adj.noalias() = layers[k].weights().transpose() * partial_adj;
            } else {
                for (long c = 0; c < partial_adj.cols(); ++c)
                    scaled_adj.col(c) = layers[k].apply_transpose(partial_adj.col(c));
            }
            // scaled[k-1] = diag(sigma'(pre[k-1])) * partial[k-1]
            Vec diag_adj = scaled_adj.cwiseProduct(tr.partial[k - 1]).rowwise().sum();
            pre_adj[k - 1] = acts[k - 1].second_deriv(tr.pre[k - 1]).cwiseProduct(diag_adj);
            partial_adj = acts[k - 1].deriv(tr.pre[k - 1]).asDiagonal() * scaled_adj;
        }
        layers[0].add_dense_weight_grad(partial_adj, grad.dW[0]);
    }

    // Value chain, with the sigma'' contributions injected at each depth.
    Vec z_adj;
    for (size_t k = L; k-- > 0;) {
        Vec a_total = Vec::Zero(layers[k].out_dim());
        if (k + 1 == L && ybar != nullptr) a_total += *ybar;
        if (k + 1 < L) {
            if (pre_adj[k].size() > 0) a_total += pre_adj[k];
            if (z_adj.size() > 0) a_total += acts[k].deriv(tr.pre[k]).cwiseProduct(z_adj);
        }
        const Vec& z_in = (k == 0) ? tr.input : tr.post[k - 1];
        layers[k].add_weight_grad(a_total, z_in, grad.dW[k]);
        layers[k].add_bias_grad(a_total, grad.db[k]);
        if (k > 0) z_adj = layers[k].apply_transpose(a_total);
    }
}

/// Batch-mean gradient-matching loss and its exact parameter gradient.
/// Returns the mean per-sample loss; adds the gradient of the mean into
/// `grad`. Samples are visited in the given order (fixed-order reduction).
template <typename SampleRange>
double loss_param_gradient(const ScalarNet& net, const SampleRange& samples,
                           const training::LossConfig& loss, NetGrad& grad) {
    loss.validate(net.input_dim());
    const long batch = static_cast<long>(samples.size());
    require(batch > 0, "loss_param_gradient: empty batch");
    const double w = 1.0 / static_cast<double>(batch);
    double total = 0.0;
    ScalarTrace tr;
    for (const auto& sample : samples) {
        const Vec g = input_gradient_traced(net, sample.u, tr);
        Vec residual, gbar;
        if (loss.target == training::LossTarget::SymplecticGradient) {
            residual = *loss.structure * g - sample.dudt;
            gbar = loss.structure->transpose() * training::pnorm_loss_grad(residual, loss.p);
        } else {
            residual = g - sample.dudt;
            gbar = training::pnorm_loss_grad(residual, loss.p);
        }
        total += loss.p == 2.0 ? residual.squaredNorm()
                               : residual.array().abs().pow(loss.p).sum();
        gbar *= w;
        accumulate_input_gradient_adjoint(net, tr, gbar, grad);
    }
    const double mean_loss = total * w;
    if (!std::isfinite(mean_loss))
        throw DivergenceError("loss_param_gradient: non-finite loss value");
    return mean_loss;
}

}  // namespace hamcert::nn
