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
#include <utility>

namespace hamcert::nn {

enum class LayerKind { Dense, CircularConv1d };

inline std::string to_string(LayerKind k) {
    return k == LayerKind::Dense ? "dense" : "circular_conv_1d";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "dense") return LayerKind::Dense;
    if (s == "circular_conv_1d") return LayerKind::CircularConv1d;
    throw ConfigError("unknown layer kind: " + s);
}

/// A linear map plus bias. Two parameterizations share one interface:
///
///  - dense:            y = W x + b with W of shape (out x in);
///  - circular_conv_1d: a 1-D convolution with periodic wrap over n_sites
///    grid positions. States are stored site-major, u[site*channels + ch],
///    so a column-major (channels x n_sites) view of the vector is free.
///
/// The conv kernel is kept as a matrix of shape (out_ch x kernel*in_ch)
/// whose j-th column block of width in_ch is the tap acting on input sites
/// shifted by (j - kernel/2). The implied circulant-block matrix is
/// recoverable via to_dense(); apply() must agree with it exactly.
class LinearLayer {
  public:
    static LinearLayer dense(Mat weights, Vec bias) {
        require(weights.rows() == bias.size(), "dense layer: bias size must match rows");
        require(weights.rows() > 0 && weights.cols() > 0, "dense layer: empty weight matrix");
        LinearLayer l;
        l.kind_ = LayerKind::Dense;
        l.weights_ = std::move(weights);
        l.bias_ = std::move(bias);
        l.in_dim_ = static_cast<int>(l.weights_.cols());
        l.out_dim_ = static_cast<int>(l.weights_.rows());
        return l;
    }

    static LinearLayer circular_conv1d(int in_channels, int out_channels, int kernel,
                                       int n_sites, Mat taps, Vec bias) {
        require(in_channels > 0 && out_channels > 0 && n_sites > 0, "conv layer: bad dims");
        require(kernel > 0 && kernel % 2 == 1, "conv layer: kernel size must be odd");
        require(kernel <= n_sites, "conv layer: kernel larger than grid");
        require(taps.rows() == out_channels && taps.cols() == kernel * in_channels,
                "conv layer: taps must be (out_channels x kernel*in_channels)");
        require(bias.size() == out_channels, "conv layer: bias size must be out_channels");
        LinearLayer l;
        l.kind_ = LayerKind::CircularConv1d;
        l.weights_ = std::move(taps);
        l.bias_ = std::move(bias);
        l.in_channels_ = in_channels;
        l.out_channels_ = out_channels;
        l.kernel_ = kernel;
        l.n_sites_ = n_sites;
        l.in_dim_ = in_channels * n_sites;
        l.out_dim_ = out_channels * n_sites;
        return l;
    }

    LayerKind kind() const { return kind_; }
    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    int in_channels() const { return in_channels_; }
    int out_channels() const { return out_channels_; }
    int kernel_size() const { return kernel_; }
    int n_sites() const { return n_sites_; }

    const Mat& weights() const { return weights_; }
    const Vec& bias() const { return bias_; }
    Mat& weights() { return weights_; }
    Vec& bias() { return bias_; }

    long param_count() const { return weights_.size() + bias_.size(); }

    Vec apply(const Vec& x) const {
        Vec y = apply_no_bias(x);
        add_bias(y);
        return y;
    }

    Vec apply_no_bias(const Vec& x) const {
        require(x.size() == in_dim_, "layer apply: dimension mismatch");
        if (kind_ == LayerKind::Dense) return weights_ * x;
        Eigen::Map<const Mat> X(x.data(), in_channels_, n_sites_);
        Mat Y = Mat::Zero(out_channels_, n_sites_);
        const int off = kernel_ / 2;
        for (int j = 0; j < kernel_; ++j) {
            const auto Kj = weights_.middleCols(static_cast<long>(j) * in_channels_, in_channels_);
            if (kernel_ == 1) {
                Y.noalias() += Kj * X;
            } else {
                Y.noalias() += Kj * shifted_cols(X, j - off);
            }
        }
        Vec y(out_dim_);
        Eigen::Map<Mat>(y.data(), out_channels_, n_sites_) = Y;
        return y;
    }

    /// y = A^T v; the adjoint of apply_no_bias.
    Vec apply_transpose(const Vec& v) const {
        require(v.size() == out_dim_, "layer apply_transpose: dimension mismatch");
        if (kind_ == LayerKind::Dense) return weights_.transpose() * v;
        Eigen::Map<const Mat> V(v.data(), out_channels_, n_sites_);
        Mat X = Mat::Zero(in_channels_, n_sites_);
        const int off = kernel_ / 2;
        for (int j = 0; j < kernel_; ++j) {
            const auto Kj = weights_.middleCols(static_cast<long>(j) * in_channels_, in_channels_);
            if (kernel_ == 1) {
                X.noalias() += Kj.transpose() * V;
            } else {
                X.noalias() += Kj.transpose() * shifted_cols(V, -(j - off));
            }
        }
        Vec x(in_dim_);
        Eigen::Map<Mat>(x.data(), in_channels_, n_sites_) = X;
        return x;
    }

    /// dW += projection of the outer product (out_adj)(in_val)^T onto this
    /// layer's parameterization. For conv layers weight sharing makes this a
    /// sum over sites per tap.
    void add_weight_grad(const Vec& out_adj, const Vec& in_val, Mat& dw) const {
        require(out_adj.size() == out_dim_ && in_val.size() == in_dim_,
                "layer add_weight_grad: dimension mismatch");
        if (kind_ == LayerKind::Dense) {
            dw.noalias() += out_adj * in_val.transpose();
            return;
        }
        Eigen::Map<const Mat> G(out_adj.data(), out_channels_, n_sites_);
        Eigen::Map<const Mat> Z(in_val.data(), in_channels_, n_sites_);
        const int off = kernel_ / 2;
        for (int j = 0; j < kernel_; ++j) {
            auto block = dw.middleCols(static_cast<long>(j) * in_channels_, in_channels_);
            if (kernel_ == 1) {
                block.noalias() += G * Z.transpose();
            } else {
                block.noalias() += G * shifted_cols(Z, j - off).transpose();
            }
        }
    }

    void add_bias_grad(const Vec& out_adj, Vec& db) const {
        require(out_adj.size() == out_dim_, "layer add_bias_grad: dimension mismatch");
        if (kind_ == LayerKind::Dense) {
            db += out_adj;
            return;
        }
        Eigen::Map<const Mat> G(out_adj.data(), out_channels_, n_sites_);
        db += G.rowwise().sum();
    }

    /// Fold a full (out_dim x in_dim) weight-gradient matrix onto the layer
    /// parameterization. Used when an adjoint is naturally matrix-valued.
    void add_dense_weight_grad(const Mat& dense_grad, Mat& dw) const {
        require(dense_grad.rows() == out_dim_ && dense_grad.cols() == in_dim_,
                "layer add_dense_weight_grad: dimension mismatch");
        if (kind_ == LayerKind::Dense) {
            dw += dense_grad;
            return;
        }
        const int off = kernel_ / 2;
        for (int j = 0; j < kernel_; ++j) {
            const int tau = j - off;
            auto block = dw.middleCols(static_cast<long>(j) * in_channels_, in_channels_);
            for (int o = 0; o < out_channels_; ++o)
                for (int c = 0; c < in_channels_; ++c) {
                    double s = 0.0;
                    for (int x = 0; x < n_sites_; ++x) {
                        const int xs = mod(x + tau, n_sites_);
                        s += dense_grad(static_cast<long>(x) * out_channels_ + o,
                                        static_cast<long>(xs) * in_channels_ + c);
                    }
                    block(o, c) += s;
                }
        }
    }

    /// Explicit matrix of the linear part. Conv layers expand to their
    /// circulant-block matrix; intended for small sizes (tests, norms).
    Mat to_dense() const {
        if (kind_ == LayerKind::Dense) return weights_;
        Mat A = Mat::Zero(out_dim_, in_dim_);
        const int off = kernel_ / 2;
        for (int j = 0; j < kernel_; ++j) {
            const int tau = j - off;
            const auto Kj = weights_.middleCols(static_cast<long>(j) * in_channels_, in_channels_);
            for (int x = 0; x < n_sites_; ++x) {
                const int xs = mod(x + tau, n_sites_);
                for (int o = 0; o < out_channels_; ++o)
                    for (int c = 0; c < in_channels_; ++c)
                        A(static_cast<long>(x) * out_channels_ + o,
                          static_cast<long>(xs) * in_channels_ + c) += Kj(o, c);
            }
        }
        return A;
    }

  private:
    LinearLayer() = default;

    static int mod(int a, int n) { return ((a % n) + n) % n; }

    void add_bias(Vec& y) const {
        if (kind_ == LayerKind::Dense) {
            y += bias_;
        } else {
            Eigen::Map<Mat> Y(y.data(), out_channels_, n_sites_);
            Y.colwise() += bias_;
        }
    }

    /// Columns rotated so that result.col(x) = M.col((x + tau) mod n).
    static Mat shifted_cols(const Eigen::Ref<const Mat>& M, int tau) {
        const int n = static_cast<int>(M.cols());
        const int t = mod(tau, n);
        if (t == 0) return M;
        Mat R(M.rows(), n);
        R.leftCols(n - t) = M.middleCols(t, n - t);
        R.rightCols(t) = M.leftCols(t);
        return R;
    }

    LayerKind kind_ = LayerKind::Dense;
    Mat weights_;
    Vec bias_;
    int in_dim_ = 0, out_dim_ = 0;
    int in_channels_ = 1, out_channels_ = 1, kernel_ = 1, n_sites_ = 1;
};

}  // namespace hamcert::nn
