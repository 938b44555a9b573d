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

#include "hamcert/activation.hpp"
#include "hamcert/layer.hpp"

#include <random>
#include <vector>

namespace hamcert::nn {

enum class Readout { SumOfOutputs, FinalScalar };

inline std::string to_string(Readout r) {
    return r == Readout::SumOfOutputs ? "sum_of_outputs" : "final_scalar";
}

inline Readout readout_from_string(const std::string& s) {
    if (s == "sum_of_outputs") return Readout::SumOfOutputs;
    if (s == "final_scalar") return Readout::FinalScalar;
    throw ConfigError("unknown readout: " + s);
}

namespace detail {
inline void check_chain(const std::vector<LinearLayer>& layers,
                        const std::vector<Activation>& acts) {
    require(!layers.empty(), "network needs at least one linear layer");
    require(acts.size() + 1 == layers.size(),
            "network needs exactly one activation between consecutive linear layers");
    require(!acts.empty(), "network needs at least one activation layer");
    for (size_t k = 0; k + 1 < layers.size(); ++k)
        require(layers[k].out_dim() == layers[k + 1].in_dim(),
                "network: layer dimensions do not chain");
    for (const auto& a : acts)
        require(a.constants_valid(), "activation constants must be finite and nonnegative");
}
}  // namespace detail

/// Scalar-output layered network H(u): linear layers interleaved with
/// pointwise activations, followed by a readout that reduces the last
/// layer's output to one real (a plain scalar head, or a sum over all
/// output entries as used for translation-invariant grid energies).
class ScalarNet {
  public:
    ScalarNet(std::vector<LinearLayer> layers, std::vector<Activation> activations,
              Readout readout, std::uint64_t seed = 0)
        : layers_(std::move(layers)),
          activations_(std::move(activations)),
          readout_(readout),
          seed_(seed) {
        detail::check_chain(layers_, activations_);
        if (readout_ == Readout::FinalScalar)
            require(layers_.back().out_dim() == 1, "final_scalar readout needs out_dim 1");
    }

    int input_dim() const { return layers_.front().in_dim(); }
    int output_entries() const { return layers_.back().out_dim(); }
    int activation_count() const { return static_cast<int>(activations_.size()); }
    Readout readout() const { return readout_; }
    std::uint64_t seed() const { return seed_; }

    const std::vector<LinearLayer>& layers() const { return layers_; }
    std::vector<LinearLayer>& layers() { return layers_; }
    const std::vector<Activation>& activations() const { return activations_; }

    /// Shift H by a constant: spread the offset over the summed output
    /// entries so the readout picks up exactly +c. A conv bias is counted
    /// once per site, so dividing by out_dim covers both layer kinds.
    void add_output_offset(double c) {
        LinearLayer& last = layers_.back();
        last.bias().array() += c / static_cast<double>(last.out_dim());
    }

  private:
    std::vector<LinearLayer> layers_;
    std::vector<Activation> activations_;
    Readout readout_;
    std::uint64_t seed_;
};

/// Vector-output layered network (coordinate maps, neural ODE fields).
class VectorNet {
  public:
    VectorNet(std::vector<LinearLayer> layers, std::vector<Activation> activations,
              std::uint64_t seed = 0)
        : layers_(std::move(layers)), activations_(std::move(activations)), seed_(seed) {
        detail::check_chain(layers_, activations_);
    }

    int input_dim() const { return layers_.front().in_dim(); }
    int output_dim() const { return layers_.back().out_dim(); }
    std::uint64_t seed() const { return seed_; }

    const std::vector<LinearLayer>& layers() const { return layers_; }
    std::vector<LinearLayer>& layers() { return layers_; }
    const std::vector<Activation>& activations() const { return activations_; }

  private:
    std::vector<LinearLayer> layers_;
    std::vector<Activation> activations_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Forward / gradient evaluation
// ---------------------------------------------------------------------------

/// Forward pass storage reused across evaluations of one network.
/// pre[k]  = A_k z_{k-1} + b_k, post[k] = sigma_k(pre[k]) for k < L-1.
/// back[k] / scaled[k] hold the reverse accumulation of the gradient
/// product A_1^T D_1 A_2^T D_2 ... A_L^T r.
struct ScalarTrace {
    Vec input;
    std::vector<Vec> pre;
    std::vector<Vec> post;
    std::vector<Vec> back;    // back[k] = A_k^T scaled[k] (input-space at k=0)
    std::vector<Vec> scaled;  // scaled[k] = sigma_k'(pre[k]) .* back[k+1]
};

inline Vec readout_vector(const ScalarNet& net) {
    return Vec::Ones(net.layers().back().out_dim());
}

inline double forward(const ScalarNet& net, const Vec& u) {
    require(u.size() == net.input_dim(), "forward: dimension mismatch");
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    Vec z = u;
    for (size_t k = 0; k < layers.size(); ++k) {
        Vec a = layers[k].apply(z);
        z = (k + 1 < layers.size()) ? acts[k].value(a) : std::move(a);
    }
    return z.sum();
}

/// dH/du as the explicit transposed-layer product, recording the trace.
inline Vec input_gradient_traced(const ScalarNet& net, const Vec& u, ScalarTrace& tr) {
    require(u.size() == net.input_dim(), "input_gradient: dimension mismatch");
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    const size_t L = layers.size();

    tr.input = u;
    tr.pre.resize(L);
    tr.post.resize(L - 1);
    tr.back.resize(L);
    tr.scaled.resize(L - 1);

    const Vec* z = &tr.input;
    for (size_t k = 0; k < L; ++k) {
        tr.pre[k] = layers[k].apply(*z);
        if (k + 1 < L) {
            tr.post[k] = acts[k].value(tr.pre[k]);
            z = &tr.post[k];
        }
    }

    tr.back[L - 1] = layers[L - 1].apply_transpose(readout_vector(net));
    for (size_t k = L - 1; k-- > 0;) {
        tr.scaled[k] = acts[k].deriv(tr.pre[k]).cwiseProduct(tr.back[k + 1]);
        tr.back[k] = layers[k].apply_transpose(tr.scaled[k]);
    }
    return tr.back[0];
}

inline Vec input_gradient(const ScalarNet& net, const Vec& u) {
    ScalarTrace tr;
    return input_gradient_traced(net, u, tr);
}

/// Forward pass of a vector net together with the partial Jacobian
/// products needed to differentiate the Jacobian itself.
struct VectorTrace {
    Vec input;
    std::vector<Vec> pre;
    std::vector<Vec> post;
    std::vector<Mat> partial;  // partial[k] = A_k D_{k-1} ... D_0 A_0
    std::vector<Mat> scaled;   // scaled[k]  = D_k partial[k]
};

inline Vec forward(const VectorNet& net, const Vec& x) {
    require(x.size() == net.input_dim(), "forward: dimension mismatch");
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    Vec z = x;
    for (size_t k = 0; k < layers.size(); ++k) {
        Vec a = layers[k].apply(z);
        z = (k + 1 < layers.size()) ? acts[k].value(a) : std::move(a);
    }
    return z;
}

inline Mat jacobian_traced(const VectorNet& net, const Vec& x, VectorTrace& tr) {
    require(x.size() == net.input_dim(), "jacobian: dimension mismatch");
    const auto& layers = net.layers();
    const auto& acts = net.activations();
    const size_t L = layers.size();

    tr.input = x;
    tr.pre.resize(L);
    tr.post.resize(L - 1);
    tr.partial.resize(L);
    tr.scaled.resize(L - 1);

    const Vec* z = &tr.input;
    for (size_t k = 0; k < L; ++k) {
        tr.pre[k] = layers[k].apply(*z);
        if (k + 1 < L) {
            tr.post[k] = acts[k].value(tr.pre[k]);
            z = &tr.post[k];
        }
    }

    tr.partial[0] = layers[0].to_dense();
    for (size_t k = 1; k < L; ++k) {
        tr.scaled[k - 1] = acts[k - 1].deriv(tr.pre[k - 1]).asDiagonal() * tr.partial[k - 1];
        if (layers[k].kind() == LayerKind::Dense) {
            tr.partial[k].noalias() = layers[k].weights() * tr.scaled[k - 1];
        } else {
            Mat out(layers[k].out_dim(), tr.scaled[k - 1].cols());
            for (long c = 0; c < out.cols(); ++c)
                out.col(c) = layers[k].apply_no_bias(tr.scaled[k - 1].col(c));
            tr.partial[k] = std::move(out);
        }
    }
    return tr.partial[L - 1];
}

inline Mat jacobian(const VectorNet& net, const Vec& x) {
    VectorTrace tr;
    return jacobian_traced(net, x, tr);
}

// ---------------------------------------------------------------------------
// Architecture specification and initialization
// ---------------------------------------------------------------------------

enum class InitKind { FanUniform, Orthogonal };

inline std::string to_string(InitKind k) {
    return k == InitKind::FanUniform ? "fan_uniform" : "orthogonal";
}

inline InitKind init_kind_from_string(const std::string& s) {
    if (s == "fan_uniform") return InitKind::FanUniform;
    if (s == "orthogonal") return InitKind::Orthogonal;
    throw ConfigError("unknown init kind: " + s);
}

struct LayerArch {
    LayerKind kind = LayerKind::Dense;
    int in_dim = 0, out_dim = 0;              // dense
    int in_channels = 0, out_channels = 0;    // conv
    int kernel = 1;
};

/// Architecture of a layered net; `init_network` turns this into weights.
struct ArchSpec {
    std::vector<LayerArch> layers;
    ActKind activation = ActKind::Tanh;       // between layers; none after the last
    Readout readout = Readout::FinalScalar;   // ignored for vector nets
    InitKind init = InitKind::FanUniform;
    int n_sites = 0;                          // required when conv layers present

    static ArchSpec mlp(int input_dim, const std::vector<int>& hidden, int out_dim,
                        ActKind act = ActKind::Tanh, InitKind ik = InitKind::FanUniform) {
        ArchSpec a;
        a.activation = act;
        a.init = ik;
        int prev = input_dim;
        for (int h : hidden) {
            a.layers.push_back({LayerKind::Dense, prev, h, 0, 0, 1});
            prev = h;
        }
        a.layers.push_back({LayerKind::Dense, prev, out_dim, 0, 0, 1});
        return a;
    }

    static ArchSpec conv1d(int n_sites, const std::vector<int>& channels,
                           const std::vector<int>& kernels,
                           ActKind act = ActKind::Tanh, InitKind ik = InitKind::Orthogonal) {
        require(channels.size() >= 2 && kernels.size() + 1 == channels.size(),
                "conv arch: need channels per layer boundary and one kernel per layer");
        ArchSpec a;
        a.activation = act;
        a.init = ik;
        a.readout = Readout::SumOfOutputs;
        a.n_sites = n_sites;
        for (size_t i = 0; i + 1 < channels.size(); ++i)
            a.layers.push_back(
                {LayerKind::CircularConv1d, 0, 0, channels[i], channels[i + 1], kernels[i]});
        return a;
    }
};

namespace detail {

inline Mat draw_matrix_uniform(std::mt19937_64& rng, int rows, int cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

inline Mat draw_matrix_normal(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

/// Gaussian draw followed by QR; rows or columns come out orthonormal
/// depending on shape. Signs are fixed from the R diagonal so the result
/// is a deterministic function of the draw.
inline Mat draw_matrix_orthogonal(std::mt19937_64& rng, int rows, int cols) {
    const bool wide = rows < cols;
    const int r = wide ? cols : rows;
    const int c = wide ? rows : cols;
    Mat g = draw_matrix_normal(rng, r, c);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(r, c);
    Mat rr = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    for (int i = 0; i < c; ++i)
        if (rr(i, i) < 0) q.col(i) = -q.col(i);
    return wide ? Mat(q.transpose()) : q;
}

inline LinearLayer init_layer(const LayerArch& la, int n_sites, InitKind ik,
                              std::mt19937_64& rng) {
    if (la.kind == LayerKind::Dense) {
        Mat w;
        if (ik == InitKind::Orthogonal) {
            w = draw_matrix_orthogonal(rng, la.out_dim, la.in_dim);
        } else {
            const double bound = std::sqrt(6.0 / (la.in_dim + la.out_dim));
            w = draw_matrix_uniform(rng, la.out_dim, la.in_dim, bound);
        }
        return LinearLayer::dense(std::move(w), Vec::Zero(la.out_dim));
    }
    Mat taps;
    if (ik == InitKind::Orthogonal) {
        taps = draw_matrix_orthogonal(rng, la.out_channels, la.kernel * la.in_channels);
    } else {
        const int fan_in = la.kernel * la.in_channels;
        const double bound = std::sqrt(6.0 / (fan_in + la.out_channels));
        taps = draw_matrix_uniform(rng, la.out_channels, la.kernel * la.in_channels, bound);
    }
    return LinearLayer::circular_conv1d(la.in_channels, la.out_channels, la.kernel, n_sites,
                                        std::move(taps), Vec::Zero(la.out_channels));
}

inline std::pair<std::vector<LinearLayer>, std::vector<Activation>> init_chain(
    const ArchSpec& arch, std::uint64_t seed) {
    require(!arch.layers.empty(), "init_network: empty architecture");
    std::mt19937_64 rng(seed);
    std::vector<LinearLayer> layers;
    layers.reserve(arch.layers.size());
    for (const auto& la : arch.layers) layers.push_back(init_layer(la, arch.n_sites, arch.init, rng));
    std::vector<Activation> acts(arch.layers.size() - 1, make_activation(arch.activation));
    return {std::move(layers), std::move(acts)};
}

}  // namespace detail

inline ScalarNet init_network(const ArchSpec& arch, std::uint64_t seed) {
    auto [layers, acts] = detail::init_chain(arch, seed);
    return ScalarNet(std::move(layers), std::move(acts), arch.readout, seed);
}

inline VectorNet init_vector_network(const ArchSpec& arch, std::uint64_t seed) {
    auto [layers, acts] = detail::init_chain(arch, seed);
    return VectorNet(std::move(layers), std::move(acts), seed);
}

// ---------------------------------------------------------------------------
// Flat parameter views (optimizers work on one contiguous vector)
// ---------------------------------------------------------------------------

template <typename Net>
long param_count(const Net& net) {
    long n = 0;
    for (const auto& l : net.layers()) n += l.param_count();
    return n;
}

template <typename Net>
Vec pack_params(const Net& net) {
    Vec p(param_count(net));
    long at = 0;
    for (const auto& l : net.layers()) {
        const long nw = l.weights().size();
        p.segment(at, nw) = Eigen::Map<const Vec>(l.weights().data(), nw);
        at += nw;
        p.segment(at, l.bias().size()) = l.bias();
        at += l.bias().size();
    }
    return p;
}

template <typename Net>
void unpack_params(Net& net, const Vec& p) {
    require(p.size() == param_count(net), "unpack_params: size mismatch");
    long at = 0;
    for (auto& l : net.layers()) {
        const long nw = l.weights().size();
        Eigen::Map<Vec>(l.weights().data(), nw) = p.segment(at, nw);
        at += nw;
        l.bias() = p.segment(at, l.bias().size());
        at += l.bias().size();
    }
}

}  // namespace hamcert::nn
