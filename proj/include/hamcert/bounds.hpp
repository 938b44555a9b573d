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

#include "hamcert/norms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamcert::bounds {

/// Scale constant K of the covering estimate N(eps) <= (K/eps + 1)^n for
/// the loss class built on the network's input gradient:
///   K = 2 rho_p c_u c_{A_{nl+1}} rho'_{sigma_nl}
///       * prod_{j<nl} rho_{sigma_j} * prod_{j<nl} c_{sigma_j}
///       * (prod_{j<=nl} c_{A_j})^2.
inline double covering_constant(const nn::NormProfile& profile) {
    profile.validate();
    const int nl = profile.activation_layers();
    double inner_lipschitz = 1.0, inner_deriv = 1.0, inner_norms = 1.0;
    for (int j = 0; j + 1 < nl; ++j) {
        inner_lipschitz *= profile.act_lipschitz[j];
        inner_deriv *= profile.act_deriv_bound[j];
    }
    for (int j = 0; j < nl; ++j) inner_norms *= profile.layer_norms[j];
    return 2.0 * profile.loss_lipschitz * profile.input_radius * profile.layer_norms[nl] *
           profile.act_deriv_lipschitz[nl - 1] * inner_lipschitz * inner_deriv *
           inner_norms * inner_norms;
}

/// ln N(eps) = n ln(K/eps + 1); returned in log form to avoid overflow.
inline double log_covering_bound(double covering_k, double eps, long n) {
    require(covering_k >= 0.0 && eps > 0.0 && n >= 1, "log_covering_bound: bad arguments");
    return static_cast<double>(n) * std::log1p(covering_k / eps);
}

struct RademacherBound {
    double alpha = 0.0;
    double beta = 0.0;
    double value = 0.0;  // R_n
};

/// Dyadic chaining constants for the covering estimate. Since
///   ln N(c 2^{-k}) = n ln(K 2^k / c + 1) <= n ln(K/c + 1) + n k ln 2
/// and sqrt(a+b) <= sqrt(a) + sqrt(b) with sqrt(k) <= k for k >= 1,
///   sqrt(ln N(c 2^{-k})) <= alpha + k beta
/// holds with alpha = sqrt(n ln(K/c + 1)) and beta = sqrt(n ln 2),
/// giving R_n <= 6 c (alpha + 2 beta) / n.
inline RademacherBound rademacher_bound(double covering_k, double c_loss, long n) {
    require(covering_k > 0.0 && c_loss > 0.0 && n >= 1, "rademacher_bound: bad arguments");
    RademacherBound r;
    const double dn = static_cast<double>(n);
    r.alpha = std::sqrt(dn * std::log1p(covering_k / c_loss));
    r.beta = std::sqrt(dn * std::log(2.0));
    r.value = 6.0 * c_loss * (r.alpha + 2.0 * r.beta) / dn;
    return r;
}

/// High-probability bound on the expected loss:
///   L_train + 2 R_n + 3 c sqrt(2 ln(4/delta) / n).
inline double generalization_bound(double l_train, double rademacher, double c_loss,
                                   double delta, long n) {
    require(delta > 0.0 && delta < 1.0, "generalization_bound: delta must be in (0,1)");
    require(l_train >= 0.0 && rademacher >= 0.0 && c_loss > 0.0 && n >= 1,
            "generalization_bound: bad arguments");
    return l_train + 2.0 * rademacher +
           3.0 * c_loss * std::sqrt(2.0 * std::log(4.0 / delta) / static_cast<double>(n));
}

struct LinfBound {
    bool applicable = false;
    double value = 0.0;
    std::string reason;
};

/// Sup-norm bound on the aligned energy error,
///   sup |H - H_NN| <= (C_sobolev^p * gen_bound / inf_density)^(1/p),
/// valid only when p > 2M; otherwise an explicit not-applicable marker.
inline LinfBound linf_hamiltonian_bound(double gen_bound, double c_sobolev,
                                        double inf_density, double p, int half_dim_m) {
    require(gen_bound >= 0.0, "linf_hamiltonian_bound: negative generalization bound");
    require(c_sobolev > 0.0 && inf_density > 0.0 && p >= 1.0 && half_dim_m >= 1,
            "linf_hamiltonian_bound: bad arguments");
    LinfBound b;
    if (p <= 2.0 * half_dim_m) {
        b.applicable = false;
        b.reason = "requires p > 2M (got p = " + format_g17(p) +
                   ", 2M = " + std::to_string(2 * half_dim_m) + ")";
        return b;
    }
    b.applicable = true;
    b.value = std::pow(std::pow(c_sobolev, p) * gen_bound / inf_density, 1.0 / p);
    return b;
}

struct KamResult {
    bool guaranteed = false;
    double delta = 1.0;
    std::string statement;
};

/// Probability certificate for persistence of invariant tori: when the
/// perturbation headroom eps0 - c1 L_train - c2 R_n is positive,
///   delta = exp(-n ((eps0 - c1 L - c2 R) / c3)^2)
/// and invariant tori exist for the trained model with probability >= 1-delta.
inline KamResult kam_probability(double eps0, double c1, double c2, double c3,
                                 double l_train, double rademacher, long n) {
    require(eps0 > 0.0 && c1 > 0.0 && c2 > 0.0 && c3 > 0.0,
            "kam_probability: constants must be positive");
    require(l_train >= 0.0 && rademacher >= 0.0 && n >= 1, "kam_probability: bad arguments");
    KamResult r;
    const double headroom = eps0 - c1 * l_train - c2 * rademacher;
    if (headroom <= 0.0) {
        r.guaranteed = false;
        r.delta = 1.0;
        r.statement = "no guarantee: threshold does not exceed c1*L_train + c2*R_n";
        return r;
    }
    const double q = headroom / c3;
    r.guaranteed = true;
    r.delta = std::exp(-static_cast<double>(n) * q * q);
    r.statement = "with probability >= 1 - delta, a set of invariant tori exists for the "
                  "trained model";
    return r;
}

struct KamConstants {
    double eps0 = 1.0;
    double c1 = 1.0, c2 = 1.0, c3 = 1.0;
};

struct BoundInputs {
    nn::NormProfile profile;
    long n = 0;              // sample count
    double c_loss = 0.0;     // uniform bound on the loss
    double delta = 0.05;     // confidence level of the generalization bound
    double l_train = 0.0;    // empirical training loss
    double p = 2.0;          // loss exponent
    int half_dim_m = 1;      // M, half the phase-space dimension
    double c_sobolev = 1.0;
    double inf_density = 1.0;
    KamConstants kam;

    void validate() const {
        profile.validate();
        require(n >= 1, "bound inputs: n must be >= 1");
        require(c_loss > 0.0, "bound inputs: c_loss must be positive");
        require(delta > 0.0 && delta < 1.0, "bound inputs: delta must be in (0,1)");
        require(l_train >= 0.0 && std::isfinite(l_train),
                "bound inputs: L_train must be finite and nonnegative");
        require(p >= 1.0, "bound inputs: p must be >= 1");
        require(half_dim_m >= 1, "bound inputs: M must be >= 1");
        require(c_sobolev > 0.0, "bound inputs: Sobolev constant must be positive");
        require(inf_density > 0.0, "bound inputs: inf density must be positive");
    }
};

struct BoundReport {
    double covering_k = 0.0;
    double log_covering_at_c_loss = 0.0;
    RademacherBound rademacher;
    double generalization = 0.0;
    LinfBound linf;
    KamResult kam;
    std::vector<std::string> assumptions_log;
    BoundInputs inputs;
};

/// Default uniform loss bound: |loss| <= (2 sup ||grad H_NN||)^p on data in
/// the input ball, from the norm profile.
inline double default_c_loss(const nn::NormProfile& profile, double p) {
    return std::pow(2.0 * profile.gradient_norm_bound(), p);
}

/// Default loss Lipschitz constant: derivative of s^p at the residual
/// bound s = 2 sup ||grad H_NN||.
inline double default_loss_lipschitz(double gradient_norm_bound, double p) {
    return p * std::pow(2.0 * gradient_norm_bound, p - 1.0);
}

/// Default KAM constants mapped from the generalization chain with
/// kappa = C_sobolev^p / inf_density: c1 = kappa (training-loss channel),
/// c2 = 2 kappa (Rademacher channel), c3 = 3 c_loss sqrt(2) kappa
/// (confidence channel).
inline KamConstants default_kam_constants(double c_sobolev, double inf_density, double p,
                                          double c_loss, double eps0) {
    const double kappa = std::pow(c_sobolev, p) / inf_density;
    KamConstants k;
    k.eps0 = eps0;
    k.c1 = kappa;
    k.c2 = 2.0 * kappa;
    k.c3 = 3.0 * c_loss * std::sqrt(2.0) * kappa;
    return k;
}

/// Assemble the whole chain. Deterministic in its inputs; every reported
/// number is a closed-form function of BoundInputs.
inline BoundReport make_bound_report(const BoundInputs& in,
                                     std::vector<std::string> assumptions = {}) {
    in.validate();
    BoundReport rep;
    rep.inputs = in;
    rep.assumptions_log = std::move(assumptions);
    rep.covering_k = covering_constant(in.profile);
    rep.log_covering_at_c_loss = log_covering_bound(rep.covering_k, in.c_loss, in.n);
    rep.rademacher = rademacher_bound(rep.covering_k, in.c_loss, in.n);
    rep.generalization =
        generalization_bound(in.l_train, rep.rademacher.value, in.c_loss, in.delta, in.n);
    rep.linf = linf_hamiltonian_bound(rep.generalization, in.c_sobolev, in.inf_density, in.p,
                                      in.half_dim_m);
    rep.kam = kam_probability(in.kam.eps0, in.kam.c1, in.kam.c2, in.kam.c3, in.l_train,
                              rep.rademacher.value, in.n);
    rep.assumptions_log.push_back(
        "generalization bound stated on the sampled region's bounding box (input ball of "
        "radius c_u = " +
        format_g17(in.profile.input_radius) + ")");
    return rep;
}

}  // namespace hamcert::bounds
