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

#include "hamcert/bounds.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace hamcert;
using namespace hamcert::bounds;

namespace {

nn::NormProfile profile_with(std::vector<double> layer_norms, double rho_p, double c_u,
                             long n) {
    nn::NormProfile p;
    p.layer_norms = std::move(layer_norms);
    const int nl = static_cast<int>(p.layer_norms.size()) - 1;
    p.act_lipschitz.assign(nl, 1.0);
    p.act_deriv_bound.assign(nl, 1.0);
    p.act_deriv_lipschitz.assign(nl, 1.0);
    p.input_radius = c_u;
    p.loss_lipschitz = rho_p;
    p.sample_count = n;
    return p;
}

nn::NormProfile random_profile(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::uniform_int_distribution<int> nl_dist(1, 3);
    const int nl = nl_dist(rng);
    nn::NormProfile p;
    for (int j = 0; j <= nl; ++j) p.layer_norms.push_back(u(rng));
    for (int j = 0; j < nl; ++j) {
        p.act_lipschitz.push_back(u(rng));
        p.act_deriv_bound.push_back(u(rng));
        p.act_deriv_lipschitz.push_back(u(rng));
    }
    p.input_radius = u(rng);
    p.loss_lipschitz = u(rng);
    p.sample_count = 1 + static_cast<long>(u(rng) * 40);
    return p;
}

/// One-line independent evaluation of the covering constant.
double covering_oracle(const nn::NormProfile& p) {
    const int nl = static_cast<int>(p.act_lipschitz.size());
    double rho = 1, cs = 1, ca = 1;
    for (int j = 0; j < nl - 1; ++j) rho *= p.act_lipschitz[j];
    for (int j = 0; j < nl - 1; ++j) cs *= p.act_deriv_bound[j];
    for (int j = 0; j < nl; ++j) ca *= p.layer_norms[j];
    return 2 * p.loss_lipschitz * p.input_radius * p.layer_norms[nl] *
           p.act_deriv_lipschitz[nl - 1] * rho * cs * ca * ca;
}

}  // namespace

TEST_CASE("covering constant oracles", "[bounds]") {
    SECTION("all constants 1 with two activation layers gives K = 2") {
        auto p = profile_with({1.0, 1.0, 1.0}, 1.0, 1.0, 4);
        CHECK(covering_constant(p) == 2.0);
        CHECK(log_covering_bound(2.0, 1.0, 4) ==
              Catch::Approx(4.0 * std::log(3.0)).epsilon(1e-15));
    }

    SECTION("doubling every layer norm scales K by 2^5 (two hidden + output)") {
        auto p = profile_with({1.0, 1.0, 1.0}, 1.0, 1.0, 4);
        auto q = profile_with({2.0, 2.0, 2.0}, 1.0, 1.0, 4);
        CHECK(covering_constant(q) == Catch::Approx(32.0 * covering_constant(p)).epsilon(1e-14));
    }

    SECTION("log covering vanishes as eps grows") {
        const double k = 7.3;
        CHECK(log_covering_bound(k, 1e12, 10) < 1e-10);
        CHECK(log_covering_bound(k, 1e300, 10) >= 0.0);
    }

    SECTION("matches the independent one-line oracle on random profiles") {
        std::mt19937_64 rng(400);
        for (int i = 0; i < 10000; ++i) {
            auto p = random_profile(rng);
            const double got = covering_constant(p);
            const double want = covering_oracle(p);
            CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("rademacher bound oracles", "[bounds]") {
    SECTION("K = c_loss = 1, n = 100") {
        auto r = rademacher_bound(1.0, 1.0, 100);
        const double ln2 = std::log(2.0);
        CHECK(r.alpha == Catch::Approx(std::sqrt(100.0 * ln2)).epsilon(1e-15));
        CHECK(r.beta == Catch::Approx(std::sqrt(100.0 * ln2)).epsilon(1e-15));
        CHECK(r.value == Catch::Approx(1.8 * std::sqrt(ln2)).epsilon(1e-14));
        CHECK(r.value == Catch::Approx(1.4985983000838558).epsilon(1e-12));
    }

    SECTION("vanishes like 1/sqrt(n)") {
        const double r1 = rademacher_bound(2.0, 1.0, 100).value;
        const double r2 = rademacher_bound(2.0, 1.0, 10000).value;
        CHECK(r2 == Catch::Approx(r1 / 10.0).epsilon(1e-12));
    }

    SECTION("strictly increasing in K") {
        double prev = 0.0;
        for (double k = 0.5; k < 100.0; k *= 1.7) {
            const double v = rademacher_bound(k, 1.0, 50).value;
            CHECK(v > prev);
            prev = v;
        }
    }

    SECTION("the dyadic envelope sqrt(ln N(c 2^{-k})) <= alpha + k beta holds") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.1, 50.0);
        for (int rep = 0; rep < 500; ++rep) {
            const double k = u(rng), c = u(rng);
            const long n = 1 + static_cast<long>(u(rng) * 10);
            const auto r = rademacher_bound(k, c, n);
            for (int kk = 0; kk <= 60; ++kk) {
                const double lhs =
                    std::sqrt(log_covering_bound(k, c * std::pow(2.0, -kk), n));
                CHECK(lhs <= r.alpha + kk * r.beta + 1e-9);
            }
        }
    }
}

TEST_CASE("generalization bound oracles", "[bounds]") {
    SECTION("pure confidence term: L=0, R=0, c=1, n=8, delta=4e^{-4} gives 3") {
        const double delta = 4.0 * std::exp(-4.0);
        CHECK(generalization_bound(0.0, 0.0, 1.0, delta, 8) ==
              Catch::Approx(3.0).epsilon(1e-14));
    }

    SECTION("monotone decreasing in delta, bounded below by L_train") {
        double prev = 1e300;
        for (double delta = 1e-6; delta < 1.0; delta *= 10.0) {
            const double b = generalization_bound(0.37, 0.1, 1.0, delta, 25);
            CHECK(b < prev);
            CHECK(b >= 0.37);
            prev = b;
        }
    }
}

TEST_CASE("L_inf Hamiltonian bound", "[bounds]") {
    SECTION("zero generalization bound gives zero") {
        auto b = linf_hamiltonian_bound(0.0, 1.0, 1.0, 5.0, 2);
        REQUIRE(b.applicable);
        CHECK(b.value == 0.0);
    }

    SECTION("C=1, density=1, p=5, M=2, gen=32 gives 2") {
        auto b = linf_hamiltonian_bound(32.0, 1.0, 1.0, 5.0, 2);
        REQUIRE(b.applicable);
        CHECK(b.value == Catch::Approx(2.0).epsilon(1e-14));
    }

    SECTION("p <= 2M is flagged not-applicable, never a silent number") {
        auto b = linf_hamiltonian_bound(32.0, 1.0, 1.0, 2.0, 2);
        CHECK_FALSE(b.applicable);
        CHECK(b.reason.find("p > 2M") != std::string::npos);
    }
}

TEST_CASE("KAM probability", "[bounds]") {
    SECTION("no headroom means no guarantee") {
        auto r = kam_probability(1.0, 1.0, 1.0, 1.0, 0.75, 0.5, 10);
        CHECK_FALSE(r.guaranteed);
        // exact zero headroom is also refused (exponent would be >= 1)
        auto r2 = kam_probability(1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 10);
        CHECK_FALSE(r2.guaranteed);
        auto r3 = kam_probability(1.0, 2.0, 1.0, 1.0, 0.625, 0.0, 10);
        CHECK_FALSE(r3.guaranteed);
    }

    SECTION("unit constants, zero losses, n = 4 gives e^{-4}") {
        auto r = kam_probability(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 4);
        REQUIRE(r.guaranteed);
        CHECK(std::abs(r.delta - std::exp(-4.0)) < 1e-12);
        CHECK(r.statement.find("invariant tori") != std::string::npos);
    }

    SECTION("delta strictly increases with the training loss") {
        double prev = 0.0;
        for (double l = 0.0; l < 0.9; l += 0.1) {
            auto r = kam_probability(1.0, 1.0, 1.0, 1.0, l, 0.0, 16);
            REQUIRE(r.guaranteed);
            CHECK(r.delta > prev);
            prev = r.delta;
        }
    }
}

TEST_CASE("monotonicity sweeps across the chain", "[bounds]") {
    std::mt19937_64 rng(9090);
    std::uniform_real_distribution<double> u(0.2, 3.0);

    SECTION("K is nondecreasing in every profile entry") {
        for (int rep = 0; rep < 2000; ++rep) {
            auto p = random_profile(rng);
            const double k0 = covering_constant(p);
            auto bump = [&](nn::NormProfile q) {
                const double k1 = covering_constant(q);
                CHECK(k1 >= k0 * (1.0 - 1e-12));
            };
            {
                auto q = p;
                q.layer_norms[rep % q.layer_norms.size()] *= 1.5;
                bump(q);
            }
            {
                auto q = p;
                q.act_lipschitz[rep % q.act_lipschitz.size()] *= 1.5;
                bump(q);
            }
            {
                auto q = p;
                q.act_deriv_bound[rep % q.act_deriv_bound.size()] *= 1.5;
                bump(q);
            }
            {
                auto q = p;
                q.act_deriv_lipschitz.back() *= 1.5;
                bump(q);
            }
            {
                auto q = p;
                q.input_radius *= 1.5;
                bump(q);
            }
            {
                auto q = p;
                q.loss_lipschitz *= 1.5;
                bump(q);
            }
        }
    }

    SECTION("R_n nonincreasing in n; generalization nonincreasing in n and delta") {
        for (int rep = 0; rep < 2000; ++rep) {
            const double k = u(rng), c = u(rng), l = u(rng) - 0.2, d = 0.3 * u(rng) / 3.0;
            const long n = 2 + static_cast<long>(u(rng) * 100);
            CHECK(rademacher_bound(k, c, 2 * n).value <=
                  rademacher_bound(k, c, n).value * (1 + 1e-12));
            const double r = rademacher_bound(k, c, n).value;
            CHECK(generalization_bound(l, r, c, d, 2 * n) <=
                  generalization_bound(l, r, c, d, n) * (1 + 1e-12));
            CHECK(generalization_bound(l, r, c, std::min(0.99, 2 * d), n) <=
                  generalization_bound(l, r, c, d, n) * (1 + 1e-12));
        }
    }

    SECTION("KAM delta monotone in L, R, n, eps0") {
        for (int rep = 0; rep < 2000; ++rep) {
            const double c1 = u(rng), c2 = u(rng), c3 = u(rng);
            const double l = 0.2 * u(rng), r = 0.2 * u(rng);
            // headroom stays positive even after the 1.5x bumps below
            const double e0 = 1.5 * (c1 * l + c2 * r) + u(rng);
            const long n = 2 + static_cast<long>(u(rng) * 30);
            auto base = kam_probability(e0, c1, c2, c3, l, r, n);
            REQUIRE(base.guaranteed);
            auto worse_l = kam_probability(e0, c1, c2, c3, l * 1.5, r, n);
            auto worse_r = kam_probability(e0, c1, c2, c3, l, r * 1.5, n);
            auto more_n = kam_probability(e0, c1, c2, c3, l, r, 2 * n);
            auto more_eps = kam_probability(e0 * 1.5, c1, c2, c3, l, r, n);
            CHECK(worse_l.delta >= base.delta * (1 - 1e-12));
            CHECK(worse_r.delta >= base.delta * (1 - 1e-12));
            CHECK(more_n.delta <= base.delta * (1 + 1e-12));
            CHECK(more_eps.delta <= base.delta * (1 + 1e-12));
        }
    }
}

TEST_CASE("bound report assembles the chain deterministically", "[bounds]") {
    auto p = profile_with({1.3, 0.9, 1.1}, 2.0, 1.7, 300);
    BoundInputs in;
    in.profile = p;
    in.n = 300;
    in.c_loss = default_c_loss(p, 2.0);
    in.delta = 0.05;
    in.l_train = 0.01;
    in.p = 2.0;
    in.half_dim_m = 2;
    in.kam = default_kam_constants(1.0, 1.0, 2.0, in.c_loss, 1.0);
    auto r1 = make_bound_report(in);
    auto r2 = make_bound_report(in);
    CHECK(r1.covering_k == r2.covering_k);
    CHECK(r1.generalization == r2.generalization);
    CHECK(r1.rademacher.value == r2.rademacher.value);
    CHECK_FALSE(r1.linf.applicable);  // p = 2 <= 2M = 4
    CHECK(r1.covering_k == Catch::Approx(covering_oracle(p)).epsilon(1e-14));
    // c_loss default is (2 * gradient bound)^p
    const double gb = p.gradient_norm_bound();
    CHECK(in.c_loss == Catch::Approx(std::pow(2.0 * gb, 2.0)).epsilon(1e-14));
}
