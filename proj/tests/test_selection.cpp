// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "emlens/selection.hpp"
#include "oracles.hpp"

using namespace emlens;

namespace {

/// Diagonal per-user covariances with random positive loads.
SnrBoundInputs random_diagonal_inputs(int m, int users, RngStream& rng) {
    SnrBoundInputs inputs{{}, 0.5 + rng.uniform(), 0.5 + rng.uniform()};
    for (int u = 0; u < users; ++u) {
        Vec loads(m);
        for (int i = 0; i < m; ++i) loads(i) = -std::log(rng.uniform());
        loads *= m / loads.sum();
        inputs.covs.emplace_back(CMat(loads.asDiagonal()));
    }
    return inputs;
}

}  // namespace

TEST_CASE("subset sum rate") {
    RngStream rng(1);

    SECTION("full subset reproduces the full-array rate") {
        const auto inputs = random_diagonal_inputs(6, 3, rng);
        std::vector<int> all{0, 1, 2, 3, 4, 5};
        double full = 0.0;
        for (int k = 0; k < 3; ++k) full += std::log2(1.0 + avg_snr_lower_bound(inputs, k));
        REQUIRE(subset_sum_rate(inputs, all) == Catch::Approx(full).epsilon(1e-12));
    }

    SECTION("all-zero covariances rate zero") {
        SnrBoundInputs inputs{{Covariance::zero(4), Covariance::zero(4)}, 1.0, 1.0};
        REQUIRE(subset_sum_rate(inputs, std::vector<int>{0, 2}) == 0.0);
    }

    SECTION("single user, diagonal covariance, single antenna") {
        Vec loads(4);
        loads << 2.0, 1.0, 0.6, 0.4;
        SnrBoundInputs inputs{{Covariance(CMat((1.3 * loads).asDiagonal()))}, 1.1, 0.9};
        for (int m = 0; m < 4; ++m) {
            const Vec eig = Vec::Constant(1, 1.3 * loads(m));
            REQUIRE(subset_sum_rate(inputs, std::vector<int>{m}) ==
                    Catch::Approx(std::log2(1.0 + single_user_avg_snr(eig, 1.1, 0.9)))
                        .epsilon(1e-12));
        }
    }

    SECTION("bad subsets are rejected") {
        const auto inputs = random_diagonal_inputs(4, 2, rng);
        CHECK_THROWS_AS(subset_sum_rate(inputs, std::vector<int>{}), invalid_input);
        CHECK_THROWS_AS(subset_sum_rate(inputs, std::vector<int>{4}), invalid_input);
        CHECK_THROWS_AS(subset_sum_rate(inputs, std::vector<int>{1, 1}), invalid_input);
    }
}

TEST_CASE("greedy selection") {
    RngStream rng(2);

    SECTION("one antenna is the single-antenna argmax") {
        const auto inputs = random_diagonal_inputs(7, 2, rng);
        const SelectionResult result = greedy_select(inputs, 1);
        double best = -1.0;
        int best_idx = -1;
        for (int m = 0; m < 7; ++m) {
            const double rate = subset_sum_rate(inputs, std::vector<int>{m});
            if (rate > best) {
                best = rate;
                best_idx = m;
            }
        }
        REQUIRE(result.chosen == std::vector<int>{best_idx});
        REQUIRE(result.surrogate_rate[0] == Catch::Approx(best).epsilon(1e-12));
        REQUIRE(result.step_scores[0].size() == 7);
    }

    SECTION("selecting everything reaches the full-array rate") {
        const auto inputs = random_diagonal_inputs(5, 2, rng);
        const SelectionResult result = greedy_select(inputs, 5);
        std::vector<int> sorted = result.chosen;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4});
        std::vector<int> all{0, 1, 2, 3, 4};
        REQUIRE(result.surrogate_rate.back() ==
                Catch::Approx(subset_sum_rate(inputs, all)).epsilon(1e-12));
    }

    SECTION("deterministic with ties broken to the lowest index") {
        SnrBoundInputs inputs{{Covariance(CMat::Identity(4, 4))}, 1.0, 1.0};
        const SelectionResult a = greedy_select(inputs, 2);
        const SelectionResult b = greedy_select(inputs, 2);
        REQUIRE(a.chosen == b.chosen);
        REQUIRE(a.chosen == std::vector<int>{0, 1});  // all antennas equivalent
    }

    SECTION("out-of-range counts are rejected") {
        const auto inputs = random_diagonal_inputs(4, 2, rng);
        CHECK_THROWS_AS(greedy_select(inputs, 0), invalid_input);
        CHECK_THROWS_AS(greedy_select(inputs, 5), invalid_input);
    }
}

TEST_CASE("exhaustive selection") {
    RngStream rng(3);

    SECTION("choosing all antennas is trivial") {
        const auto inputs = random_diagonal_inputs(5, 2, rng);
        const SelectionResult result = exhaustive_select(inputs, 5);
        REQUIRE(result.chosen == std::vector<int>{0, 1, 2, 3, 4});
    }

    SECTION("one antenna matches greedy") {
        const auto inputs = random_diagonal_inputs(6, 3, rng);
        REQUIRE(exhaustive_select(inputs, 1).chosen == greedy_select(inputs, 1).chosen);
    }

    SECTION("two dominant antennas are found exactly") {
        Vec loads = Vec::Constant(6, 0.01);
        loads(2) = 2.97;
        loads(4) = 2.96;
        SnrBoundInputs inputs{{Covariance(CMat(loads.asDiagonal()))}, 1.0, 1.0};
        const SelectionResult result = exhaustive_select(inputs, 2);
        REQUIRE(result.chosen == std::vector<int>{2, 4});
    }

    SECTION("combinatorial guard") {
        const auto inputs = random_diagonal_inputs(30, 2, rng);
        CHECK_THROWS_AS(exhaustive_select(inputs, 15), invalid_input);
    }

    SECTION("greedy never beats exhaustive; close on random instances") {
        int within_two_percent = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto inputs = random_diagonal_inputs(8, 3, rng);
            const double greedy = greedy_select(inputs, 3).surrogate_rate.back();
            const double best = exhaustive_select(inputs, 3).surrogate_rate.back();
            REQUIRE(greedy <= best * (1 + 1e-12));
            if (greedy >= 0.98 * best) ++within_two_percent;
        }
        REQUIRE(within_two_percent >= 19);
    }
}

TEST_CASE("instantaneous-CSI selection") {
    RngStream rng(4);

    SECTION("choosing all antennas is trivial") {
        std::vector<CVec> h{rng.cnormal_vec(5), rng.cnormal_vec(5)};
        std::vector<CMat> e(2, CMat::Zero(5, 5));
        const SelectionResult result = instantaneous_csi_select(h, e, 1.0, 5);
        std::vector<int> sorted = result.chosen;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4});
    }

    SECTION("single user with perfect CSI picks the strongest elements") {
        CVec h(6);
        h << cplx(0.1, 0), cplx(0, 2.0), cplx(0.5, 0.5), cplx(0, 0.2), cplx(1.4, 0),
            cplx(0.3, 0.1);
        const std::vector<CVec> hs{h};
        const std::vector<CMat> es{CMat::Zero(6, 6)};
        const SelectionResult result = instantaneous_csi_select(hs, es, 1.0, 2);
        std::vector<int> sorted = result.chosen;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>{1, 4});  // the two largest |h_m|

        // brute-force oracle over all pairs
        double best = -1.0;
        std::vector<int> best_pair;
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) {
                const double rate =
                    subset_instantaneous_sum_rate(hs, es, 1.0, std::vector<int>{i, j});
                if (rate > best) {
                    best = rate;
                    best_pair = {i, j};
                }
            }
        REQUIRE(sorted == best_pair);
    }
}
