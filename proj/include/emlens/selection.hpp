// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "emlens/analysis.hpp"

namespace emlens {

/// Outcome of an antenna-selection run: the chosen indices (selection order
/// for greedy schemes, ascending for exhaustive), the objective after each
/// prefix, and the per-step candidate scores.
struct SelectionResult {
    std::vector<int> chosen;
    std::vector<double> surrogate_rate;
    std::vector<std::vector<std::pair<int, double>>> step_scores;
};

namespace detail {

inline std::vector<int> canonical_subset(std::span<const int> subset, int elements) {
    if (subset.empty()) throw invalid_input("selection: subset must be nonempty");
    std::vector<int> idx(subset.begin(), subset.end());
    std::sort(idx.begin(), idx.end());
    if (idx.front() < 0 || idx.back() >= elements)
        throw invalid_input("selection: antenna index out of range");
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw invalid_input("selection: duplicate antenna index");
    return idx;
}

/// Greedy forward selection maximizing `objective` over subsets; ties break
/// to the lowest antenna index, so the result is deterministic.
inline SelectionResult greedy_maximize(
    int elements, int count,
    const std::function<double(const std::vector<int>&)>& objective) {
    if (count < 1 || count > elements)
        throw invalid_input("selection: requested count must be in [1, M]");
    SelectionResult result;
    std::vector<int> unselected(elements);
    for (int i = 0; i < elements; ++i) unselected[i] = i;

    std::vector<int> trial;
    for (int step = 0; step < count; ++step) {
        int best = -1;
        double best_score = 0.0;
        std::vector<std::pair<int, double>> scores;
        scores.reserve(unselected.size());
        for (int candidate : unselected) {
            trial = result.chosen;
            trial.push_back(candidate);
            std::sort(trial.begin(), trial.end());
            const double score = objective(trial);
            scores.emplace_back(candidate, score);
            if (best < 0 || score > best_score) {
                best = candidate;
                best_score = score;
            }
        }
        result.chosen.push_back(best);
        result.surrogate_rate.push_back(best_score);
        result.step_scores.push_back(std::move(scores));
        unselected.erase(std::find(unselected.begin(), unselected.end(), best));
    }
    return result;
}

}  // namespace detail

/// Covariance-only sum-rate surrogate of a subarray: the Jensen bound is
/// recomputed on the restricted covariances (antennas outside the subset are
/// never trained, so the full-array C/E must not simply be sliced).
inline double subset_sum_rate(const SnrBoundInputs& inputs, std::span<const int> subset) {
    if (inputs.covs.empty()) throw invalid_input("subset_sum_rate: no users");
    const std::vector<int> idx = detail::canonical_subset(subset, inputs.covs[0].dim());
    SnrBoundInputs restricted{{}, inputs.rho_tr, inputs.rho_d};
    restricted.covs.reserve(inputs.covs.size());
    for (const auto& cov : inputs.covs) restricted.covs.push_back(cov.submatrix(idx));
    double rate = 0.0;
    for (int k = 0; k < static_cast<int>(inputs.covs.size()); ++k)
        rate += std::log2(1.0 + avg_snr_lower_bound(restricted, k));
    return rate;
}

/// Greedy covariance-based antenna selection: grows the active set one
/// antenna at a time, each step keeping the candidate with the highest
/// covariance-only sum-rate surrogate.
inline SelectionResult greedy_select(const SnrBoundInputs& inputs, int count) {
    if (inputs.covs.empty()) throw invalid_input("greedy_select: no users");
    return detail::greedy_maximize(
        inputs.covs[0].dim(), count,
        [&](const std::vector<int>& subset) { return subset_sum_rate(inputs, subset); });
}

/// Exhaustive oracle over all C(M, N) subsets; ties break to the
/// lexicographically smallest subset. Guarded against combinatorial blowup.
inline SelectionResult exhaustive_select(const SnrBoundInputs& inputs, int count,
                                         double max_subsets = 1e6) {
    if (inputs.covs.empty()) throw invalid_input("exhaustive_select: no users");
    const int elements = inputs.covs[0].dim();
    if (count < 1 || count > elements)
        throw invalid_input("exhaustive_select: requested count must be in [1, M]");

    double subsets = 1.0;
    for (int i = 0; i < count; ++i) subsets *= static_cast<double>(elements - i) / (i + 1);
    if (subsets > max_subsets)
        throw invalid_input("exhaustive_select: subset count exceeds the enumeration guard");

    std::vector<int> current(count);
    for (int i = 0; i < count; ++i) current[i] = i;
    std::vector<int> best;
    double best_rate = 0.0;
    while (true) {
        const double rate = subset_sum_rate(inputs, current);
        if (best.empty() || rate > best_rate) {
            best = current;
            best_rate = rate;
        }
        // next combination in lexicographic order
        int i = count - 1;
        while (i >= 0 && current[i] == elements - count + i) --i;
        if (i < 0) break;
        ++current[i];
        for (int j = i + 1; j < count; ++j) current[j] = current[j - 1] + 1;
    }

    SelectionResult result;
    result.chosen = best;
    result.surrogate_rate.resize(count);
    for (int n = 1; n <= count; ++n) {
        std::vector<int> prefix(best.begin(), best.begin() + n);
        result.surrogate_rate[n - 1] = subset_sum_rate(inputs, prefix);
    }
    result.surrogate_rate[count - 1] = best_rate;
    return result;
}

/// Realization-specific sum rate of a subarray given the current channel
/// estimates: sum_k log2(1 + gamma_k) with gamma_k evaluated on the
/// restricted estimates and error covariances.
inline double subset_instantaneous_sum_rate(std::span<const CVec> h_hats,
                                            std::span<const CMat> err_covs, double rho_d,
                                            std::span<const int> subset) {
    if (h_hats.empty() || h_hats.size() != err_covs.size())
        throw invalid_input("subset_instantaneous_sum_rate: estimates must align");
    if (!(rho_d > 0.0))
        throw invalid_input("subset_instantaneous_sum_rate: data SNR must be positive");
    const std::vector<int> idx =
        detail::canonical_subset(subset, static_cast<int>(h_hats[0].size()));
    const int s = static_cast<int>(idx.size());
    const int users = static_cast<int>(h_hats.size());

    std::vector<CVec> restricted(users);
    CMat err_sum = CMat::Zero(s, s);
    for (int u = 0; u < users; ++u) {
        CVec h(s);
        for (int i = 0; i < s; ++i) h(i) = h_hats[u](idx[i]);
        restricted[u] = std::move(h);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) err_sum(i, j) += err_covs[u](idx[i], idx[j]);
    }
    const Vec gammas = all_user_snrs(restricted, err_sum, rho_d);
    double rate = 0.0;
    for (int u = 0; u < users; ++u) rate += std::log2(1.0 + gammas(u));
    return rate;
}

/// Instantaneous-CSI benchmark: greedy selection re-run for the given
/// realization's estimates. With perfect estimates (E = 0) this is selection
/// on the true channels.
inline SelectionResult instantaneous_csi_select(std::span<const CVec> h_hats,
                                                std::span<const CMat> err_covs, double rho_d,
                                                int count) {
    if (h_hats.empty()) throw invalid_input("instantaneous_csi_select: no users");
    return detail::greedy_maximize(
        static_cast<int>(h_hats[0].size()), count, [&](const std::vector<int>& subset) {
            return subset_instantaneous_sum_rate(h_hats, err_covs, rho_d, subset);
        });
}

}  // namespace emlens
