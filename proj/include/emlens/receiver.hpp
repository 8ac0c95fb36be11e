// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "emlens/estimation.hpp"

namespace emlens {

/// Contiguous grouping of the array for parallel per-group filtering.
struct GroupPartition {
    std::vector<int> sizes;

    int groups() const { return static_cast<int>(sizes.size()); }
    int total() const {
        int t = 0;
        for (int s : sizes) t += s;
        return t;
    }
    /// [start, size) pairs in array order.
    std::vector<std::pair<int, int>> ranges() const {
        std::vector<std::pair<int, int>> r;
        r.reserve(sizes.size());
        int start = 0;
        for (int s : sizes) {
            r.emplace_back(start, s);
            start += s;
        }
        return r;
    }
    /// Solve work in the per-group filtering, in units of dimension cubed.
    double solve_cost() const {
        double c = 0.0;
        for (int s : sizes) c += static_cast<double>(s) * s * s;
        return c;
    }
};

/// Splits M elements into G contiguous groups of size ceil(M/G) or
/// floor(M/G), larger groups first.
inline GroupPartition partition_contiguous(int elements, int groups) {
    if (groups < 1 || groups > elements)
        throw invalid_input("partition_contiguous: group count must be in [1, M]");
    GroupPartition p;
    p.sizes.resize(groups);
    const int base = elements / groups;
    const int remainder = elements % groups;
    for (int g = 0; g < groups; ++g) p.sizes[g] = base + (g < remainder ? 1 : 0);
    return p;
}

namespace detail {
inline void check_receiver_args(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                                double rho_d, int k) {
    if (h_hats.empty() || h_hats.size() != err_covs.size())
        throw invalid_input("receiver: per-user estimates and error covariances must align");
    if (k < 0 || k >= static_cast<int>(h_hats.size()))
        throw invalid_input("receiver: user index out of range");
    if (!(rho_d > 0.0)) throw invalid_input("receiver: data SNR must be positive");
}
}  // namespace detail

/// Interference-plus-noise covariance seen when detecting user k:
/// sum_{u != k} h_hat_u h_hat_u^H + sum_u E_u + I/rho_d.
inline CMat mmse_interference_matrix(std::span<const CVec> h_hats,
                                     std::span<const CMat> err_covs, double rho_d, int k) {
    detail::check_receiver_args(h_hats, err_covs, rho_d, k);
    const int m = static_cast<int>(h_hats[0].size());
    CMat b = CMat::Zero(m, m);
    for (std::size_t u = 0; u < h_hats.size(); ++u) {
        if (static_cast<int>(u) != k) b.noalias() += h_hats[u] * h_hats[u].adjoint();
        b += err_covs[u];
    }
    b.diagonal().array() += 1.0 / rho_d;
    return b;
}

/// MMSE receive filter v_k; maximizes the post-filtering SNR for user k.
inline CVec mmse_filter(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                        double rho_d, int k) {
    CMat b = mmse_interference_matrix(h_hats, err_covs, rho_d, k);
    Eigen::LDLT<CMat> ldlt(b);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("mmse_filter: interference matrix could not be factorized");
    return ldlt.solve(h_hats[k]);
}

/// Maximum post-filtering SNR gamma_k = h_hat_k^H B_k^-1 h_hat_k.
inline double instantaneous_snr(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                                double rho_d, int k) {
    CVec v = mmse_filter(h_hats, err_covs, rho_d, k);
    const double gamma = (h_hats[k].adjoint() * v).real()(0);
    return gamma > 0.0 ? gamma : 0.0;
}

/// All K SNRs from one factorization of B = sum_u h_hat_u h_hat_u^H
/// + err_sum + I/rho_d, using the rank-one identity
/// h^H (B - h h^H)^-1 h = q / (1 - q) with q = h^H B^-1 h.
inline Vec all_user_snrs(std::span<const CVec> h_hats, const CMat& err_sum, double rho_d) {
    if (h_hats.empty()) throw invalid_input("all_user_snrs: no users");
    if (!(rho_d > 0.0)) throw invalid_input("all_user_snrs: data SNR must be positive");
    const int m = static_cast<int>(h_hats[0].size());
    const int users = static_cast<int>(h_hats.size());
    CMat b = err_sum;
    for (const auto& h : h_hats) b.noalias() += h * h.adjoint();
    b.diagonal().array() += 1.0 / rho_d;
    Eigen::LDLT<CMat> ldlt(b);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("all_user_snrs: interference matrix could not be factorized");
    CMat stacked(m, users);
    for (int u = 0; u < users; ++u) stacked.col(u) = h_hats[u];
    CMat solved = ldlt.solve(stacked);
    Vec gammas(users);
    for (int u = 0; u < users; ++u) {
        double q = (h_hats[u].adjoint() * solved.col(u)).real()(0);
        if (q < 0.0) q = 0.0;
        // q < 1 is structural (B includes the user's own rank-one term).
        gammas(u) = q / std::max(1.0 - q, 1e-300);
    }
    return gammas;
}

enum class GroupWeight { mrc, unit };

/// Effective full-length combining vector of the grouped receiver: per group
/// v_k^g = J_k^g h_hat_k^g with the group-local MMSE matrix J, stacked and
/// scaled by the MRC weight w_k^g = h_hat_k^g^H J_k^g h_hat_k^g (or 1).
inline CVec small_mimo_combiner(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                                double rho_d, const GroupPartition& partition, int k,
                                GroupWeight weight = GroupWeight::mrc,
                                std::vector<int>* solve_dims = nullptr) {
    detail::check_receiver_args(h_hats, err_covs, rho_d, k);
    const int m = static_cast<int>(h_hats[0].size());
    if (partition.total() != m)
        throw invalid_input("small_mimo_combiner: partition does not cover the array");

    CVec combiner = CVec::Zero(m);
    for (const auto& [start, size] : partition.ranges()) {
        CMat b = CMat::Zero(size, size);
        for (std::size_t u = 0; u < h_hats.size(); ++u) {
            const auto hg = h_hats[u].segment(start, size);
            if (static_cast<int>(u) != k) b.noalias() += hg * hg.adjoint();
            b += err_covs[u].block(start, start, size, size);
        }
        b.diagonal().array() += 1.0 / rho_d;
        Eigen::LDLT<CMat> ldlt(b);
        if (ldlt.info() != Eigen::Success)
            throw numerical_error("small_mimo_combiner: group system could not be factorized");
        if (solve_dims != nullptr) solve_dims->push_back(size);
        CVec vg = ldlt.solve(h_hats[k].segment(start, size));
        const double w = (weight == GroupWeight::mrc)
                             ? (h_hats[k].segment(start, size).adjoint() * vg).real()(0)
                             : 1.0;
        combiner.segment(start, size) = w * vg;
    }
    return combiner;
}

/// Grouped detection: per-group MMSE filtering, outputs combined across
/// groups. Equals the full-scale MMSE output when every user's energy sits
/// inside a single group and unit weights are used.
inline cplx small_mimo_detect(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                              double rho_d, const GroupPartition& partition, const CVec& received,
                              int k, GroupWeight weight = GroupWeight::mrc,
                              std::vector<int>* solve_dims = nullptr) {
    CVec c = small_mimo_combiner(h_hats, err_covs, rho_d, partition, k, weight, solve_dims);
    if (received.size() != c.size())
        throw invalid_input("small_mimo_detect: received vector dimension mismatch");
    return (c.adjoint() * received)(0);
}

/// Worst-case-noise SNR of an arbitrary combining vector c for user k:
/// |c^H h_hat_k|^2 / (c^H B_k c) with B_k the interference matrix. For the
/// grouped receiver this is the post-combining SINR given the estimates.
inline double combiner_snr(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                           double rho_d, const CVec& combiner, int k) {
    CMat b = mmse_interference_matrix(h_hats, err_covs, rho_d, k);
    const double denom = (combiner.adjoint() * b * combiner).real()(0);
    if (!(denom > 0.0)) return 0.0;
    const double num = std::norm((combiner.adjoint() * h_hats[k])(0));
    return num / denom;
}

inline double small_mimo_snr(std::span<const CVec> h_hats, std::span<const CMat> err_covs,
                             double rho_d, const GroupPartition& partition, int k,
                             GroupWeight weight = GroupWeight::mrc) {
    CVec c = small_mimo_combiner(h_hats, err_covs, rho_d, partition, k, weight);
    return combiner_snr(h_hats, err_covs, rho_d, c, k);
}

struct RateEstimate {
    double rate = 0.0;     // bits/s/Hz
    double std_err = 0.0;  // standard error of the mean
};

/// Ergodic rate per user: mean over trials of log2(1 + gamma), where the
/// trial generator returns the per-user SNR vector for trial t.
inline std::vector<RateEstimate> achievable_rate(
    const std::function<Vec(int)>& snr_trial, int trials, int users) {
    if (trials < 1) throw invalid_input("achievable_rate: need at least one trial");
    if (users < 1) throw invalid_input("achievable_rate: need at least one user");
    Vec sum = Vec::Zero(users), sum_sq = Vec::Zero(users);
    for (int t = 0; t < trials; ++t) {
        Vec gammas = snr_trial(t);
        if (gammas.size() != users)
            throw invalid_input("achievable_rate: trial generator width mismatch");
        for (int u = 0; u < users; ++u) {
            const double bits = std::log2(1.0 + gammas(u));
            sum(u) += bits;
            sum_sq(u) += bits * bits;
        }
    }
    std::vector<RateEstimate> out(users);
    for (int u = 0; u < users; ++u) {
        const double mean = sum(u) / trials;
        const double var = std::max(0.0, sum_sq(u) / trials - mean * mean);
        out[u] = {mean, trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0};
    }
    return out;
}

}  // namespace emlens
