// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
//
// Closed-form average-SNR machinery: the Jensen lower bound on E[gamma_k],
// its single-user eigenvalue form, the uncorrelated multiuser form, and the
// majorization toolkit the performance comparisons rest on.
#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "emlens/simulation.hpp"

namespace emlens {

/// Covariance-only inputs of the average-SNR bound.
struct SnrBoundInputs {
    std::vector<Covariance> covs;  // lensed (or plain) covariance per user
    double rho_tr;
    double rho_d;
};

/// Lower bound on the average received SNR of user k,
/// tr((sum_{u != k} C_u + sum_u E_u + I/rho_d)^-1 C_k).
/// Exact (not just a bound) when K = 1.
inline double avg_snr_lower_bound(const SnrBoundInputs& inputs, int k) {
    if (inputs.covs.empty()) throw invalid_input("avg_snr_lower_bound: no users");
    if (k < 0 || k >= static_cast<int>(inputs.covs.size()))
        throw invalid_input("avg_snr_lower_bound: user index out of range");
    if (!(inputs.rho_tr > 0.0) || !(inputs.rho_d > 0.0))
        throw invalid_input("avg_snr_lower_bound: SNRs must be positive");

    const int m = inputs.covs[0].dim();
    CMat denom = CMat::Zero(m, m);
    CMat target;
    for (std::size_t u = 0; u < inputs.covs.size(); ++u) {
        if (inputs.covs[u].dim() != m)
            throw invalid_input("avg_snr_lower_bound: covariance dimension mismatch");
        auto stats = estimation_covariances(inputs.covs[u], inputs.rho_tr);
        denom += stats.error_cov;
        if (static_cast<int>(u) == k)
            target = std::move(stats.estimate_cov);
        else
            denom += stats.estimate_cov;
    }
    denom.diagonal().array() += 1.0 / inputs.rho_d;
    Eigen::LDLT<CMat> ldlt(denom);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("avg_snr_lower_bound: denominator could not be factorized");
    const double gamma = ldlt.solve(target).trace().real();
    return gamma > 0.0 ? gamma : 0.0;
}

/// Single-user average SNR as a function of the covariance eigenvalues:
/// f(x) = sum_m rho_d rho_tr x_m^2 / ((rho_d + rho_tr) x_m + 1).
/// Strictly Schur-convex for finite SNRs.
inline double single_user_avg_snr(const Vec& eigs, double rho_tr, double rho_d) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        double x = eigs(i);
        if (x < 0.0) {
            if (x < -1e-9 * (1.0 + eigs.cwiseAbs().maxCoeff()))
                throw invalid_input("single_user_avg_snr: negative eigenvalue");
            x = 0.0;
        }
        total += rho_d * rho_tr * x * x / ((rho_d + rho_tr) * x + 1.0);
    }
    return total;
}

/// Eigenvalues of a Hermitian PSD covariance, sorted descending, clipped at
/// zero.
inline Vec covariance_eigenvalues(const Covariance& cov) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(cov.matrix(), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw numerical_error("covariance_eigenvalues: eigendecomposition failed");
    Vec lambda = eig.eigenvalues().cwiseMax(0.0);
    std::sort(lambda.data(), lambda.data() + lambda.size(), std::greater<double>());
    return lambda;
}

/// Average desired (xi) and interference (kappa) power per element seen by
/// user k under per-user power distributions.
struct PowerSplit {
    Vec desired;       // xi_m = beta_k a_m(theta_k)
    Vec interference;  // kappa_m = sum_{u != k} beta_u a_m(theta_u)
};

inline PowerSplit power_split(const Vec& gains, std::span<const PowerDistribution> dists, int k) {
    if (gains.size() != static_cast<Eigen::Index>(dists.size()))
        throw invalid_input("power_split: gains and distributions must align");
    if (k < 0 || k >= static_cast<int>(dists.size()))
        throw invalid_input("power_split: user index out of range");
    const int m = dists[0].size();
    PowerSplit split{gains(k) * dists[k].a, Vec::Zero(m)};
    for (std::size_t u = 0; u < dists.size(); ++u) {
        if (dists[u].size() != m) throw invalid_input("power_split: dimension mismatch");
        if (static_cast<int>(u) != k) split.interference += gains(u) * dists[u].a;
    }
    return split;
}

/// psi(xi, kappa) = sum_m rho_tr rho_d xi_m^2 /
///   (xi_m (rho_tr rho_d kappa_m + rho_tr + rho_d) + rho_d kappa_m + 1).
inline double psi_bound(const PowerSplit& split, double rho_tr, double rho_d) {
    if (split.desired.size() != split.interference.size())
        throw invalid_input("psi_bound: power vectors must align");
    double total = 0.0;
    for (Eigen::Index m = 0; m < split.desired.size(); ++m) {
        const double xi = split.desired(m);
        const double kappa = split.interference(m);
        total += rho_tr * rho_d * xi * xi /
                 (xi * (rho_tr * rho_d * kappa + rho_tr + rho_d) + rho_d * kappa + 1.0);
    }
    return total;
}

/// Average-SNR lower bound for spatially uncorrelated channels
/// (R_u = beta_u diag(a(theta_u))); the diagonal specialization of the
/// general bound.
inline double multiuser_uncorrelated_bound(const Vec& gains,
                                           std::span<const PowerDistribution> dists,
                                           double rho_tr, double rho_d, int k) {
    if (!(rho_tr > 0.0) || !(rho_d > 0.0))
        throw invalid_input("multiuser_uncorrelated_bound: SNRs must be positive");
    return psi_bound(power_split(gains, dists, k), rho_tr, rho_d);
}

/// True iff x is majorized by y: sorted-descending partial sums of x never
/// exceed those of y and the totals agree. Comparisons carry an absolute
/// slack of 1e-9 * (1 + sum |y|) to absorb floating-point accumulation.
inline bool majorized_by(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw invalid_input("majorized_by: length mismatch");
    const Eigen::Index n = x.size();
    Vec xs = x, ys = y;
    std::sort(xs.data(), xs.data() + n, std::greater<double>());
    std::sort(ys.data(), ys.data() + n, std::greater<double>());
    const double tol = 1e-9 * (1.0 + y.cwiseAbs().sum());
    double sx = 0.0, sy = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        sx += xs(i);
        sy += ys(i);
        if (sx > sy + tol) return false;
    }
    sx += xs(n - 1);
    sy += ys(n - 1);
    return std::abs(sx - sy) <= tol;
}

/// Schur-convexity condition of the quadratic form x^T S x on the
/// nonincreasing orthant, evaluated on S re-indexed by `perm`:
/// sum_{n <= l} (s_kn - s_(k+1)n) >= 0 for every l and k.
inline bool quadratic_schur_condition(const Mat& s, std::span<const int> perm) {
    const int m = static_cast<int>(s.rows());
    if (s.cols() != m) throw invalid_input("quadratic_schur_condition: matrix must be square");
    if (static_cast<int>(perm.size()) != m)
        throw invalid_input("quadratic_schur_condition: permutation length mismatch");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + s.cwiseAbs().maxCoeff()))
        throw invalid_input("quadratic_schur_condition: matrix must be symmetric");
    const double tol = 1e-12 * (1.0 + s.cwiseAbs().maxCoeff());
    for (int k = 0; k + 1 < m; ++k) {
        double partial = 0.0;
        for (int l = 0; l < m; ++l) {
            partial += s(perm[k], perm[l]) - s(perm[k + 1], perm[l]);
            if (partial < -tol) return false;
        }
    }
    return true;
}

inline std::vector<int> descending_permutation(const Vec& v) {
    std::vector<int> perm(v.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) { return v(i) > v(j); });
    return perm;
}

/// Low-SNR quadratic approximation of the single-user average SNR:
/// rho_d rho_tr a^T Q a with Q_mn = |R_mn|^2. Valid when
/// (rho_d + rho_tr) * beta * M << 1.
inline double low_snr_quadratic_form(const Covariance& cov, const PowerDistribution& dist,
                                     double rho_tr, double rho_d) {
    if (dist.size() != cov.dim())
        throw invalid_input("low_snr_quadratic_form: dimension mismatch");
    const Mat q = cov.matrix().cwiseAbs2();
    return rho_d * rho_tr * (dist.a.transpose() * q * dist.a)(0);
}

/// Sign condition under which focusing provably helps every user in the
/// uncorrelated multiuser system: elements carrying more desired power must
/// not also carry more interference. Reported separately: whether every
/// user's power distribution is actually non-uniform.
struct FocusingAlignmentReport {
    bool condition_holds = true;  // (xi_m - xi_n)(kappa_m - kappa_n) <= 0 for all pairs
    bool all_non_uniform = true;  // a(theta_u) != 1-vector for every u
};

inline FocusingAlignmentReport focusing_alignment_check(
    const Vec& gains, std::span<const PowerDistribution> dists, int k) {
    FocusingAlignmentReport report;
    const PowerSplit split = power_split(gains, dists, k);
    const int m = static_cast<int>(split.desired.size());
    const double scale = (1.0 + split.desired.cwiseAbs().maxCoeff()) *
                         (1.0 + split.interference.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    for (int i = 0; i < m && report.condition_holds; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double product = (split.desired(i) - split.desired(j)) *
                                   (split.interference(i) - split.interference(j));
            if (product > tol) {
                report.condition_holds = false;
                break;
            }
        }
    for (const auto& dist : dists)
        if ((dist.a.array() - 1.0).abs().maxCoeff() <= 1e-9) report.all_non_uniform = false;
    return report;
}

/// Theory bounds and paired Monte-Carlo averages for a scenario evaluated
/// with and without its lens.
struct LensGainReport {
    Vec bound_with, bound_without;          // Jensen bound per user
    Vec mc_with, mc_without;                // empirical mean SNR per user
    Vec se_with, se_without;                // standard errors of the means
    Vec gap_mean, gap_se;                   // paired per-trial SNR differences
    int trials = 0;
};

/// Evaluates the scenario's bound and (for trials > 0) the empirical average
/// SNR with the lens applied and removed. Both systems share each trial's
/// white noise draws, so gap_se reflects the paired estimator.
inline LensGainReport compare_with_without_lens(const Scenario& scenario, int trials,
                                                std::uint64_t seed, int threads = 0) {
    if (!scenario.lens.has_value())
        throw invalid_input("compare_with_without_lens: scenario has no lens to compare");
    const int users = static_cast<int>(scenario.users.size());
    SystemModel with = build_system_model(scenario.geom, scenario.users, &*scenario.lens,
                                          scenario.rho_tr);
    SystemModel without =
        build_system_model(scenario.geom, scenario.users, nullptr, scenario.rho_tr);

    LensGainReport report;
    report.bound_with.resize(users);
    report.bound_without.resize(users);
    for (int k = 0; k < users; ++k) {
        report.bound_with(k) =
            avg_snr_lower_bound({with.covs, scenario.rho_tr, scenario.rho_d}, k);
        report.bound_without(k) =
            avg_snr_lower_bound({without.covs, scenario.rho_tr, scenario.rho_d}, k);
    }
    if (trials <= 0) return report;

    const int m = scenario.geom.elements;
    auto body = [&](int, RngStream& rng) {
        std::vector<CVec> est_with(users), est_without(users);
        for (int u = 0; u < users; ++u) {
            const CVec white = rng.cnormal_vec(m);
            const CVec noise = rng.cnormal_vec(m);
            const CVec noise_scaled =
                scenario.rho_tr >= kPerfectCsiSnr ? CVec::Zero(m).eval()
                                                  : CVec(noise / std::sqrt(scenario.rho_tr));
            est_with[u] = with.estimators[u].estimate(with.factors[u].apply(white) + noise_scaled);
            est_without[u] =
                without.estimators[u].estimate(without.factors[u].apply(white) + noise_scaled);
        }
        Vec row(2 * users);
        row.head(users) = all_user_snrs(est_with, with.err_cov_sum, scenario.rho_d);
        row.tail(users) = all_user_snrs(est_without, without.err_cov_sum, scenario.rho_d);
        return row;
    };
    MonteCarloStats stats = monte_carlo(trials, 2 * users, seed, threads, body);

    report.trials = trials;
    report.mc_with = stats.mean.head(users);
    report.mc_without = stats.mean.tail(users);
    report.se_with = stats.std_err.head(users);
    report.se_without = stats.std_err.tail(users);
    report.gap_mean.resize(users);
    report.gap_se.resize(users);
    for (int k = 0; k < users; ++k) {
        Vec diff = stats.samples.col(k) - stats.samples.col(users + k);
        const double mean = diff.mean();
        report.gap_mean(k) = mean;
        report.gap_se(k) =
            trials > 1
                ? std::sqrt((diff.array() - mean).square().sum() / (trials - 1) / trials)
                : 0.0;
    }
    return report;
}

}  // namespace emlens
