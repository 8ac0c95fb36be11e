// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "emlens/receiver.hpp"

namespace emlens {

/// One uplink setup: array, terminals, optional lens, and the two SNRs.
struct Scenario {
    ArrayGeometry geom;
    std::vector<UserProfile> users;
    std::optional<LensProfile> lens;
    double rho_tr;
    double rho_d;
};

/// Everything that is fixed across coherence blocks for one system:
/// covariances, sampling factors, estimator caches, and error-covariance
/// sums. Built once, shared read-only by all trial workers.
struct SystemModel {
    std::vector<Covariance> covs;
    std::vector<PowerDistribution> power;  // one per user when a lens is present
    std::vector<CovarianceFactor> factors;
    std::vector<MmseEstimator> estimators;
    std::vector<CMat> err_covs;
    CMat err_cov_sum;
    int dim = 0;

    int users() const { return static_cast<int>(covs.size()); }
};

inline SystemModel model_from_covariances(std::vector<Covariance> covs, double rho_tr) {
    if (covs.empty()) throw invalid_input("SystemModel: need at least one user");
    SystemModel model;
    model.dim = covs[0].dim();
    model.err_cov_sum = CMat::Zero(model.dim, model.dim);
    for (const auto& cov : covs) {
        if (cov.dim() != model.dim) throw invalid_input("SystemModel: covariance dimension mismatch");
        model.factors.emplace_back(cov);
        model.estimators.emplace_back(cov, rho_tr);
        model.err_covs.push_back(model.estimators.back().error_cov());
        model.err_cov_sum += model.err_covs.back();
    }
    model.covs = std::move(covs);
    return model;
}

inline SystemModel build_system_model(const ArrayGeometry& geom,
                                      const std::vector<UserProfile>& users,
                                      const LensProfile* lens, double rho_tr) {
    std::vector<Covariance> covs;
    std::vector<PowerDistribution> power;
    covs.reserve(users.size());
    for (const auto& user : users) {
        Covariance r = gaussian_pas_covariance(geom, user);
        if (lens != nullptr) {
            power.push_back(lens_power_distribution(geom, *lens, user.aoa));
            r = apply_lens_covariance(r, power.back());
        }
        covs.push_back(std::move(r));
    }
    SystemModel model = model_from_covariances(std::move(covs), rho_tr);
    model.power = std::move(power);
    return model;
}

/// Channel realizations and their estimates for one coherence block.
struct TrialDraw {
    std::vector<CVec> channels;
    std::vector<CVec> estimates;
};

inline TrialDraw draw_trial(const SystemModel& model, double rho_tr, RngStream& rng) {
    TrialDraw draw;
    draw.channels.reserve(model.users());
    draw.estimates.reserve(model.users());
    for (int u = 0; u < model.users(); ++u) {
        draw.channels.push_back(model.factors[u].sample(rng));
        CVec y = simulate_training(draw.channels.back(), rho_tr, rng);
        draw.estimates.push_back(model.estimators[u].estimate(y));
    }
    return draw;
}

inline Vec trial_snrs(const SystemModel& model, const TrialDraw& draw, double rho_d) {
    return all_user_snrs(draw.estimates, model.err_cov_sum, rho_d);
}

/// Post-combining SNRs of the grouped receiver, conditioned on the trial's
/// estimates: gamma_k = |c^H h_hat_k|^2 / (c^H B_k c) with c the stacked
/// per-group filters.
inline Vec trial_snrs_grouped(const SystemModel& model, const TrialDraw& draw, double rho_d,
                              const GroupPartition& partition,
                              GroupWeight weight = GroupWeight::mrc) {
    const int users = model.users();
    CMat b = model.err_cov_sum;
    for (const auto& h : draw.estimates) b.noalias() += h * h.adjoint();
    b.diagonal().array() += 1.0 / rho_d;
    Vec gammas(users);
    for (int k = 0; k < users; ++k) {
        CVec c = small_mimo_combiner(draw.estimates, model.err_covs, rho_d, partition, k, weight);
        const double num = std::norm((c.adjoint() * draw.estimates[k])(0));
        const double denom = (c.adjoint() * b * c).real()(0) - num;
        gammas(k) = denom > 0.0 ? num / denom : 0.0;
    }
    return gammas;
}

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Per-trial sample matrix plus column means and standard errors.
struct MonteCarloStats {
    Mat samples;  // trials x width
    Vec mean;
    Vec std_err;
    int trials = 0;
};

/// Runs `body(trial, rng)` for trial = 0..trials-1 on a worker pool. Each
/// trial draws from RngStream::substream(seed, trial), and results land in a
/// preallocated row, so values are identical for any thread count.
inline MonteCarloStats monte_carlo(int trials, int width, std::uint64_t seed, int threads,
                                   const std::function<Vec(int, RngStream&)>& body) {
    if (trials < 1) throw invalid_input("monte_carlo: need at least one trial");
    if (width < 1) throw invalid_input("monte_carlo: need at least one output column");

    MonteCarloStats stats;
    stats.trials = trials;
    stats.samples.resize(trials, width);

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const int t = next.fetch_add(1);
            if (t >= trials) break;
            try {
                RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(t));
                Vec row = body(t, rng);
                if (row.size() != width)
                    throw invalid_input("monte_carlo: body returned wrong width");
                stats.samples.row(t) = row.transpose();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };

    const int pool = std::min(resolve_thread_count(threads), trials);
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(pool);
        for (int i = 0; i < pool; ++i) workers.emplace_back(worker);
        for (auto& w : workers) w.join();
    }
    if (error) std::rethrow_exception(error);

    stats.mean = stats.samples.colwise().mean();
    stats.std_err = Vec::Zero(width);
    if (trials > 1) {
        for (int c = 0; c < width; ++c) {
            const double var =
                (stats.samples.col(c).array() - stats.mean(c)).square().sum() / (trials - 1);
            stats.std_err(c) = std::sqrt(var / trials);
        }
    }
    return stats;
}

namespace detail {
inline std::vector<RateEstimate> rates_from_stats(const MonteCarloStats& stats) {
    std::vector<RateEstimate> rates(stats.mean.size());
    for (Eigen::Index u = 0; u < stats.mean.size(); ++u)
        rates[u] = {stats.mean(u), stats.std_err(u)};
    return rates;
}
}  // namespace detail

/// Ergodic per-user rate of the full-scale receiver over seeded trials.
inline std::vector<RateEstimate> full_mmse_rate(const SystemModel& model, double rho_tr,
                                                double rho_d, int trials, std::uint64_t seed,
                                                int threads = 0) {
    auto body = [&](int, RngStream& rng) {
        const TrialDraw draw = draw_trial(model, rho_tr, rng);
        return Vec(trial_snrs(model, draw, rho_d).array().log1p() / std::log(2.0));
    };
    return detail::rates_from_stats(monte_carlo(trials, model.users(), seed, threads, body));
}

/// Ergodic per-user rate of the grouped receiver, averaging log2(1 + gamma)
/// of the post-combining SNR. Sharing the seed with full_mmse_rate pairs the
/// trials, so the two receivers see identical channel realizations.
inline std::vector<RateEstimate> small_mimo_rate(const SystemModel& model, double rho_tr,
                                                 double rho_d, const GroupPartition& partition,
                                                 int trials, std::uint64_t seed, int threads = 0,
                                                 GroupWeight weight = GroupWeight::mrc) {
    auto body = [&](int, RngStream& rng) {
        const TrialDraw draw = draw_trial(model, rho_tr, rng);
        return Vec(trial_snrs_grouped(model, draw, rho_d, partition, weight).array().log1p() /
                   std::log(2.0));
    };
    return detail::rates_from_stats(monte_carlo(trials, model.users(), seed, threads, body));
}

}  // namespace emlens
