// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <utility>
#include <vector>

#include "emlens/covariance.hpp"

namespace emlens {

/// Above this training SNR the regularized solve is numerically meaningless;
/// the estimator switches to the perfect-CSI limit (h_hat = y, E = 0).
inline constexpr double kPerfectCsiSnr = 1e12;

/// Uplink training parameters. Pilots are orthonormal by assumption, so the
/// tau-symbol waveform never needs to be materialized; only the existence
/// condition tau >= K matters.
struct PilotConfig {
    int symbols;       // tau
    double snr;        // rho_tr, linear
    PilotConfig(int tau, double rho_tr) : symbols(tau), snr(rho_tr) {
        if (tau < 1) throw invalid_input("PilotConfig: training length must be >= 1");
        if (!(rho_tr > 0.0)) throw invalid_input("PilotConfig: training SNR must be positive");
    }
};

/// Projected training observation for one user: y = h + n / sqrt(rho_tr),
/// n ~ CN(0, I). This is the sufficient statistic left after correlating the
/// received block with the user's orthonormal pilot.
inline CVec simulate_training(const CVec& channel, double rho_tr, RngStream& rng) {
    if (!(rho_tr > 0.0)) throw invalid_input("simulate_training: training SNR must be positive");
    if (rho_tr >= kPerfectCsiSnr) return channel;
    return channel + rng.cnormal_vec(channel.size()) / std::sqrt(rho_tr);
}

/// Per-user training observations for a K-user block; rejects pilot
/// configurations that cannot be orthogonal (tau < K).
inline std::vector<CVec> simulate_training(const std::vector<CVec>& channels,
                                           const PilotConfig& pilots, RngStream& rng) {
    if (pilots.symbols < static_cast<int>(channels.size()))
        throw invalid_input("simulate_training: need at least K pilot symbols for orthogonality");
    std::vector<CVec> obs;
    obs.reserve(channels.size());
    for (const auto& h : channels) obs.push_back(simulate_training(h, pilots.snr, rng));
    return obs;
}

namespace detail {
inline Eigen::LDLT<CMat> regularized_ldlt(const CMat& r, double rho) {
    CMat shifted = r;
    shifted.diagonal().array() += 1.0 / rho;
    Eigen::LDLT<CMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("estimation: regularized system could not be factorized");
    return ldlt;
}
}  // namespace detail

/// MMSE channel estimate h_hat = R (R + I/rho_tr)^-1 y.
inline CVec mmse_estimate(const Covariance& cov, double rho_tr, const CVec& y_tr) {
    if (!(rho_tr > 0.0)) throw invalid_input("mmse_estimate: training SNR must be positive");
    if (y_tr.size() != cov.dim()) throw invalid_input("mmse_estimate: dimension mismatch");
    if (rho_tr >= kPerfectCsiSnr) return y_tr;
    return cov.matrix() * detail::regularized_ldlt(cov.matrix(), rho_tr).solve(y_tr);
}

struct EstimationCovariances {
    CMat estimate_cov;  // C = R (R + I/rho_tr)^-1 R
    CMat error_cov;     // E = R - C
};

inline EstimationCovariances estimation_covariances(const Covariance& cov, double rho_tr) {
    if (!(rho_tr > 0.0))
        throw invalid_input("estimation_covariances: training SNR must be positive");
    const int m = cov.dim();
    if (rho_tr >= kPerfectCsiSnr) return {cov.matrix(), CMat::Zero(m, m)};
    CMat c = cov.matrix() * detail::regularized_ldlt(cov.matrix(), rho_tr).solve(cov.matrix());
    c = 0.5 * (c + c.adjoint().eval());  // solver round-off breaks exact symmetry
    CMat e = cov.matrix() - c;
    return {std::move(c), std::move(e)};
}

/// Estimate plus its second-order statistics for one user and one coherence
/// block.
struct EstimationStats {
    CVec h_hat;
    CMat estimate_cov;
    CMat error_cov;
};

inline EstimationStats estimate_user(const Covariance& cov, double rho_tr, const CVec& channel,
                                     RngStream& rng) {
    auto second_order = estimation_covariances(cov, rho_tr);
    CVec y = simulate_training(channel, rho_tr, rng);
    return {mmse_estimate(cov, rho_tr, y), std::move(second_order.estimate_cov),
            std::move(second_order.error_cov)};
}

/// Precomputed estimator for repeated draws against a fixed covariance:
/// caches W = R (R + I/rho_tr)^-1 and the C/E pair.
class MmseEstimator {
public:
    MmseEstimator(const Covariance& cov, double rho_tr) : perfect_(rho_tr >= kPerfectCsiSnr) {
        if (!(rho_tr > 0.0)) throw invalid_input("MmseEstimator: training SNR must be positive");
        const int m = cov.dim();
        if (perfect_) {
            filter_ = CMat::Identity(m, m);
            estimate_cov_ = cov.matrix();
            error_cov_ = CMat::Zero(m, m);
        } else {
            auto ldlt = detail::regularized_ldlt(cov.matrix(), rho_tr);
            filter_ = cov.matrix() * ldlt.solve(CMat::Identity(m, m));
            estimate_cov_ = filter_ * cov.matrix();
            estimate_cov_ = 0.5 * (estimate_cov_ + estimate_cov_.adjoint().eval());
            error_cov_ = cov.matrix() - estimate_cov_;
        }
    }

    CVec estimate(const CVec& y_tr) const { return perfect_ ? y_tr : CVec(filter_ * y_tr); }

    const CMat& estimate_cov() const { return estimate_cov_; }
    const CMat& error_cov() const { return error_cov_; }

private:
    CMat filter_, estimate_cov_, error_cov_;
    bool perfect_;
};

}  // namespace emlens
