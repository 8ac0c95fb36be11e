// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, kept independent of the library's computation paths:
// direct matrix inverses instead of factorized solves, Simpson quadrature
// instead of closed-form normal CDFs.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "emlens/common.hpp"

namespace oracle {

/// Post-filtering SNR by explicit matrix inversion of the interference
/// matrix (no shared code with the solver-based route).
inline double snr_by_inversion(std::span<const emlens::CVec> h_hats,
                               std::span<const emlens::CMat> err_covs, double rho_d, int k) {
    const auto m = h_hats[0].size();
    emlens::CMat b = emlens::CMat::Zero(m, m);
    for (std::size_t u = 0; u < h_hats.size(); ++u) {
        if (static_cast<int>(u) != k) b += h_hats[u] * h_hats[u].adjoint();
        b += err_covs[u];
    }
    b += emlens::CMat::Identity(m, m) / rho_d;
    return (h_hats[k].adjoint() * b.inverse() * h_hats[k]).real()(0);
}

/// Average-SNR bound by explicit inversion.
inline double bound_by_inversion(std::span<const emlens::CMat> est_covs,
                                 std::span<const emlens::CMat> err_covs, double rho_d, int k) {
    const auto m = est_covs[0].rows();
    emlens::CMat denom = emlens::CMat::Zero(m, m);
    for (std::size_t u = 0; u < est_covs.size(); ++u) {
        if (static_cast<int>(u) != k) denom += est_covs[u];
        denom += err_covs[u];
    }
    denom += emlens::CMat::Identity(m, m) / rho_d;
    return (denom.inverse() * est_covs[k]).trace().real();
}

/// Integral of the normal density over [lo, hi] by composite Simpson.
inline double gaussian_mass_simpson(double mean, double variance, double lo, double hi,
                                    int panels = 4000) {
    const double h = (hi - lo) / panels;
    auto pdf = [&](double y) {
        return std::exp(-(y - mean) * (y - mean) / (2.0 * variance)) /
               std::sqrt(2.0 * emlens::kPi * variance);
    };
    double total = pdf(lo) + pdf(hi);
    for (int i = 1; i < panels; ++i) total += pdf(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return total * h / 3.0;
}

}  // namespace oracle
