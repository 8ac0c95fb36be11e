// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "emlens/geometry.hpp"
#include "emlens/lens.hpp"
#include "emlens/rng.hpp"

namespace emlens {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdClipRel = 1e-9;

/// Hermitian positive-semidefinite channel covariance. Hermiticity is
/// enforced at construction; definiteness is checked where a factorization
/// is actually taken (eigenvalues above -kPsdClipRel * lambda_max count as
/// rounding noise and clip to zero).
class Covariance {
public:
    explicit Covariance(CMat m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw invalid_input("Covariance: matrix must be square");
        const double scale = 1.0 + m_.cwiseAbs().maxCoeff();
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale)
            throw invalid_input("Covariance: matrix is not Hermitian");
    }

    static Covariance zero(int dim) { return Covariance(CMat::Zero(dim, dim)); }

    const CMat& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double trace() const { return m_.trace().real(); }

    Covariance submatrix(const std::vector<int>& idx) const {
        CMat s(idx.size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = m_(idx[i], idx[j]);
        return Covariance(std::move(s));
    }

private:
    CMat m_;
};

/// Spatial covariance of a ULA channel under a Gaussian power azimuth
/// spectrum: [R]_mn = beta * exp(-(sigma^2/2) (2 pi d (m-n) cos theta)^2)
///                         * exp(j 2 pi d (m-n) sin theta).
/// Hermitian Toeplitz with constant diagonal beta.
inline Covariance gaussian_pas_covariance(const ArrayGeometry& geom, const UserProfile& user) {
    require_in_coverage(geom, user.aoa);
    const int m = geom.elements;
    const double wavenumber_spacing = 2.0 * kPi * geom.spacing;
    const double damp = 0.5 * user.angular_spread * user.angular_spread *
                        wavenumber_spacing * wavenumber_spacing *
                        std::cos(user.aoa) * std::cos(user.aoa);
    const double phase_step = wavenumber_spacing * std::sin(user.aoa);

    CVec first_col(m);
    for (int k = 0; k < m; ++k)
        first_col(k) = user.gain * std::exp(-damp * k * k) *
                       std::exp(cplx(0.0, phase_step * k));

    CMat r(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const int k = i - j;
            r(i, j) = (k >= 0) ? first_col(k) : std::conj(first_col(-k));
        }
    }
    return Covariance(std::move(r));
}

/// Effective covariance behind the lens: sqrt(A) R sqrt(A) with
/// A = diag(a). Leaves the trace unchanged when the entries of a sum to M.
inline Covariance apply_lens_covariance(const Covariance& r, const PowerDistribution& dist) {
    if (dist.size() != r.dim())
        throw invalid_input("apply_lens_covariance: dimension mismatch");
    const Vec root = dist.a.cwiseMax(0.0).cwiseSqrt();
    CMat scaled = root.asDiagonal() * r.matrix() * root.asDiagonal();
    return Covariance(std::move(scaled));
}

/// Square-root factor B with B B^H = R, used to draw CN(0, R) samples.
/// Eigenvalues in [-kPsdClipRel * lambda_max, 0) clip to zero; anything more
/// negative is rejected as a genuinely indefinite input.
class CovarianceFactor {
public:
    explicit CovarianceFactor(const Covariance& cov) {
        Eigen::SelfAdjointEigenSolver<CMat> eig(cov.matrix());
        if (eig.info() != Eigen::Success)
            throw numerical_error("CovarianceFactor: eigendecomposition failed");
        Vec lambda = eig.eigenvalues();
        const double lambda_max = std::max(0.0, lambda.maxCoeff());
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda(i) < -kPsdClipRel * lambda_max)
                throw invalid_input("CovarianceFactor: covariance is not positive semidefinite");
            if (lambda(i) < 0.0) lambda(i) = 0.0;
        }
        b_ = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
    }

    /// One draw from CN(0, R).
    CVec sample(RngStream& rng) const { return b_ * rng.cnormal_vec(b_.cols()); }

    /// Maps a CN(0, I) vector through the factor; lets callers reuse one
    /// white draw across systems for paired comparisons.
    CVec apply(const CVec& white) const { return b_ * white; }

    int dim() const { return static_cast<int>(b_.rows()); }

private:
    CMat b_;
};

inline CVec sample_channel(const Covariance& cov, RngStream& rng) {
    return CovarianceFactor(cov).sample(rng);
}

/// Finite-ray channel synthesis: L plane waves at theta + phi_l with
/// phi_l ~ N(0, sigma_phi^2), unit per-ray power gains, and i.i.d. uniform
/// path phases (the amplitudes must be zero-mean for the sum to approach a
/// zero-mean CSCG vector; a unit power gain leaves only the phase free).
/// With a lens, the per-element amplitude scales by sqrt(a_m) evaluated at
/// the nominal AoA (the offsets are small enough that the focus window does
/// not move).
inline CVec sample_channel_rays(const ArrayGeometry& geom, const UserProfile& user,
                                const LensProfile* lens, RngStream& rng) {
    require_in_coverage(geom, user.aoa);
    const int m = geom.elements;
    const double amp = std::sqrt(user.gain / user.ray_count);

    CVec h = CVec::Zero(m);
    for (int l = 0; l < user.ray_count; ++l) {
        const double theta = user.aoa + user.angular_spread * rng.normal();
        const double path_phase = 2.0 * kPi * rng.uniform();
        const cplx step = std::exp(cplx(0.0, 2.0 * kPi * geom.spacing * std::sin(theta)));
        cplx phase = std::exp(cplx(0.0, path_phase));
        for (int i = 0; i < m; ++i) {
            h(i) += amp * phase;
            phase *= step;
        }
    }
    if (lens != nullptr) {
        const PowerDistribution dist = lens_power_distribution(geom, *lens, user.aoa);
        h.array() *= dist.a.cwiseMax(0.0).cwiseSqrt().array();
    }
    return h;
}

}  // namespace emlens
