// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <cmath>

#include "emlens/common.hpp"

namespace emlens {

/// Uniform linear array along the y-axis, centered at the origin.
/// All lengths are expressed in carrier wavelengths, so `spacing` is d/lambda.
struct ArrayGeometry {
    int elements;     // M
    double spacing;   // d, wavelengths
    double coverage;  // half-angle of the served sector, radians, in (0, pi]

    ArrayGeometry(int m, double d, double theta_max)
        : elements(m), spacing(d), coverage(theta_max) {
        if (m < 1) throw invalid_input("ArrayGeometry: element count must be >= 1");
        if (!(d > 0.0)) throw invalid_input("ArrayGeometry: spacing must be positive");
        if (!(theta_max > 0.0) || theta_max > kPi)
            throw invalid_input("ArrayGeometry: coverage must be in (0, pi]");
    }

    /// Element position y_m for 0-based index m; symmetric about 0.
    double position(int m) const {
        return -0.5 * (elements - 1) * spacing + m * spacing;
    }

    Vec positions() const {
        Vec y(elements);
        for (int m = 0; m < elements; ++m) y(m) = position(m);
        return y;
    }
};

/// One uplink terminal: large-scale power, nominal angle of arrival, and the
/// power azimuth spectrum width around it.
struct UserProfile {
    double gain;            // beta, large-scale fading power
    double aoa;             // theta, radians
    double angular_spread;  // sigma_phi, radians
    int ray_count = 100;    // L, used only by finite-ray channel synthesis

    UserProfile(double beta, double theta, double sigma_phi, int rays = 100)
        : gain(beta), aoa(theta), angular_spread(sigma_phi), ray_count(rays) {
        if (beta < 0.0) throw invalid_input("UserProfile: gain must be >= 0");
        if (sigma_phi < 0.0) throw invalid_input("UserProfile: angular spread must be >= 0");
        if (rays < 1) throw invalid_input("UserProfile: ray count must be >= 1");
    }
};

inline void require_in_coverage(const ArrayGeometry& geom, double theta) {
    if (std::abs(theta) > geom.coverage + 1e-12)
        throw invalid_input("angle of arrival outside the array's coverage sector");
}

}  // namespace emlens
