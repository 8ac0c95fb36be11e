// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include "emlens/geometry.hpp"

namespace emlens {

/// Energy-focusing front end: an incident wave with angle of arrival theta is
/// concentrated on the 2*half_width+1 elements around an AoA-dependent peak.
/// The continuous power density is Gaussian with variance `spread` around
/// peak_map(theta); peak_map must be monotone nondecreasing on the coverage
/// sector.
struct LensProfile {
    int half_width;                          // Delta, elements
    double spread;                           // V, squared wavelengths
    std::function<double(double)> peak_map;  // theta -> ybar(theta)

    LensProfile(int delta, double v, std::function<double(double)> map)
        : half_width(delta), spread(v), peak_map(std::move(map)) {
        if (delta < 0) throw invalid_input("LensProfile: half width must be >= 0");
        if (!(v > 0.0)) throw invalid_input("LensProfile: spread must be positive");
        if (!peak_map) throw invalid_input("LensProfile: peak map required");
    }
};

/// Per-element share of the received power, scaled so the entries sum to the
/// element count. peak_index/half_width describe where the lens put the mass.
struct PowerDistribution {
    Vec a;
    int peak_index;  // 0-based
    int half_width;

    PowerDistribution(Vec values, int peak, int delta)
        : a(std::move(values)), peak_index(peak), half_width(delta) {
        const auto m = a.size();
        if (m < 1) throw invalid_input("PowerDistribution: empty vector");
        if (peak < 0 || peak >= m) throw invalid_input("PowerDistribution: peak index out of range");
        if (delta < 0) throw invalid_input("PowerDistribution: half width must be >= 0");
        if ((a.array() < -1e-12).any())
            throw invalid_input("PowerDistribution: negative entry");
        const double total = a.sum();
        if (std::abs(total - static_cast<double>(m)) > 1e-9 * static_cast<double>(m))
            throw invalid_input("PowerDistribution: entries must sum to the element count");
    }

    int size() const { return static_cast<int>(a.size()); }

    static PowerDistribution uniform(int m) {
        return PowerDistribution(Vec::Ones(m), 0, m);
    }
};

/// Element index nearest to position ybar; an exact midpoint resolves to the
/// lower index.
inline int peak_element(const ArrayGeometry& geom, double ybar) {
    const double t = (ybar - geom.position(0)) / geom.spacing;
    double lo = std::floor(t);
    int idx = static_cast<int>(lo) + ((t - lo > 0.5) ? 1 : 0);
    if (idx < 0) idx = 0;
    if (idx >= geom.elements) idx = geom.elements - 1;
    return idx;
}

namespace detail {
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace detail

/// Power distribution vector a(theta): Gaussian density integrated over each
/// element's d-wide bin inside the focus window, zero outside, normalized so
/// the entries sum to M.
inline PowerDistribution lens_power_distribution(const ArrayGeometry& geom,
                                                 const LensProfile& lens, double theta) {
    require_in_coverage(geom, theta);

    // The focus window must stay inside the array over the whole sector.
    const int peak_lo = peak_element(geom, lens.peak_map(-geom.coverage));
    const int peak_hi = peak_element(geom, lens.peak_map(geom.coverage));
    if (lens.half_width > peak_lo || lens.half_width > geom.elements - 1 - peak_hi)
        throw invalid_input("lens_power_distribution: focus window leaves the array at the sector edge");

    const double ybar = lens.peak_map(theta);
    const int peak = peak_element(geom, ybar);
    const double sigma = std::sqrt(lens.spread);
    const double half_bin = 0.5 * geom.spacing;

    Vec a = Vec::Zero(geom.elements);
    double total = 0.0;
    const int lo = std::max(0, peak - lens.half_width);
    const int hi = std::min(geom.elements - 1, peak + lens.half_width);
    for (int m = lo; m <= hi; ++m) {
        const double y = geom.position(m);
        const double mass = detail::normal_cdf((y + half_bin - ybar) / sigma) -
                            detail::normal_cdf((y - half_bin - ybar) / sigma);
        a(m) = mass;
        total += mass;
    }
    if (!(total > 0.0))
        throw numerical_error("lens_power_distribution: focus window carries no mass");
    a *= static_cast<double>(geom.elements) / total;
    return PowerDistribution(std::move(a), peak, lens.half_width);
}

struct FocusShapeReport {
    bool not_uniform = true;  // a != 1-vector
    bool monotone = true;     // nonincreasing away from the peak
    bool support_ok = true;   // zero outside the focus window
    std::string detail;

    bool ok() const { return not_uniform && monotone && support_ok; }
};

/// Checks the shape conditions a focusing profile must satisfy: not the
/// uniform all-ones vector, power nonincreasing with index distance from the
/// peak, and no mass outside [peak - half_width, peak + half_width].
/// Elements at equal index distance on opposite sides are not compared; the
/// peak lands between elements in general, so exact symmetry never holds.
inline FocusShapeReport focus_shape_check(const PowerDistribution& dist) {
    FocusShapeReport report;
    const int m = dist.size();
    const double scale = dist.a.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * (1.0 + scale);
    std::ostringstream detail;

    if ((dist.a.array() - 1.0).abs().maxCoeff() <= 1e-9) {
        report.not_uniform = false;
        detail << "uniform all-ones vector; ";
    }
    for (int i = 0; i < m && report.support_ok; ++i) {
        if (std::abs(i - dist.peak_index) > dist.half_width && std::abs(dist.a(i)) > 1e-12) {
            report.support_ok = false;
            detail << "nonzero power at element " << i << " outside the focus window; ";
        }
    }
    for (int i = 0; i < m && report.monotone; ++i) {
        for (int j = 0; j < m; ++j) {
            if (std::abs(i - dist.peak_index) < std::abs(j - dist.peak_index) &&
                dist.a(i) < dist.a(j) - tol) {
                report.monotone = false;
                detail << "power increases away from the peak (" << i << " vs " << j << "); ";
                break;
            }
        }
    }
    report.detail = detail.str();
    return report;
}

}  // namespace emlens
