// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "emlens/common.hpp"

namespace emlens {

/// Deterministic random stream. Substreams are derived from a (master seed,
/// index) pair so that per-trial draws do not depend on thread scheduling.
///
/// Gaussian variates come from an explicit Box-Muller transform instead of
/// std::normal_distribution, whose draw sequence is implementation-defined;
/// output files are expected to be byte-identical for a fixed seed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(mix(mix(seed))) {}

    static RngStream substream(std::uint64_t master, std::uint64_t index) {
        return RngStream(mix(master + 0x9e3779b97f4a7c15ull * (index + 1)));
    }

    /// Uniform double in (0, 1].
    double uniform() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal N(0, 1).
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        return r * std::cos(2.0 * kPi * uniform());
    }

    /// Circularly symmetric complex normal CN(0, 1): unit total variance,
    /// independent real/imaginary parts of variance 1/2.
    cplx cnormal() {
        const double r = std::sqrt(-std::log(uniform()));
        const double phase = 2.0 * kPi * uniform();
        return {r * std::cos(phase), r * std::sin(phase)};
    }

    CVec cnormal_vec(Eigen::Index n) {
        CVec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
        return v;
    }

    std::uint64_t raw() { return gen_(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
};

}  // namespace emlens
