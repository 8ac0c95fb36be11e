// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace emlens {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Malformed caller input (bad dimensions, out-of-range parameters).
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A linear solve or factorization failed beyond the documented tolerances.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace emlens
