#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ebench {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, schema violations, dimension mismatches.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The numerics could not produce a meaningful answer (e.g. P_s underflow).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace ebench
