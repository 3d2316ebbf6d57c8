#include "ebench/simd/kernels.hpp"

namespace ebench::simd {
namespace {

ComplexSum dotc_scalar(const double* x, const double* y, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

ComplexSum dotu_scalar(const double* x, const double* y, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    re += xr * yr - xi * yi;
    im += xr * yi + xi * yr;
  }
  return {re, im};
}

double weighted_norm2_scalar(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += w[i] * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  }
  return acc;
}

double weighted_norm2_product_scalar(const double* w, const double* x, const double* y,
                                     std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
    const double ay = y[2 * i] * y[2 * i] + y[2 * i + 1] * y[2 * i + 1];
    acc += w[i] * ax * ay;
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", dotc_scalar, dotu_scalar, weighted_norm2_scalar,
                                 weighted_norm2_product_scalar};
  return table;
}

}  // namespace ebench::simd
