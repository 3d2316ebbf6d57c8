#pragma once
// Plain function-pointer table shared by every kernel variant. Kept free of
// standard-library templates so ISA-specific translation units can include it
// without emitting inline code compiled for a wider instruction set.

#include <cstddef>

namespace ebench::simd {

struct ComplexSum {
  double re = 0.0;
  double im = 0.0;
};

// Arrays are `n` complex values stored as 2n doubles (re, im, re, im, ...).
struct KernelTable {
  const char* name;
  // sum conj(x_i) * y_i
  ComplexSum (*dotc)(const double* x, const double* y, std::size_t n);
  // sum x_i * y_i
  ComplexSum (*dotu)(const double* x, const double* y, std::size_t n);
  // sum w_i |x_i|^2
  double (*weighted_norm2)(const double* w, const double* x, std::size_t n);
  // sum w_i |x_i|^2 |y_i|^2
  double (*weighted_norm2_product)(const double* w, const double* x, const double* y,
                                   std::size_t n);
};

}  // namespace ebench::simd
