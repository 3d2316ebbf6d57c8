#pragma once
// Reduction kernels over interleaved complex<double> arrays.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant compiled in its own translation unit. The active table is
// picked once at first use from CPUID; EBENCH_SIMD=scalar forces the reference
// path. Both tables are exposed so tests can compare them directly.

#include <complex>
#include <cstddef>
#include <span>

#include "ebench/simd/kernel_table.hpp"

namespace ebench::simd {

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Table used by the library; fixed for the lifetime of the process.
const KernelTable& active();

namespace detail {
inline const double* raw(const std::complex<double>* p) {
  return reinterpret_cast<const double*>(p);
}
}  // namespace detail

inline std::complex<double> dotc(std::span<const std::complex<double>> x,
                                 std::span<const std::complex<double>> y) {
  const auto s = active().dotc(detail::raw(x.data()), detail::raw(y.data()), x.size());
  return {s.re, s.im};
}

inline std::complex<double> dotu(std::span<const std::complex<double>> x,
                                 std::span<const std::complex<double>> y) {
  const auto s = active().dotu(detail::raw(x.data()), detail::raw(y.data()), x.size());
  return {s.re, s.im};
}

inline double weighted_norm2(std::span<const double> w,
                             std::span<const std::complex<double>> x) {
  return active().weighted_norm2(w.data(), detail::raw(x.data()), x.size());
}

inline double weighted_norm2_product(std::span<const double> w,
                                     std::span<const std::complex<double>> x,
                                     std::span<const std::complex<double>> y) {
  return active().weighted_norm2_product(w.data(), detail::raw(x.data()),
                                         detail::raw(y.data()), x.size());
}

}  // namespace ebench::simd
