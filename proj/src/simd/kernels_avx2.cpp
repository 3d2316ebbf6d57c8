// Compiled with -mavx2 -mfma. Only raw doubles cross this boundary.
#include <immintrin.h>

#include "ebench/simd/kernel_table.hpp"

namespace ebench::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lanes [even, odd, even, odd] -> (even sum, odd sum).
inline void pair_sums(__m256d v, double& even, double& odd) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  even = lanes[0] + lanes[2];
  odd = lanes[1] + lanes[3];
}

// [w0, w0, w1, w1]
inline __m256d load_pair_weights(const double* w) {
  const __m256d wv = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(wv, 0b01010000);
}

// acc_same += x * y          -> lanes (xr*yr, xi*yi)
// acc_cross += x * swap(y)   -> lanes (xr*yi, xi*yr)
inline void products(const double* x, const double* y, std::size_t n, double& rr, double& ii,
                     double& ri, double& ir) {
  __m256d same0 = _mm256_setzero_pd(), same1 = _mm256_setzero_pd();
  __m256d cross0 = _mm256_setzero_pd(), cross1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(y + 2 * i);
    const __m256d x1 = _mm256_loadu_pd(x + 2 * i + 4);
    const __m256d y1 = _mm256_loadu_pd(y + 2 * i + 4);
    same0 = _mm256_fmadd_pd(x0, y0, same0);
    same1 = _mm256_fmadd_pd(x1, y1, same1);
    cross0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0b0101), cross0);
    cross1 = _mm256_fmadd_pd(x1, _mm256_permute_pd(y1, 0b0101), cross1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(y + 2 * i);
    same0 = _mm256_fmadd_pd(x0, y0, same0);
    cross0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0b0101), cross0);
  }
  pair_sums(_mm256_add_pd(same0, same1), rr, ii);
  pair_sums(_mm256_add_pd(cross0, cross1), ri, ir);
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    rr += xr * yr;
    ii += xi * yi;
    ri += xr * yi;
    ir += xi * yr;
  }
}

ComplexSum dotc_avx2(const double* x, const double* y, std::size_t n) {
  double rr = 0, ii = 0, ri = 0, ir = 0;
  products(x, y, n, rr, ii, ri, ir);
  return {rr + ii, ri - ir};
}

ComplexSum dotu_avx2(const double* x, const double* y, std::size_t n) {
  double rr = 0, ii = 0, ri = 0, ir = 0;
  products(x, y, n, rr, ii, ri, ir);
  return {rr - ii, ri + ir};
}

double weighted_norm2_avx2(const double* w, const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    const __m256d x1 = _mm256_loadu_pd(x + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(load_pair_weights(w + i), _mm256_mul_pd(x0, x0), acc0);
    acc1 = _mm256_fmadd_pd(load_pair_weights(w + i + 2), _mm256_mul_pd(x1, x1), acc1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    acc0 = _mm256_fmadd_pd(load_pair_weights(w + i), _mm256_mul_pd(x0, x0), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += w[i] * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  }
  return acc;
}

double weighted_norm2_product_avx2(const double* w, const double* x, const double* y,
                                   std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(y + 2 * i);
    // [|x0|^2, |y0|^2, |x1|^2, |y1|^2]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(x0, x0), _mm256_mul_pd(y0, y0));
    // [|x0 y0|^2, same, |x1 y1|^2, same]
    const __m256d prod = _mm256_mul_pd(h, _mm256_permute_pd(h, 0b0101));
    acc = _mm256_fmadd_pd(load_pair_weights(w + i), prod, acc);
  }
  double total = 0.5 * hsum(acc);
  for (; i < n; ++i) {
    const double ax = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
    const double ay = y[2 * i] * y[2 * i] + y[2 * i + 1] * y[2 * i + 1];
    total += w[i] * ax * ay;
  }
  return total;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{"avx2", dotc_avx2, dotu_avx2, weighted_norm2_avx2,
                                 weighted_norm2_product_avx2};
  return table;
}

}  // namespace ebench::simd
