// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "sbm/simd.hpp"

namespace sbm::detail {

double inverse_power_sum_avx2(const Vec3& x, const double* px, const double* py, const double* pz, const double* w,
                              std::size_t n, int power) {
  const __m256d cx = _mm256_set1_pd(x.x), cy = _mm256_set1_pd(x.y), cz = _mm256_set1_pd(x.z);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  const auto term = [&](std::size_t j) {
    const __m256d dx = _mm256_sub_pd(cx, _mm256_loadu_pd(px + j));
    const __m256d dy = _mm256_sub_pd(cy, _mm256_loadu_pd(py + j));
    const __m256d dz = _mm256_sub_pd(cz, _mm256_loadu_pd(pz + j));
    __m256d r2 = _mm256_mul_pd(dx, dx);
    r2 = _mm256_fmadd_pd(dy, dy, r2);
    r2 = _mm256_fmadd_pd(dz, dz, r2);
    const __m256d den = power == 2 ? r2 : _mm256_mul_pd(r2, _mm256_sqrt_pd(r2));
    return _mm256_div_pd(_mm256_loadu_pd(w + j), den);
  };
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, term(i));
    acc1 = _mm256_add_pd(acc1, term(i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, term(i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return s + inverse_power_sum_scalar(x, px + i, py + i, pz + i, w + i, n - i, power);
}

}  // namespace sbm::detail
