#include "sbm/simd.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "sbm/error.hpp"

namespace sbm {

std::string to_string(SimdLevel level) { return level == SimdLevel::avx2 ? "avx2" : "scalar"; }

bool simd_level_available(SimdLevel level) {
  if (level == SimdLevel::scalar) return true;
#if defined(SBM_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

SimdLevel active_simd_level() {
  static const SimdLevel level = [] {
    const char* env = std::getenv("SBM_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
    return simd_level_available(SimdLevel::avx2) ? SimdLevel::avx2 : SimdLevel::scalar;
  }();
  return level;
}

namespace detail {

double inverse_power_sum_scalar(const Vec3& x, const double* px, const double* py, const double* pz, const double* w,
                                std::size_t n, int power) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x.x - px[i], dy = x.y - py[i], dz = x.z - pz[i];
    const double r2 = dx * dx + dy * dy + dz * dz;
    s += power == 2 ? w[i] / r2 : w[i] / (r2 * std::sqrt(r2));
  }
  return s;
}

}  // namespace detail

double inverse_power_sum(const Vec3& x, std::span<const double> px, std::span<const double> py,
                         std::span<const double> pz, std::span<const double> w, int power, SimdLevel level) {
  const std::size_t n = w.size();
  if (px.size() != n || py.size() != n || pz.size() != n) throw ConfigError("inverse_power_sum: size mismatch");
  if (power != 2 && power != 3) throw DomainError("inverse_power_sum: power must be 2 or 3");
#if defined(SBM_HAVE_AVX2)
  if (level == SimdLevel::avx2 && simd_level_available(level)) return detail::inverse_power_sum_avx2(x, px.data(), py.data(), pz.data(), w.data(), n, power);
#else
  (void)level;
#endif
  return detail::inverse_power_sum_scalar(x, px.data(), py.data(), pz.data(), w.data(), n, power);
}

double inverse_power_sum(const Vec3& x, std::span<const double> px, std::span<const double> py,
                         std::span<const double> pz, std::span<const double> w, int power) {
  return inverse_power_sum(x, px, py, pz, w, power, active_simd_level());
}

}  // namespace sbm
