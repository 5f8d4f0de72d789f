#pragma once

#include <span>
#include <string>

#include "sbm/vec.hpp"

namespace sbm {

enum class SimdLevel { scalar, avx2 };

std::string to_string(SimdLevel level);

/// Whether the CPU (and this build) can run the given level.
bool simd_level_available(SimdLevel level);

/// Best level supported by the CPU, unless SBM_SIMD=scalar forces the reference path.
SimdLevel active_simd_level();

/// Σ_i w_i / |x − p_i|^power over points given as coordinate arrays (power 2 or 3).
/// Points coinciding with x contribute +∞.
double inverse_power_sum(const Vec3& x, std::span<const double> px, std::span<const double> py,
                         std::span<const double> pz, std::span<const double> w, int power);
double inverse_power_sum(const Vec3& x, std::span<const double> px, std::span<const double> py,
                         std::span<const double> pz, std::span<const double> w, int power, SimdLevel level);

namespace detail {
double inverse_power_sum_scalar(const Vec3& x, const double* px, const double* py, const double* pz, const double* w,
                                std::size_t n, int power);
double inverse_power_sum_avx2(const Vec3& x, const double* px, const double* py, const double* pz, const double* w,
                              std::size_t n, int power);
}  // namespace detail

}  // namespace sbm
