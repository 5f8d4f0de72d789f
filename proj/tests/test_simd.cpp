#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <string>

#include "sbm/error.hpp"
#include "sbm/geometry.hpp"
#include "sbm/simd.hpp"

using namespace sbm;

TEST(Simd, VectorAndScalarSumsAgree) {
  if (!simd_level_available(SimdLevel::avx2)) GTEST_SKIP() << "no AVX2 on this machine";
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 1001u, 65536u}) {
    std::vector<double> px(n), py(n), pz(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = u(g);
      py[i] = u(g);
      pz[i] = u(g);
      w[i] = 1.0 + u(g);
    }
    for (int p : {2, 3}) {
      const Vec3 x{2.0, 0.1, -0.3};
      const double a = inverse_power_sum(x, px, py, pz, w, p, SimdLevel::scalar);
      const double b = inverse_power_sum(x, px, py, pz, w, p, SimdLevel::avx2);
      EXPECT_NEAR(a, b, 1e-12 * std::abs(a)) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Simd, MeshSumsMatchDirectEvaluation) {
  const BoundaryMesh m = BoundaryMesh::uniform(Domain::unit_ball(3), 4096);
  const Vec3 x{0.2, 0.1, 0.5};
  double direct = 0.0;
  for (const auto& c : m.cells()) direct += c.measure / std::pow(distance(x, c.center), 3);
  const double fast = inverse_power_sum(x, m.xs(), m.ys(), m.zs(), m.measures(), 3);
  EXPECT_NEAR(fast, direct, 1e-12 * direct);
}

TEST(Simd, RejectsBadArguments) {
  std::vector<double> a(4, 1.0), b(3, 1.0);
  EXPECT_THROW(inverse_power_sum({}, a, a, a, b, 2), ConfigError);
  EXPECT_THROW(inverse_power_sum({}, a, a, a, a, 4), DomainError);
}

TEST(Simd, EnvironmentOverrideSelectsScalar) {
  const char* env = std::getenv("SBM_SIMD");
  if (!env || std::string(env) != "scalar") GTEST_SKIP() << "run with SBM_SIMD=scalar";
  EXPECT_EQ(active_simd_level(), SimdLevel::scalar);
  std::vector<double> p{1.0, 2.0}, z{0.0, 0.0}, w{1.0, 1.0};
  EXPECT_DOUBLE_EQ(inverse_power_sum({}, p, z, z, w, 2), 1.25);
}
