#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sbm/error.hpp"
#include "sbm/geometry.hpp"

using namespace sbm;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Domain> shipped_domains() {
  return {Domain::unit_ball(2), Domain::unit_ball(3), Domain::annulus(2, 0.5), Domain::annulus(3, 0.3),
          Domain::perturbed_disk(0.025, 2), Domain::ball(2, {0.3, -0.2, 0.0}, 0.7)};
}

Vec3 random_point(std::mt19937_64& g, int d, double box) {
  std::uniform_real_distribution<double> u(-box, box);
  Vec3 p{u(g), u(g), 0.0};
  if (d == 3) p.z = u(g);
  return p;
}

}  // namespace

TEST(Domain, DistanceExamples) {
  EXPECT_DOUBLE_EQ(Domain::unit_ball(2).dist_to_complement({}), 1.0);
  EXPECT_NEAR(Domain::annulus(2, 0.5).dist_to_complement(polar(0.8, 1.1)), 0.2, 1e-15);
  EXPECT_EQ(Domain::unit_ball(3).dist_to_complement({1.3, 0.0, 0.0}), 0.0);
  EXPECT_EQ(Domain::annulus(3, 0.5).dist_to_complement({0.1, 0.0, 0.0}), 0.0);
}

TEST(Domain, ReachValues) {
  EXPECT_DOUBLE_EQ(Domain::unit_ball(2).r0(), 1.0);
  EXPECT_DOUBLE_EQ(Domain::annulus(2, 0.2).r0(), 0.2);
  EXPECT_DOUBLE_EQ(Domain::annulus(2, 0.5).r0(), 0.25);
  const Domain p = Domain::perturbed_disk(0.025, 2);
  EXPECT_GT(p.r0(), 0.5);
  EXPECT_LT(p.r0(), 1.0);
  EXPECT_THROW(Domain::perturbed_disk(0.05, 2), ConfigError);
  EXPECT_THROW(Domain::annulus(2, 1.2), ConfigError);
  EXPECT_THROW(Domain::unit_ball(4), ConfigError);
}

TEST(Domain, PerturbedDistanceMatchesDenseScan) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi), offset(-0.1, 0.1);
  const int dense = 1 << 20;
  for (const Domain& D : {Domain::perturbed_disk(0.025, 2), Domain::perturbed_disk(0.004, 5)}) {
    for (int trial = 0; trial < 24; ++trial) {
      Vec3 x = random_point(g, 2, 1.3);
      if (trial % 2) {
        // near the boundary, inside and outside
        const double t = angle(g);
        const double o = offset(g);
        x = polar(D.profile(t) + (o < 0 ? o - 0.01 : o + 0.01), t);
      }
      double best = 1e300;
      for (int i = 0; i < dense; ++i) {
        const double t = 2.0 * kPi * i / dense;
        best = std::min(best, distance(x, polar(D.profile(t), t)));
      }
      EXPECT_NEAR(std::abs(D.signed_distance(x)), best, 1e-9) << x.x << "," << x.y;
    }
  }
}

TEST(Domain, OneLipschitzOnRandomPairs) {
  std::mt19937_64 g(11);
  for (const Domain& D : shipped_domains()) {
    const int pairs = D.kind() == DomainKind::perturbed_disk ? 2000 : 10000;
    for (int i = 0; i < pairs; ++i) {
      const Vec3 a = random_point(g, D.dim(), 1.2);
      const Vec3 b = random_point(g, D.dim(), 1.2);
      EXPECT_LE(std::abs(D.dist_to_complement(a) - D.dist_to_complement(b)), distance(a, b) + 1e-12)
          << D.describe();
      EXPECT_EQ(D.dist_to_complement(a) > 0.0, D.contains(a));
    }
  }
}

TEST(Domain, ProjectionRealizesDistance) {
  std::mt19937_64 g(3);
  for (const Domain& D : shipped_domains()) {
    const double tol = D.kind() == DomainKind::perturbed_disk ? 1e-9 : 1e-12;
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x = random_point(g, D.dim(), 1.2);
      const Vec3 p = D.project_to_boundary(x);
      EXPECT_NEAR(distance(x, p), std::abs(D.signed_distance(x)), tol) << D.describe();
      EXPECT_NEAR(D.signed_distance(p), 0.0, tol);
    }
  }
}

TEST(Domain, TangentBallsOfRadiusR0) {
  for (const Domain& D : shipped_domains()) {
    const BoundaryMesh mesh = BoundaryMesh::uniform(D, 256);
    for (const auto& cell : mesh.cells()) {
      const Vec3 z = D.project_to_boundary(cell.center);
      const Vec3 nu = D.outer_normal(z);
      const double r = D.r0();
      EXPECT_GE(D.signed_distance(z - nu * r), r - 1e-9) << D.describe();
      EXPECT_LE(D.signed_distance(z + nu * r), -r + 1e-9) << D.describe();
    }
  }
}

TEST(Domain, SurfaceMeasureAndAhlforsOnCircle) {
  const Domain D = Domain::unit_ball(2);
  EXPECT_NEAR(D.surface_measure(), 2 * kPi, 1e-14);
  EXPECT_NEAR(Domain::perturbed_disk(0.0, 0).surface_measure(), 2 * kPi, 1e-12);
  for (double r = 0.01; r <= 1.0; r += 0.01) {
    const double arc = D.boundary_ball_measure({1.0, 0.0, 0.0}, r);
    EXPECT_NEAR(arc, 4.0 * std::asin(r / 2.0), 1e-12);
    EXPECT_GE(arc, 2.0 * r);
    EXPECT_LE(arc, kPi * r);
  }
  EXPECT_NEAR(Domain::unit_ball(3).boundary_ball_measure({0, 0, 1}, 0.4), kPi * 0.16, 1e-14);
}

TEST(Domain, AhlforsRegularityAtEveryCellCenter) {
  for (const Domain& D : shipped_domains()) {
    const AhlforsConstants a = D.ahlfors();
    EXPECT_DOUBLE_EQ(a.radius, D.r0());
    const BoundaryMesh mesh = BoundaryMesh::uniform(D, D.kind() == DomainKind::perturbed_disk ? 64 : 512);
    for (const auto& cell : mesh.cells()) {
      for (double r : {a.radius, a.radius / 2, a.radius / 4, a.radius / 8}) {
        const double m = D.boundary_ball_measure(cell.center, r);
        const double scale = std::pow(r, D.dim() - 1);
        EXPECT_GE(m, a.c_lower * scale * (1 - 1e-12)) << D.describe() << " r=" << r;
        EXPECT_LE(m, a.c_upper * scale * (1 + 1e-12)) << D.describe() << " r=" << r;
      }
    }
  }
}

TEST(Domain, PerturbedBallMeasureMatchesRiemannSum) {
  const Domain D = Domain::perturbed_disk(0.025, 2);
  const Vec3 z = polar(D.profile(0.7), 0.7);
  const double r = 0.3;
  const int n = 1 << 20;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t0 = 2 * kPi * i / n, t1 = 2 * kPi * (i + 1) / n;
    const Vec3 a = polar(D.profile(t0), t0), b = polar(D.profile(t1), t1);
    if (distance((a + b) * 0.5, z) < r) sum += distance(a, b);
  }
  // The sum resolves each endpoint only to one chord (≈ 2π/n).
  EXPECT_NEAR(D.boundary_ball_measure(z, r), sum, 2.2 * 2 * kPi / n);
}

TEST(Stolz, Examples) {
  const Domain D = Domain::unit_ball(2);
  const ConeSpec c = ConeSpec::make(D, {1.0, 0.0, 0.0}, 2.0);
  EXPECT_TRUE(stolz_contains(D, c, {0.9, 0.0, 0.0}));
  const Vec3 x{0.9, 0.25, 0.0};
  const double lhs = std::sqrt(0.1 * 0.1 + 0.25 * 0.25);
  const double rhs = 2.0 * (1.0 - std::sqrt(0.81 + 0.0625));
  ASSERT_GT(lhs, rhs);
  EXPECT_FALSE(stolz_contains(D, c, x));
  const ConeSpec wide = ConeSpec::make(D, {1.0, 0.0, 0.0}, 100.0);
  EXPECT_FALSE(stolz_contains(D, wide, {0.0, 0.0, 0.0}));
  const Domain A = Domain::annulus(2, 0.5);
  EXPECT_FALSE(stolz_contains(A, ConeSpec::make(A, {1, 0, 0}, 8.0), {0.75, 0.0, 0.0}));
}

TEST(Stolz, ApertureValidation) {
  EXPECT_THROW(ConeSpec::make(Domain::unit_ball(2), {1, 0, 0}, 1.0), DomainError);
  const Domain A = Domain::annulus(2, 0.5);  // R0 = 1/4, κ = 1/8, threshold 7
  EXPECT_THROW(ConeSpec::make(A, {1, 0, 0}, 6.9), DomainError);
  EXPECT_NO_THROW(ConeSpec::make(A, {1, 0, 0}, 7.1));
  EXPECT_THROW(ConeSpec::make(Domain::unit_ball(2), {0.9, 0, 0}, 2.0), DomainError);
}

TEST(ConeSequence, RadialPointsAreExact) {
  const Domain D = Domain::unit_ball(2);
  const Vec3 z{1.0, 0.0, 0.0};
  const ConeSpec c = ConeSpec::make(D, z, 2.0);
  const auto pts = cone_sequence(D, c, 20, ConeMode::radial);
  for (int k = 1; k <= 20; ++k) {
    EXPECT_NEAR(pts[k - 1].x, 1.0 - std::ldexp(1.0, -k), 1e-15);
    EXPECT_EQ(pts[k - 1].y, 0.0);
  }
}

TEST(ConeSequence, PointsStayInConeAndConverge) {
  for (const Domain& D : shipped_domains()) {
    const BoundaryMesh mesh = BoundaryMesh::uniform(D, 16);
    for (ConeMode mode : {ConeMode::radial, ConeMode::zigzag}) {
      for (const auto& cell : mesh.cells()) {
        const Vec3 z = D.project_to_boundary(cell.center);
        const double beta = std::max(2.0, 1.5 * (1 - D.r0() / 2) / (D.r0() / 2));
        const ConeSpec c = ConeSpec::make(D, z, beta);
        const auto pts = cone_sequence(D, c, 16, mode);
        double prev = 1e300;
        for (std::size_t k = 0; k < pts.size(); ++k) {
          EXPECT_TRUE(stolz_contains(D, c, pts[k])) << D.describe();
          const double r = distance(pts[k], z);
          EXPECT_LT(r, prev);
          prev = r;
        }
        if (mode == ConeMode::zigzag) {
          const Vec3 nu = D.outer_normal(z);
          const Vec3 d0 = pts[0] - z, d1 = pts[1] - z;
          const Vec3 off0 = d0 - nu * dot(d0, nu);
          const Vec3 off1 = d1 - nu * dot(d1, nu);
          EXPECT_LT(dot(off0, off1), 0.0) << "zigzag must alternate sides";
        }
      }
    }
  }
}

TEST(Tangential, LeavesEveryCone) {
  const Domain D = Domain::unit_ball(2);
  const double theta = 0.4;
  const Vec3 w = polar(1.0, theta);
  const std::vector<double> depth{1e-4};
  const Vec3 x = tangential_curve(D, theta, 0.5, depth).front();
  EXPECT_NEAR(D.dist_to_complement(x), 1e-4, 1e-15);
  EXPECT_GE(distance(x, w) / D.dist_to_complement(x), 99.0);
  const ConeSpec c = ConeSpec::make(D, w, 10.0);
  const auto pts = tangential_curve(D, theta, 0.5, 40);
  for (const auto& p : pts) {
    if (D.dist_to_complement(p) < 1e-4) EXPECT_FALSE(stolz_contains(D, c, p));
  }
  EXPECT_LT(distance(pts.back(), w), 1e-5);
  EXPECT_THROW(tangential_curve(D, theta, 1.0, 4), DomainError);
  EXPECT_THROW(tangential_curve(Domain::unit_ball(3), theta, 0.5, 4), DomainError);
}

TEST(BoundaryMesh, CircleCellsAndTotals) {
  const BoundaryMesh m = BoundaryMesh::uniform(Domain::unit_ball(2), 8);
  ASSERT_EQ(m.size(), 8u);
  for (const auto& c : m.cells()) EXPECT_NEAR(c.measure, kPi / 4, 1e-15);
  EXPECT_NEAR(BoundaryMesh::uniform(Domain::unit_ball(3), 200).total_measure(), 4 * kPi, 1e-10);
  EXPECT_NEAR(BoundaryMesh::uniform(Domain::annulus(2, 0.5), 90).total_measure(), 3 * kPi, 1e-10);
  EXPECT_NEAR(BoundaryMesh::uniform(Domain::annulus(3, 0.5), 90).total_measure(), 5 * kPi, 1e-10);
  const Domain P = Domain::perturbed_disk(0.025, 2);
  EXPECT_NEAR(BoundaryMesh::uniform(P, 100).total_measure(), P.surface_measure(), 1e-10);
  EXPECT_THROW(BoundaryMesh::uniform(Domain::unit_ball(2), 7), ConfigError);
}

TEST(BoundaryMesh, SphereCellsHaveEqualArea) {
  const BoundaryMesh m = BoundaryMesh::uniform(Domain::unit_ball(3), 512);
  for (const auto& c : m.cells()) {
    EXPECT_NEAR(c.measure, 4 * kPi / 512, 1e-15);
    EXPECT_NEAR(norm(c.center), 1.0, 1e-14);
  }
  EXPECT_LT(m.max_cell_diameter(), 0.55);
}

TEST(BoundaryMesh, LocateFindsOwningCell) {
  std::mt19937_64 g(5);
  for (const Domain& D : shipped_domains()) {
    const BoundaryMesh m = BoundaryMesh::uniform(D, 300);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m.locate(m[i].center), i) << D.describe();
    for (int t = 0; t < 500; ++t) {
      const Vec3 w = D.project_to_boundary(random_point(g, D.dim(), 1.0));
      const std::size_t i = m.locate(w);
      EXPECT_LE(distance(w, m[i].center), m.max_cell_diameter() + 1e-12) << D.describe();
    }
  }
}

TEST(BoundaryMesh, BreakpointArcs) {
  const Domain D = Domain::unit_ball(2);
  const BoundaryMesh m = BoundaryMesh::from_breakpoints(D, {-0.5, 0.1, 0.2, 3.0});
  ASSERT_EQ(m.size(), 4u);
  EXPECT_NEAR(m.total_measure(), 2 * kPi, 1e-14);
  EXPECT_NEAR(m[3].measure, 2 * kPi - 3.5, 1e-14);
  EXPECT_EQ(m.locate(polar(1.0, 0.15)), 1u);
  EXPECT_EQ(m.locate(polar(1.0, -1.0)), 3u);
  EXPECT_EQ(m.arc(2), std::make_pair(0.2, 3.0));
}
