#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sbm/error.hpp"
#include "sbm/fatou.hpp"

using namespace sbm;

namespace {

constexpr double kPi = std::numbers::pi;

PathConfig base_config(double t_max = 20.0) {
  PathConfig c;
  c.t_max = t_max;
  return c;
}

RunOptions seeded(std::uint64_t seed) {
  RunOptions o;
  o.seed = seed;
  return o;
}

const JumpKernel& brownian2() {
  static const JumpKernel k(Subordinator::brownian_only(), 2, 0.02);
  return k;
}

const JumpKernel& stable1() {
  static const JumpKernel k(Subordinator::stable_mixture(1.0), 2, 0.02);
  return k;
}

std::shared_ptr<const BoundaryMesh> disk_mesh(int cells) {
  return std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(Domain::unit_ball(2), cells));
}

TraceSpec cone_at(const Vec3& z, int depth = 8) {
  return {ConeSpec::make(Domain::unit_ball(2), z, 2.0), depth, ConeMode::zigzag, 0.05};
}

}  // namespace

TEST(BoundaryData, ConstructionAndValidation) {
  const auto mesh = disk_mesh(16);
  const BoundaryData g = BoundaryData::from_function(mesh, [](const Vec3& w) { return w.x; });
  EXPECT_EQ(g.size(), 16u);
  EXPECT_DOUBLE_EQ(g(polar(1.0, 0.01)), (*mesh)[0].center.x);
  BoundaryData bad = g;
  bad.values.pop_back();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = g;
  bad.values[3] = NAN;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ConvergenceReport, FinishAndSerialization) {
  ConvergenceReport r;
  r.target = {1, 0, 0};
  r.path = "cone beta=2 radial";
  r.values = {0.2, 0.9, 0.5, 0.97, 0.99, 1.0};
  r.stderrs = {0.01, 0.01, 0.01, 0.01, 0.01, 0.01};
  r.depths = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  r.points.assign(6, Vec3{0.5, 0, 0});
  r.expected = 1.0;
  r.tolerance = 0.05;
  r.finish();
  EXPECT_DOUBLE_EQ(r.limit, 1.0);
  EXPECT_NEAR(r.oscillation, 0.03, 1e-15);
  EXPECT_EQ(r.verdict, Verdict::pass);

  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"schema_version", "target", "points", "values", "stderr", "verdict"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["values"].size(), 6u);

  std::ostringstream os;
  r.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "depth_index,delta,value,stderr");

  r.limit = 0;
  r.stderrs.back() = 0.2;  // noise above the tolerance: never a pass or a fail
  r.finish();
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
  r.stderrs.back() = 0.01;
  r.values.back() = 0.8;
  r.finish();
  EXPECT_EQ(r.verdict, Verdict::fail);
}

TEST(FatouTrace, ConstantDataRatioIsExact) {
  const auto mesh = disk_mesh(32);
  const Domain D = Domain::unit_ball(2);
  const Vec3 z = (*mesh)[4].center;
  const std::vector<BoundaryData> gs{BoundaryData::constant(mesh, 1.0), BoundaryData::constant(mesh, 0.37)};
  const auto tr = fatou_traces(D, stable1(), gs, cone_at(z, 5), 4000, base_config(), seeded(1));
  for (std::size_t i = 0; i < tr.F.values.size(); ++i) {
    EXPECT_NEAR(tr.relative[1].values[i], 0.37, 1e-14);
    EXPECT_NEAR(tr.relative[0].values[i], 1.0, 1e-14);
    EXPECT_NEAR(tr.plain[0].values[i], tr.F.values[i], 1e-14);
    EXPECT_NEAR(tr.relative[1].stderrs[i], 0.0, 1e-12);
  }
  // g ≡ 1 traces F̂ upward toward 1
  EXPECT_GT(tr.F.values.back(), tr.F.values.front());
}

TEST(FatouTrace, HemisphereAndAffineData) {
  const auto mesh = disk_mesh(64);
  const Domain D = Domain::unit_ball(2);
  const Vec3 z = (*mesh)[21].center;
  const Vec3 tau{-z.y, z.x, 0};
  const BoundaryData hemi = BoundaryData::from_function(mesh, [&](const Vec3& w) { return dot(w, z) > 0 ? 1.0 : 0.0; });
  const BoundaryData affine = BoundaryData::from_function(mesh, [&](const Vec3& w) { return 0.3 + 0.2 * dot(w - z, tau); });
  const std::vector<BoundaryData> gs{hemi, affine};
  const auto tr = fatou_traces(D, stable1(), gs, cone_at(z), 20000, base_config(), seeded(2));
  EXPECT_DOUBLE_EQ(tr.plain[1].expected, 0.3);
  for (const auto& r : tr.plain) EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json();
  for (const auto& r : tr.relative) EXPECT_EQ(r.verdict, Verdict::pass) << r.to_json();
  for (std::size_t i = 0; i < tr.plain[0].points.size(); ++i) {
    EXPECT_TRUE(stolz_contains(D, cone_at(z).cone, tr.plain[0].points[i]));
  }
}

TEST(FatouTrace, BrownianAndJumpRatiosAgreeAtDepth) {
  const auto mesh = disk_mesh(64);
  const Domain D = Domain::unit_ball(2);
  const Vec3 z = (*mesh)[40].center;
  const Vec3 tau{-z.y, z.x, 0};
  const BoundaryData affine = BoundaryData::from_function(mesh, [&](const Vec3& w) { return 0.3 + 0.2 * dot(w - z, tau); });
  const auto a = relative_fatou_trace(D, brownian2(), affine, cone_at(z), 20000, base_config(), seeded(3));
  const auto b = relative_fatou_trace(D, stable1(), affine, cone_at(z), 20000, base_config(), seeded(4));
  EXPECT_LT(std::abs(a.limit - b.limit), 3.0 * std::hypot(a.limit_stderr, b.limit_stderr) + 1e-12);
}

TEST(MaximalInequality, IdenticalAndScaledMeasures) {
  const auto mesh = disk_mesh(16);
  const Domain D = Domain::unit_ball(2);
  const BoundaryData nu = BoundaryData::from_function(mesh, [](const Vec3& w) { return 1.0 + 0.5 * w.x; });
  BoundaryData mu2 = nu;
  for (double& v : mu2.values) v *= 2.0;
  const Vec3 z = (*mesh)[2].center;
  const Vec3 x = z * 0.8;
  const auto same = maximal_inequality_check(nu, nu, D, x, z, 2.0);
  EXPECT_EQ(same.mid, 1.0);
  EXPECT_TRUE(same.pass);
  EXPECT_LE(same.lhs, 1.0);
  EXPECT_GE(same.rhs, 1.0);
  const auto twice = maximal_inequality_check(mu2, nu, D, x, z, 2.0);
  EXPECT_EQ(twice.mid, 2.0);
  EXPECT_EQ(twice.sup_ratio, 2.0);
  EXPECT_EQ(twice.inf_ratio, 2.0);
  EXPECT_DOUBLE_EQ(twice.C, maximal_constant(2.0, 2));
  EXPECT_DOUBLE_EQ(maximal_constant(2.0, 2), 64.0);
  EXPECT_DOUBLE_EQ(maximal_constant(4.0, 2), 144.0);
  EXPECT_DOUBLE_EQ(maximal_constant(1.0, 3), 512.0);

  // x outside the cone |x − z| ≤ tδ
  EXPECT_THROW(maximal_inequality_check(nu, nu, D, polar(0.9, 2.5), z, 2.0), DomainError);
  EXPECT_THROW(maximal_inequality_check(nu, nu, D, x, z * 0.5, 2.0), DomainError);
}

TEST(MaximalInequality, MidMatchesDirectSumAndBruteForceRadii) {
  const auto mesh = disk_mesh(24);
  const Domain D = Domain::unit_ball(2);
  Rng rng = make_rng(17, 0, 0);
  BoundaryData mu = BoundaryData::constant(mesh, 0.0), nu = mu;
  for (int trial = 0; trial < 50; ++trial) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      mu.values[i] = uniform01(rng) < 0.3 ? uniform01(rng) : 0.0;
      nu.values[i] = 0.05 + uniform01(rng);
    }
    const Vec3 z = polar(1.0, 2 * kPi * uniform01(rng));
    const Vec3 x = z * (1.0 - 0.3 * uniform01(rng) - 0.01);
    const auto r = maximal_inequality_check(mu, nu, D, x, z, 1.0);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double k = D.dist_to_complement(x) / norm2(x - (*mesh)[i].center);
      a += k * mu.values[i];
      b += k * nu.values[i];
    }
    EXPECT_NEAR(r.mid, a / b, 1e-12 * a / b);
    double sup = 0, inf = 1e300;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      // open ball just beyond cell j
      const double rad = distance((*mesh)[j].center, z) * (1 + 1e-9);
      double m = 0, n = 0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (distance((*mesh)[i].center, z) < rad) {
          m += mu.values[i];
          n += nu.values[i];
        }
      }
      if (n > 0) {
        sup = std::max(sup, m / n);
        inf = std::min(inf, m / n);
      }
    }
    EXPECT_NEAR(r.sup_ratio, sup, 1e-12);
    EXPECT_NEAR(r.inf_ratio, inf, 1e-12);
    EXPECT_TRUE(r.pass);
  }
}

TEST(MaximalInequality, RandomInstancesAllPass) {
  const auto mesh = disk_mesh(32);
  const Domain D = Domain::unit_ball(2);
  Rng rng = make_rng(23, 0, 0);
  BoundaryData mu = BoundaryData::constant(mesh, 0.0), nu = mu;
  int failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int atoms = 1 + int(uniform01(rng) * 6);
    std::fill(mu.values.begin(), mu.values.end(), 0.0);
    for (int a = 0; a < atoms; ++a) mu.values[std::size_t(uniform01(rng) * 32)] += uniform01(rng);
    for (double& v : nu.values) v = 0.01 + uniform01(rng);
    const double t = 1.0 + 4.0 * uniform01(rng);
    const Vec3 z = (*mesh)[std::size_t(uniform01(rng) * 32)].center;
    // x in the cone: δ below 0.5, offset along the tangent within the aperture
    const double delta = 0.01 + 0.49 * uniform01(rng);
    const double off = delta * std::sqrt(t * t - 1.0) * (2 * uniform01(rng) - 1) * 0.99;
    const Vec3 tau{-z.y, z.x, 0};
    Vec3 x = z * (1.0 - delta) + tau * off;
    if (!(distance(x, z) <= t * D.dist_to_complement(x))) continue;
    if (!maximal_inequality_check(mu, nu, D, x, z, t).pass) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(MaximalInequality, ExhaustiveSmallInstances) {
  const BoundaryMesh m8 = BoundaryMesh::uniform(Domain::unit_ball(2), 8);
  const Domain D = Domain::unit_ball(2);
  const std::vector<Vec3> zs{m8[0].center, polar(1.0, 0.3)};
  const std::vector<double> w{1, 2, 3};
  const double t = 2.0;
  const auto pairs = cone_grid_pairs(D, zs, t, 0.25);
  ASSERT_GE(pairs.size(), 6u);
  for (const auto& [x, z] : pairs) EXPECT_LE(distance(x, z), t * D.dist_to_complement(x));
  const MaximalSweep s = maximal_exhaustive(m8, pairs, t, 3, w);
  EXPECT_EQ(s.failures, 0u);
  EXPECT_EQ(s.instances, pairs.size() * 1788u * 1788u);  // Σ_{k≤3} C(8,k)3^k = 1788 measures
  // the sharper constant (2t + 1)^d also holds
  EXPECT_LE(s.worst_upper * maximal_constant(t, 2) / std::pow(2 * t + 1, 2), 1.0 + 1e-12);
  EXPECT_LE(s.worst_lower * maximal_constant(t, 2) / std::pow(2 * t + 1, 2), 1.0 + 1e-12);
}

TEST(GBoundedness, DiskValuesMatchClosedForm) {
  const auto mesh = BoundaryMesh::uniform(Domain::unit_ball(2), 1 << 18);
  std::vector<Vec3> xs{{0, 0, 0}};
  for (double delta : {0.5, 0.1, 1e-2, 1e-3, 1e-4}) xs.push_back(polar(1.0 - delta, 0.7));
  const auto r = G_boundedness_check(mesh, xs);
  EXPECT_NEAR(r.values[0], 2 * kPi, 1e-12);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    // ∫ δ/|x − w|² dσ = 2π/(1 + |x|) on the unit circle
    EXPECT_NEAR(r.values[i], 2 * kPi / (1 + norm(xs[i])), 2e-3 * r.values[i]) << i;
  }
  EXPECT_LE(r.max_value / r.min_value, 50.0);
  EXPECT_THROW(G_boundedness_check(BoundaryMesh::uniform(Domain::unit_ball(2), 64), xs), ConfigError);
}

TEST(GBoundedness, SphereValuesMatchClosedForm) {
  const auto mesh = BoundaryMesh::uniform(Domain::unit_ball(3), 16384);
  const std::vector<Vec3> xs{{0, 0, 0}};
  EXPECT_NEAR(G_boundedness_check(mesh, xs).values[0], 4 * kPi, 1e-10);
  // polar cells of the band mesh are long slivers, so off-center points need finer meshes
  const std::vector<Vec3> off{{0.2, 0.1, -0.3}};
  EXPECT_THROW(G_boundedness_check(mesh, off), ConfigError);
}

TEST(ExitLocality, BrownianDecayIsLinear) {
  const Domain D = Domain::unit_ball(2);
  const Vec3 z{1, 0, 0};
  const auto xs = radial_points(D, z, 0.1, 4);
  EXPECT_NEAR(D.dist_to_complement(xs[3]), 0.0125, 1e-15);
  const auto rep = exit_locality_check(D, brownian2(), z, 0.5, xs, 40000, base_config(), seeded(5));
  EXPECT_TRUE(rep.decreasing);
  EXPECT_GE(rep.slope, 0.8);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  for (const auto& q : rep.q) EXPECT_LE(q.value, 1.0);
  EXPECT_THROW(exit_locality_check(D, brownian2(), z, 1.5, xs, 1000, base_config(), seeded(5)), DomainError);
}

TEST(ExitLocality, StableDecays) {
  const Domain D = Domain::unit_ball(2);
  const Vec3 z = polar(1.0, 2.0);
  const auto rep = exit_locality_check(D, stable1(), z, 0.5, radial_points(D, z, 0.1, 4), 40000, base_config(),
                                       seeded(6));
  EXPECT_TRUE(rep.decreasing);
  EXPECT_GE(rep.slope, 0.8);
}

TEST(Representation, ZeroDataAndAnnulus) {
  const Domain D = Domain::unit_ball(2);
  RadialFunction zero = RadialFunction::indicator({}, 1.2, 2.0);
  zero.profile = [](double) { return 0.0; };
  const std::vector<Vec3> xs{{0.3, 0, 0}};
  const auto z = representation_check(D, stable1(), zero, xs, 3000, base_config(), seeded(7));
  EXPECT_EQ(z[0].direct.value, 0.0);
  EXPECT_EQ(z[0].quad.value, 0.0);
  EXPECT_EQ(z[0].two_step.value, 0.0);
  EXPECT_TRUE(z[0].pass);

  const std::vector<Vec3> ys{{0.3, 0, 0}, {-0.2, 0.6, 0}};
  const auto r = representation_check(D, stable1(), RadialFunction::indicator({}, 1.2, 2.0), ys, 40000,
                                      base_config(), seeded(8));
  for (const auto& p : r) {
    EXPECT_GT(p.direct.value, 0.0);
    EXPECT_TRUE(p.pass) << p.direct.value << " " << p.quad.value << " " << p.two_step.value;
    EXPECT_GT(p.F, 0.5);
  }
}

TEST(Counterexample, HalfCircleMeasure) {
  const Domain disk = Domain::unit_ball(2);
  for (double delta : {0.9, 0.5, 0.1, 1e-3}) {
    for (double phi : {0.0, 0.4, 1.7, 3.0, 4.5, 6.0}) {
      EXPECT_NEAR(half_circle_measure(delta, phi), disk_arc_harmonic_measure(disk, polar(1 - delta, phi), 0.0, kPi),
                  1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(half_circle_measure(1.0, 2.0), 0.5);
}

TEST(Counterexample, CoveringIdentityMatchesMeshQuadrature) {
  const auto arcs = LittlewoodArcs::make(4, 4);
  EXPECT_NEAR(arcs.lambda(4), kPi / 64, 1e-15);
  EXPECT_EQ(arcs.frequency(4), 64);
  const auto mesh = std::make_shared<const BoundaryMesh>(
      BoundaryMesh::from_breakpoints(Domain::unit_ball(2), arcs.breakpoints()));
  const BoundaryData U = counterexample_data(arcs, mesh);
  for (double v : U.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (double delta : {0.5, 0.1, 0.01, 1e-3}) {
    for (double theta : {0.05, 1.3, 2.9, 5.5}) {
      EXPECT_NEAR(mesh_poisson(U, polar(1 - delta, theta)), arcs.poisson(delta, theta), 1e-12);
    }
  }
  // the cell-center rule converges to the same values on a fine uniform mesh
  const auto fine = std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(Domain::unit_ball(2), 1 << 16));
  const BoundaryData Uf = counterexample_data(arcs, fine);
  for (double theta : {0.05, 1.3, 2.9}) {
    EXPECT_NEAR(surrogate_ratio(Uf, polar(0.9, theta)), arcs.poisson(0.1, theta), 1e-3);
  }
  EXPECT_THROW(surrogate_ratio(Uf, polar(1 - 1e-5, 0.3)), ConfigError);
  const auto coarse = std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(Domain::unit_ball(2), 64));
  EXPECT_THROW(counterexample_data(arcs, coarse), ConfigError);
  // deep inside the boundary layer the integral is the boundary value
  for (double theta : {0.05, 1.3, 2.9, 5.5}) EXPECT_NEAR(arcs.poisson(1e-12, theta), arcs.boundary_value(theta), 1e-6);
}

TEST(Counterexample, RadialConvergesTangentialOscillates) {
  const auto arcs = LittlewoodArcs::make(6, 65536);
  std::vector<double> thetas;
  for (int i = 0; i < 32; ++i) thetas.push_back(2 * kPi * (i + 0.37) / 32);
  const CounterexampleResult r = littlewood_counterexample(arcs, thetas, {});
  EXPECT_TRUE(r.radial_ok);
  EXPECT_GE(r.tangential_fraction, 0.9);
  EXPECT_TRUE(r.dichotomy);
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.radial.size(), 32u);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(r.radial[i].values.size(), 64u);
    EXPECT_LE(r.radial[i].oscillation, 0.05);
    EXPECT_GE(r.tangential[i].oscillation, 0.3);
    for (double v : r.tangential[i].values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  const auto s = counterexample_offsets(arcs, 64);
  EXPECT_NEAR(s[32], 1.5 * arcs.lambda0(), 1e-18);
  EXPECT_NEAR(s[63], arcs.lambda0() / 1024, 1e-20);
}

TEST(Counterexample, MonteCarloModeAgreesForBrownianMotion) {
  const auto arcs = LittlewoodArcs::make(2, 2);
  CounterexampleOptions o;
  o.mode = CounterexampleMode::monte_carlo;
  o.kernel = &brownian2();
  o.n = 4000;
  o.points = 16;
  o.mc_min_delta = 0.01;
  o.cfg = base_config();
  o.opt = seeded(9);
  const std::vector<double> thetas{0.4, 2.2};
  const auto r = littlewood_counterexample(arcs, thetas, o);
  ASSERT_GE(r.radial[0].values.size(), 2u);
  EXPECT_LT(r.mc_sigma_max, 4.5);
}

TEST(LemmaNearOne, HoldsExactlyOnTheGrid) {
  EXPECT_DOUBLE_EQ(near_one_depth(0.5), 0.5 / (2 * kPi));
  EXPECT_DOUBLE_EQ(near_one_depth(0.01), 0.01 / (2 * kPi));
  const std::vector<double> lambdas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  const std::vector<double> eps{0.5, 0.25, 0.1, 0.05, 0.01};
  const auto r = lemma_near_one_check(lambdas, eps, 10);
  EXPECT_EQ(r.cases, 5u * 5u * 11u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_GT(r.worst_margin, 0.0);
  // the depth is not vacuous: fifty times deeper in λ units the bound breaks
  const Domain disk = Domain::unit_ball(2);
  const double lam = 0.03125, e = 0.01;
  EXPECT_LT(disk_arc_harmonic_measure(disk, {1 - 50 * lam * near_one_depth(e), 0, 0}, -lam, lam), 1 - e);
}
