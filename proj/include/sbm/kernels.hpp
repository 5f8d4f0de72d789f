#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "sbm/estimators.hpp"
#include "sbm/geometry.hpp"
#include "sbm/levy.hpp"
#include "sbm/pathsim.hpp"

namespace sbm {

/// g_D(x, y) = |x−y|^{2−d}(1 ∧ δ(x)δ(y)/|x−y|²) for d ≥ 3 and
/// log(1 + δ(x)δ(y)/|x−y|²) for d = 2; +∞ at x = y.
double green_envelope(const Domain& D, const Vec3& x, const Vec3& y);

/// K̂(x, z) = δ_D(x)/|x − z|^d.
double martin_surrogate(const Domain& D, const Vec3& x, const Vec3& z);

/// Classical Poisson kernel of a ball, (R² − |x−c|²)/(s_{d−1} R |x−z|^d).
double ball_poisson_kernel(const Domain& ball, const Vec3& x, const Vec3& z);

/// Average of the classical Poisson kernel over one cell of a ball mesh
/// (closed-form arc harmonic measure on circles, Gauss–Legendre on sphere cells).
double ball_poisson_cell_mean(const BoundaryMesh& mesh, const Vec3& x, std::size_t cell);

/// Harmonic measure from x of the arc [a, b] of a disk boundary (b − a ≤ 2π).
double disk_arc_harmonic_measure(const Domain& disk, const Vec3& x, double a, double b);

struct BoundaryDensityResult {
  KernelGrid density;  // P̂(x, cell) = hits / (n_eff σ_cell)
  PathCounts counts;
  Estimate F;
};

BoundaryDensityResult boundary_density(const Domain& D, const JumpKernel& k, const Vec3& x, const BoundaryMesh& mesh,
                                       std::uint64_t n, const PathConfig& cfg, const RunOptions& opt);

struct EnvelopeStats {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double spread = 0.0;
  std::size_t cells_used = 0;
};

/// Statistics of P̂·|x − z|^d/δ_D(x) over cells with stderr/value ≤ 0.2.
EnvelopeStats envelope_ratio_stats(const KernelGrid& P, const Domain& D, const Vec3& x);

struct MartinReport {
  double value = 0.0;
  double stderr = 0.0;
  std::vector<double> t_levels;
  std::vector<double> ratios;
  std::vector<double> ratio_stderr;
  bool monotone = true;
};

/// M̂(x, z) from Ĝ(x, y_t)/Ĝ(x₀, y_t) at y_t = z − t ν(z), Richardson-extrapolated
/// linearly in t from the two smallest levels. Probe balls have radius `cell`.
MartinReport martin_estimate(const Domain& D, const JumpKernel& k, const Vec3& x, const Vec3& z,
                             const std::vector<double>& t_levels, double cell, std::uint64_t n,
                             const PathConfig& cfg, const RunOptions& opt, std::optional<Vec3> x0 = std::nullopt);

/// K̂_D(x, z) = Σ Ĝ(x, cell) vol(cell) j(|c − z|) with a conservative error
/// bound Σ stderr·vol·j.
Estimate poisson_K(const Domain& D, const JumpKernel& k, const KernelGrid& green, const Vec3& z_out, double eps_b);

/// Test function f(z) = profile(|z − center|) on the shell r_lo < |z − center| < r_hi
/// (r_hi may be +∞; r_lo = 0 gives a ball).
struct RadialFunction {
  Vec3 center{};
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();
  std::function<double(double)> profile;

  static RadialFunction indicator(Vec3 c, double lo, double hi);
  double operator()(const Vec3& z) const;
  /// Checks the support keeps distance > eps_b from D̄.
  void check_exterior(const Domain& D, double eps_b) const;
};

/// s ↦ ∫ f(z) j(|y − z|) dz for |y − f.center| = s, tabulated on [s_lo, s_hi].
class JumpIntensityTable {
 public:
  JumpIntensityTable(const JumpKernel& k, const RadialFunction& f, double s_lo, double s_hi, double r_trunc,
                     int points = 257);
  double operator()(double s) const;
  double exact(double s) const;

 private:
  const JumpKernel* k_;
  RadialFunction f_;
  double s_lo_, s_hi_, r_trunc_;
  std::vector<double> values_;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

struct LevySystemResult {
  Estimate mc;
  Estimate quad;
  double sigma_distance = 0.0;
  double truncation_radius = 0.0;
  PathCounts mc_counts;
  PathCounts quad_counts;
};

/// E_x[f(X_τ); jump exit] by direct simulation against E_x ∫_0^τ ∫ f(z) j(|X_t − z|) dz dt
/// on an independent stream (the K_D = ∫ G_D J identity after Fubini).
LevySystemResult levy_system_check(const Domain& D, const JumpKernel& k, const Vec3& x, const RadialFunction& f,
                                   std::uint64_t n, const PathConfig& cfg, const RunOptions& opt);

struct HarnackResult {
  double max_ratio = 1.0;
  double max_ratio_stderr = 0.0;
  std::vector<Vec3> points;
  std::vector<Estimate> values;
};

/// u(y) = E_y[g(X_τ_B)] for B = B(x0, r) ⊂ D at pair_count random pairs in
/// B(x0, r/2); reports the largest pairwise ratio.
HarnackResult harnack_check(const Domain& D, const JumpKernel& k, const Vec3& x0, double r,
                            const std::function<double(const Vec3&)>& g, int pair_count, std::uint64_t n,
                            const PathConfig& cfg, const RunOptions& opt);

}  // namespace sbm
