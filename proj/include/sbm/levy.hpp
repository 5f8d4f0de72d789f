#pragma once

#include <memory>
#include <vector>

#include "sbm/bernstein.hpp"
#include "sbm/rng.hpp"
#include "sbm/vec.hpp"

namespace sbm {

/// Surface area s_{d−1} of the unit sphere in R^d (d = 2, 3).
double unit_sphere_area(int d);

/// A(d, α) in the α-stable jump density j(r) = A(d, α) r^{−d−α}.
double stable_jump_constant(int d, double alpha);

/// Isotropic jump kernel j(r) = ∫ (4πt)^{−d/2} e^{−r²/(4t)} m(t) dt of the
/// subordinate process, together with the compound-Poisson split at a cutoff:
/// jumps longer than the cutoff are sampled exactly from an inverse-CDF table,
/// shorter ones are replaced by a Gaussian of matched variance.
///
/// Immutable after construction; sampling needs a caller-owned generator.
class JumpKernel {
 public:
  JumpKernel(Subordinator sub, int dim, double cutoff);

  int dim() const { return dim_; }
  const Subordinator& subordinator() const { return sub_; }
  double cutoff() const { return cutoff_; }
  bool has_jumps() const { return sub_.has_jumps(); }

  /// j(r) by adaptive quadrature (relative error ≤ 1e-6). Zero without jump part.
  double jump_density(double r) const;

  /// j(r) from the memoized log-log spline; for inner loops.
  double jump_density_fast(double r) const;

  /// Λ(δ) = s_{d−1} ∫_δ^∞ j(r) r^{d−1} dr.
  double tail_mass(double delta) const;

  /// σ²_small(δ) = (1/d) ∫_{|y|≤δ} |y|² j(|y|) dy.
  double small_jump_variance(double delta) const;

  /// Λ at the cutoff: rate of the exactly simulated jumps.
  double tail_intensity() const { return tail_intensity_; }

  /// σ²_small at the cutoff.
  double small_variance_rate() const { return small_variance_; }

  /// Displacement with uniform direction and radius from j(r) r^{d−1} 1{r > cutoff}.
  Vec3 sample_jump(Rng& rng) const;

  /// Inverse CDF of the tail radius distribution at u ∈ (0, 1).
  double radius_quantile(double u) const;

  const std::vector<double>& table_radii() const { return table_radii_; }
  const std::vector<double>& table_cdf() const { return table_cdf_; }

 private:
  struct Spline;

  Subordinator sub_;
  int dim_;
  double cutoff_;
  double tail_intensity_ = 0.0;
  double small_variance_ = 0.0;
  std::shared_ptr<const Spline> spline_;
  std::vector<double> table_radii_;
  std::vector<double> table_cdf_;
};

}  // namespace sbm
