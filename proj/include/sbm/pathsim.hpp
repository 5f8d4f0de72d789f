#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "sbm/estimators.hpp"
#include "sbm/geometry.hpp"
#include "sbm/levy.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

/// Time-stepping parameters.
///   h        base step
///   eps_b    boundary tolerance; 0 selects 1e-4·diam(D)
///   delta_cut  jump cutoff; must equal the kernel's cutoff
///   t_max    censoring horizon; 0 selects 50·E[τ] from a pilot run
///   refine   step shrink factor inside the collar δ_D < 4√h
struct PathConfig {
  double h = 1e-3;
  double eps_b = 0.0;
  double delta_cut = 0.02;
  double t_max = 0.0;
  double refine = 16.0;

  void validate() const;
  /// Copy with eps_b resolved for D (t_max left alone).
  PathConfig resolved(const Domain& D) const;
};

enum class ExitType { boundary, jump, censored };
std::string to_string(ExitType t);

struct ExitRecord {
  ExitType type = ExitType::censored;
  Vec3 exit_point{};
  Vec3 pre_exit_point{};
  double exit_time = 0.0;
  std::uint64_t steps = 0;
};

/// Receives the piecewise path: one call per diffusive step (a → b over dt),
/// and one per jump.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void step(const Vec3& a, const Vec3& b, double dt) = 0;
  virtual void jump(const Vec3& /*from*/, const Vec3& /*to*/) {}
};

/// CSV trace (step,time,x,y,z,event) for debugging single paths.
/// event: 0 step, 1 jump, 2 boundary exit, 3 jump exit, 4 censored.
class TraceWriter : public PathObserver {
 public:
  explicit TraceWriter(std::ostream& out);
  void step(const Vec3& a, const Vec3& b, double dt) override;
  void jump(const Vec3& from, const Vec3& to) override;
  void finish(const ExitRecord& r);

 private:
  std::ostream& out_;
  std::uint64_t index_ = 0;
  double time_ = 0.0;
};

/// One killed path of X = B + Y from x0 to the first exit from D.
/// Diffusive steps use per-coordinate variance (2 + σ²_small)·dt; jumps above
/// the cutoff arrive on an exponential clock of rate Λ(δ_cut) and are sampled
/// exactly. Diffusive crossings are detected at step ends and by the
/// half-space Brownian-bridge test; the exit point is then the projection onto ∂D.
ExitRecord simulate_exit(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg, Rng& rng,
                         PathObserver* observer = nullptr);

/// 50 × mean exit time over `n` pilot paths with a generous horizon.
double pilot_t_max(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg,
                   const RunOptions& opt, std::uint64_t n = 1000);

/// cfg with eps_b resolved and, if t_max = 0, t_max from a pilot run at x0.
PathConfig resolve_config(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg,
                          const RunOptions& opt);

/// Bookkeeping shared by all path estimators.
struct PathCounts {
  std::uint64_t total = 0;
  std::uint64_t boundary = 0;
  std::uint64_t jump = 0;
  std::uint64_t censored = 0;
  RunningSum exit_time;  // non-censored paths

  double censored_fraction() const { return total ? double(censored) / double(total) : 0.0; }
  /// Censoring above 1% flags the run.
  bool censor_warning() const { return censored_fraction() > 0.01; }
  void record(const ExitRecord& r);
  PathCounts& operator+=(const PathCounts& o);
};

struct FunctionalEstimate {
  Estimate est;
  PathCounts counts;
};

/// F̂(x) = P_x(X_τ ∈ ∂D), censored paths excluded; binomial stderr.
FunctionalEstimate estimate_F(const Domain& D, const JumpKernel& k, const Vec3& x, std::uint64_t n,
                              const PathConfig& cfg, const RunOptions& opt);

/// Runs n paths from x and folds each ExitRecord into a per-block accumulator
/// via on_record(acc, record); accumulators are merged in block order.
template <class Make, class OnRecord, class Merge>
auto collect_exits(const Domain& D, const JumpKernel& k, const Vec3& x, std::uint64_t n, const PathConfig& cfg,
                   const RunOptions& opt, Make make, OnRecord on_record, Merge merge) {
  return run_blocks(
      n, opt, make,
      [&](Rng& rng, auto& acc) { on_record(acc, simulate_exit(D, k, x, cfg, rng)); }, merge);
}

enum class ExitClass { boundary, jump, all };

/// Mean of f(X_τ)·1{exit class}, censored paths excluded.
FunctionalEstimate exit_functional(const Domain& D, const JumpKernel& k, const Vec3& x,
                                   const std::function<double(const Vec3&)>& f, ExitClass cls, std::uint64_t n,
                                   const PathConfig& cfg, const RunOptions& opt);

/// Cartesian partition of D: grid cells of the bounding box that meet D, with
/// volumes of cell ∩ D from sub-cell sampling.
class SpatialGrid {
 public:
  static SpatialGrid cartesian(const Domain& D, int per_axis, int subsamples = 8);

  std::size_t size() const { return centers_.size(); }
  /// Cell index of y, or −1 if y is in no cell.
  long cell_of(const Vec3& y) const;
  const std::vector<Vec3>& centers() const { return centers_; }
  const std::vector<double>& volumes() const { return volumes_; }
  double spacing() const { return spacing_; }
  KernelGrid empty_kernel_grid() const { return KernelGrid(centers_, volumes_); }

 private:
  int dim_ = 2;
  int per_axis_ = 0;
  double spacing_ = 0.0;
  Vec3 origin_{};
  std::vector<long> index_;  // box cell → compact id or −1
  std::vector<Vec3> centers_;
  std::vector<double> volumes_;
};

struct OccupationResult {
  KernelGrid green;  // Ĝ(x, ·) per cell
  PathCounts counts;
};

/// Occupation-time estimate of G_D(x, ·): per-cell mean time / cell volume.
/// Step time is split evenly between the cells of the two step endpoints.
OccupationResult occupation_green(const Domain& D, const JumpKernel& k, const Vec3& x, const SpatialGrid& grid,
                                  std::uint64_t n, const PathConfig& cfg, const RunOptions& opt);

/// Occupation-time estimate of G_D(x, y_i) from the time spent in small balls
/// B(y_i, radius) ⊂ D; the ball average of G(x, ·) equals its center value
/// when x lies outside the ball (mean-value property).
OccupationResult occupation_probes(const Domain& D, const JumpKernel& k, const Vec3& x,
                                   const std::vector<Vec3>& probes, double radius, std::uint64_t n,
                                   const PathConfig& cfg, const RunOptions& opt);

/// E_x ∫_0^τ F(X_t) dt by the trapezoid rule along each path.
FunctionalEstimate occupation_functional(const Domain& D, const JumpKernel& k, const Vec3& x,
                                         const std::function<double(const Vec3&)>& F, std::uint64_t n,
                                         const PathConfig& cfg, const RunOptions& opt);

}  // namespace sbm
