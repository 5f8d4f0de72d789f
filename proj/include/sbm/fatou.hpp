#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sbm/estimators.hpp"
#include "sbm/geometry.hpp"
#include "sbm/kernels.hpp"
#include "sbm/pathsim.hpp"

namespace sbm {

/// Piecewise-constant function (or discrete measure, one atom per cell center) on a boundary mesh.
struct BoundaryData {
  std::shared_ptr<const BoundaryMesh> mesh;
  std::vector<double> values;

  static BoundaryData from_function(std::shared_ptr<const BoundaryMesh> mesh,
                                    const std::function<double(const Vec3&)>& g);
  static BoundaryData constant(std::shared_ptr<const BoundaryMesh> mesh, double c);

  double operator()(const Vec3& w) const { return values[mesh->locate(w)]; }
  std::size_t size() const { return values.size(); }
  void validate() const;
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct ConvergenceReport {
  Vec3 target{};
  std::string path;  // "cone beta=2 zigzag", "radial theta=..", "tangential theta=.. gamma=.."
  std::vector<Vec3> points;
  std::vector<double> depths;  // δ_D at each point
  std::vector<double> values;
  std::vector<double> stderrs;
  double expected = std::numeric_limits<double>::quiet_NaN();
  double limit = 0.0;
  double limit_stderr = 0.0;
  double oscillation = 0.0;  // max − min over the tail half
  double tolerance = 0.0;
  Verdict verdict = Verdict::inconclusive;

  /// Fills limit, oscillation and verdict from the traced values.
  void finish();
  std::string to_json() const;
  /// depth_index,delta,value,stderr
  void write_csv(std::ostream& os) const;
};

struct FatouTraces {
  std::vector<ConvergenceReport> plain;     // u_g(x_k)
  std::vector<ConvergenceReport> relative;  // u_g(x_k)/F̂(x_k)
  ConvergenceReport F;                      // F̂(x_k), expected 1
  std::vector<PathCounts> counts;           // per trace point
  bool ratio_unstable = false;              // F̂ < 0.05 somewhere; relative verdicts inconclusive
};

struct TraceSpec {
  ConeSpec cone;
  int depth = 8;
  ConeMode mode = ConeMode::zigzag;
  double tolerance = 0.05;
};

/// u_g for every g in gs along one cone sequence, all from the same paths
/// (boundary-exit histograms per trace point).
FatouTraces fatou_traces(const Domain& D, const JumpKernel& k, std::span<const BoundaryData> gs,
                         const TraceSpec& spec, std::uint64_t n, const PathConfig& cfg, const RunOptions& opt);

ConvergenceReport fatou_trace(const Domain& D, const JumpKernel& k, const BoundaryData& g, const TraceSpec& spec,
                              std::uint64_t n, const PathConfig& cfg, const RunOptions& opt);

ConvergenceReport relative_fatou_trace(const Domain& D, const JumpKernel& k, const BoundaryData& g,
                                       const TraceSpec& spec, std::uint64_t n, const PathConfig& cfg,
                                       const RunOptions& opt);

/// C(t) = max((3t)^d, 2^{3d}).
double maximal_constant(double t, int d);

struct MaximalResult {
  double lhs = 0.0, mid = 0.0, rhs = 0.0;
  double sup_ratio = 0.0, inf_ratio = 0.0;
  double C = 0.0;
  bool pass = false;
};

/// mid = ∫K̂dμ/∫K̂dν against sup/inf over r of μ(B(z,r))/ν(B(z,r)) (open balls,
/// radii with ν(B) = 0 < μ(B) count as +∞, 0/0 radii are skipped).
MaximalResult maximal_inequality_check(const BoundaryData& mu, const BoundaryData& nu, const Domain& D, const Vec3& x,
                                       const Vec3& z, double t);

struct MaximalSweep {
  std::uint64_t instances = 0;
  std::uint64_t failures = 0;
  std::size_t geometry_pairs = 0;
  double worst_upper = 0.0;  // max mid/rhs
  double worst_lower = 0.0;  // max lhs/mid
};

/// Every pair (μ, ν) of measures on at most `max_atoms` cells with weights from
/// `weights`, at every (x, z) pair given, with the cone parameter t.
MaximalSweep maximal_exhaustive(const BoundaryMesh& mesh, std::span<const std::pair<Vec3, Vec3>> xz, double t,
                                int max_atoms, std::span<const double> weights);

/// Qualifying (x, z) pairs: z over the given boundary points, x over a Cartesian
/// grid of spacing h inside D with |x − z| ≤ t δ_D(x).
std::vector<std::pair<Vec3, Vec3>> cone_grid_pairs(const Domain& D, std::span<const Vec3> zs, double t, double h);

struct GBoundResult {
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<double> deltas;
  std::vector<double> values;
};

/// Ĝsur(x) = Σ K̂(x, cell)σ_cell (SIMD reduction) at each x.
GBoundResult G_boundedness_check(const BoundaryMesh& mesh, std::span<const Vec3> xs);

/// Points z − δν(z) with δ = delta0, delta0/2, ...
std::vector<Vec3> radial_points(const Domain& D, const Vec3& z, double delta0, int count);

struct LocalityReport {
  std::vector<double> deltas;
  std::vector<Estimate> q;
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool decreasing = false;  // every consecutive drop exceeds its combined stderr
  Verdict verdict = Verdict::inconclusive;
};

/// q(x) = P_x(boundary exit outside B(z, r)); least-squares slope of log q on log δ_D.
LocalityReport exit_locality_check(const Domain& D, const JumpKernel& k, const Vec3& z, double r,
                                   std::span<const Vec3> xs, std::uint64_t n, const PathConfig& cfg,
                                   const RunOptions& opt, double slope_min = 0.8);

struct RepresentationPoint {
  Vec3 x{};
  Estimate direct;    // E_x[φ(X_τ); jump exit]
  Estimate quad;      // E_x ∫_0^τ ∫ φ(z) j(|X_t − z|) dz dt
  Estimate two_step;  // via the exit from B(x, ball_fraction·δ_D(x))
  double F = 0.0;
  double sigma_quad = 0.0;
  double sigma_two_step = 0.0;
  bool pass = false;
};

std::vector<RepresentationPoint> representation_check(const Domain& D, const JumpKernel& k, const RadialFunction& phi,
                                                      std::span<const Vec3> xs, std::uint64_t n,
                                                      const PathConfig& cfg, const RunOptions& opt,
                                                      double ball_fraction = 0.5);

/// Boundary data U = Σ_{k=1}^{k_max} 2^{−k} U_k on the unit circle; U_k is the
/// indicator of sin(N_k(θ − ψ_k)) > 0, arcs of width λ_k = π/N_k, N_k = base·2^k.
class LittlewoodArcs {
 public:
  LittlewoodArcs(int k_max, long base, std::vector<double> phases);
  /// Phases ψ_k spread by the golden ratio.
  static LittlewoodArcs make(int k_max, long base);

  int k_max() const { return k_max_; }
  long base() const { return base_; }
  double lambda0() const;
  double lambda(int k) const;
  long frequency(int k) const;
  const std::vector<double>& phases() const { return phases_; }

  double boundary_value(double theta) const;
  /// Poisson integral of U at (1 − δ)e^{iθ}; exact through P[U_k](z) = ω_half(z^{N_k}).
  double poisson(double delta, double theta) const;
  /// All jump points in [0, 2π), sorted (for mesh construction; needs a moderate base).
  std::vector<double> breakpoints() const;

 private:
  int k_max_;
  long base_;
  std::vector<double> phases_;
};

/// U sampled on a disk mesh; cells wider than the finest arc are refused.
BoundaryData counterexample_data(const LittlewoodArcs& arcs, std::shared_ptr<const BoundaryMesh> mesh);

/// Harmonic measure of the upper half circle at (1 − δ)e^{iφ}.
double half_circle_measure(double delta, double phi);

/// Σ_cells U_cell·ω(x, cell): the surrogate ratio integrated exactly per cell (unit disk).
double mesh_poisson(const BoundaryData& U, const Vec3& x);

/// (Σ K̂(x, c)U σ)/(Σ K̂(x, c)σ) with the cell-center rule; cells must be ≤ δ_D(x)/4.
double surrogate_ratio(const BoundaryData& U, const Vec3& x);

enum class CounterexampleMode { surrogate_quadrature, monte_carlo };

struct CounterexampleOptions {
  double gamma = 0.5;
  int points = 64;  // depth list length, the last half is the tail
  double radial_max = 0.05;
  double tangential_min = 0.3;
  double tangential_share = 0.9;
  CounterexampleMode mode = CounterexampleMode::surrogate_quadrature;
  // monte_carlo mode: u_U(x) = E_x[U(X_τ); boundary exit] at depths in [mc_min_delta, 0.5]
  const JumpKernel* kernel = nullptr;
  double mc_min_delta = 1e-3;
  std::uint64_t n = 0;
  PathConfig cfg{};
  RunOptions opt{};
};

struct CounterexampleResult {
  std::vector<double> thetas;
  std::vector<ConvergenceReport> radial;
  std::vector<ConvergenceReport> tangential;
  bool radial_ok = false;
  double tangential_fraction = 0.0;
  bool dichotomy = false;  // radial < tangential oscillation at every θ
  bool pass = false;
  double mc_sigma_max = 0.0;  // monte_carlo mode: max |MC − quadrature|/stderr
};

/// Depth list in s = δ^γ: geometric from s_a·(s_a/s_end)^{32/31} down to s_end,
/// s_a = 1.5λ₀, s_end = λ₀/1024 (for 64 points).
std::vector<double> counterexample_offsets(const LittlewoodArcs& arcs, int points);

CounterexampleResult littlewood_counterexample(const LittlewoodArcs& arcs, std::span<const double> thetas,
                                               const CounterexampleOptions& opt);

struct LemmaNearOneResult {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of ω − (1 − ε)
};

/// δ(ε) = min(1/π, ε/(2π)).
double near_one_depth(double eps);

/// For U = 1 on the arc of half-width λ around 1 and h₁ the total surrogate mass,
/// checks 1 − ε ≤ u/h₁ ≤ 1 at 1 − ρ = λδ(ε)2^{−j}, j = 0..j_max.
LemmaNearOneResult lemma_near_one_check(std::span<const double> lambdas, std::span<const double> epsilons,
                                        int j_max);

}  // namespace sbm
