#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sbm/vec.hpp"

namespace sbm {

enum class DomainKind { ball, annulus, perturbed_disk };

/// Explicit Ahlfors constants: c_lower r^{d−1} ≤ σ(B(z,r) ∩ ∂D) ≤ c_upper r^{d−1}
/// for z ∈ ∂D and 0 < r ≤ radius.
struct AhlforsConstants {
  double c_lower = 0.0;
  double c_upper = 0.0;
  double radius = 0.0;
};

/// Bounded C^{1,1} domain. Shipped kinds:
///   ball(d, center, R)       R₀ = R
///   annulus(d, r_in)         {r_in < |x| < 1}, R₀ = r_in
///   perturbed_disk(ε, k)     {|x| < 1 + ε cos(kθ)}, ε k² ≤ 0.1, R₀ from the curvature bound
class Domain {
 public:
  static Domain unit_ball(int d);
  static Domain ball(int d, Vec3 center, double radius);
  static Domain annulus(int d, double inner_radius);
  static Domain perturbed_disk(double eps, int k);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  Vec3 center() const { return center_; }
  double radius() const { return radius_; }
  double inner_radius() const { return inner_; }
  double perturbation() const { return eps_; }
  int wavenumber() const { return wave_; }

  /// Interior/exterior tangent ball radius R₀.
  double r0() const { return r0_; }
  /// Lipschitz bound Λ₀ of the boundary's unit normal (curvature bound).
  double lambda0() const { return lambda0_; }
  double diameter() const;
  /// Center of mass (default Martin normalization point).
  Vec3 center_of_mass() const { return center_; }

  /// δ_D(x) = inf{|x − z| : z ∉ D}; zero outside D.
  double dist_to_complement(const Vec3& x) const;
  /// +δ_D(x) inside, −dist(x, D̄) outside.
  double signed_distance(const Vec3& x) const;
  bool contains(const Vec3& x) const { return signed_distance(x) > 0.0; }
  /// Nearest boundary point.
  Vec3 project_to_boundary(const Vec3& x) const;
  /// Outward unit normal at a boundary point.
  Vec3 outer_normal(const Vec3& z) const;

  /// Radial profile of the perturbed disk, ρ(θ) = 1 + ε cos(kθ); radius for balls.
  double profile(double theta) const;

  double surface_measure() const;
  /// σ(B(z, r) ∩ ∂D).
  double boundary_ball_measure(const Vec3& z, double r) const;
  AhlforsConstants ahlfors() const;

  std::string describe() const;

 private:
  Domain() = default;

  double perturbed_signed_distance(const Vec3& x, Vec3* nearest) const;

  DomainKind kind_ = DomainKind::ball;
  int dim_ = 2;
  Vec3 center_{};
  double radius_ = 1.0;
  double inner_ = 0.0;
  double eps_ = 0.0;
  int wave_ = 0;
  double r0_ = 1.0;
  double lambda0_ = 1.0;
};

/// Stolz cone A_z^β = {x ∈ D : δ_D(x) < R₀, |x − z| < β δ_D(x)}.
struct ConeSpec {
  Vec3 z;
  double beta = 2.0;
  double cap_radius = 1.0;

  /// Validates z ∈ ∂D and β > (1 − κ)/κ with κ = R₀/2.
  static ConeSpec make(const Domain& D, const Vec3& z, double beta);
};

bool stolz_contains(const Domain& D, const ConeSpec& c, const Vec3& x);

enum class ConeMode { radial, zigzag };

/// n points of A_z^β with δ_D(x_k) = R₀ 2^{−k}, k = 1..n.
std::vector<Vec3> cone_sequence(const Domain& D, const ConeSpec& c, int n, ConeMode mode);

/// Tangential approach to w = e^{iθ} in the unit disk: 1 − |x| = δ and
/// arg x − θ = δ^γ, for each δ in `depths`.
std::vector<Vec3> tangential_curve(const Domain& D, double theta, double gamma, std::span<const double> depths);
/// Same with δ_k = 2^{−k}, k = 1..n.
std::vector<Vec3> tangential_curve(const Domain& D, double theta, double gamma, int n);

struct BoundaryCell {
  Vec3 center;
  double measure = 0.0;
};

/// Partition of ∂D into cells with exact total measure.
///   circles: arcs between angular breakpoints (uniform or caller supplied)
///   2-spheres: equal-area latitude bands split into equal longitude cells
///   perturbed disk: equal parameter-angle cells, measures by quadrature
class BoundaryMesh {
 public:
  static BoundaryMesh uniform(const Domain& D, int n_cells);
  /// Arcs [a_i, a_{i+1}) of the boundary circle of a 2-d ball; breakpoints
  /// sorted, spanning less than 2π, last arc wraps to the first breakpoint.
  static BoundaryMesh from_breakpoints(const Domain& D, std::vector<double> breakpoints);

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return cells_.size(); }
  const std::vector<BoundaryCell>& cells() const { return cells_; }
  const BoundaryCell& operator[](std::size_t i) const { return cells_[i]; }

  /// Index of the cell containing a boundary point (nearest component).
  std::size_t locate(const Vec3& w) const;
  double total_measure() const;
  double max_cell_diameter() const { return max_diameter_; }

  /// Angular interval [lo, hi) of a circle cell.
  std::pair<double, double> arc(std::size_t i) const;
  /// Latitude/longitude box of a 2-sphere cell (z relative to the sphere center, in units of its radius).
  struct SphereBox {
    Vec3 center;
    double radius;
    double z_lo, z_hi, phi_lo, phi_hi;
  };
  SphereBox sphere_box(std::size_t i) const;
  bool is_circle_mesh() const { return !components_.empty() && components_.front().type == Component::circle; }

  // Structure-of-arrays views for vectorized reductions.
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  std::span<const double> zs() const { return zs_; }
  std::span<const double> measures() const { return ms_; }

 private:
  struct Component {
    enum Type { circle, sphere, perturbed } type = circle;
    Vec3 center{};
    double radius = 1.0;
    std::size_t offset = 0;
    std::vector<double> breaks;  // circle/perturbed: angles, size cells+1, breaks.back() = breaks.front() + 2π
    int bands = 0;               // sphere
    int per_band = 0;            // sphere
  };

  explicit BoundaryMesh(const Domain& D) : domain_(D) {}
  void add_circle(Vec3 center, double radius, std::vector<double> breaks);
  void add_sphere(Vec3 center, double radius, int n_cells);
  void add_perturbed(int n_cells);
  void finalize();

  Domain domain_;
  std::vector<Component> components_;
  std::vector<BoundaryCell> cells_;
  std::vector<double> xs_, ys_, zs_, ms_;
  double max_diameter_ = 0.0;
};

}  // namespace sbm
