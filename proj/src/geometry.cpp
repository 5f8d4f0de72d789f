#include "sbm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "quadrature.hpp"
#include "sbm/error.hpp"

namespace sbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a, double base) {
  double r = std::fmod(a - base, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return base + r;
}

// σ(B(z, r) ∩ S) for the circle/sphere S of radius R centered at c.
double sphere_cap(int d, const Vec3& c, double R, const Vec3& z, double r) {
  const double a = distance(z, c);
  const double full = d == 2 ? kTwoPi * R : 4.0 * kPi * R * R;
  if (a < 1e-300) return R < r ? full : 0.0;
  const double k = (R * R + a * a - r * r) / (2.0 * R * a);
  if (k <= -1.0) return full;
  if (k >= 1.0) return 0.0;
  return d == 2 ? 2.0 * R * std::acos(k) : kTwoPi * R * R * (1.0 - k);
}

Vec3 any_tangent(const Vec3& n, int d) {
  if (d == 2) return {-n.y, n.x, 0.0};
  const Vec3 a = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  return normalized(a - n * dot(a, n));
}

}  // namespace

Domain Domain::unit_ball(int d) { return ball(d, {}, 1.0); }

Domain Domain::ball(int d, Vec3 center, double radius) {
  if (d != 2 && d != 3) throw ConfigError("ball: dimension must be 2 or 3");
  if (!(radius > 0.0)) throw ConfigError("ball: radius must be positive");
  if (d == 2) center.z = 0.0;
  Domain D;
  D.kind_ = DomainKind::ball;
  D.dim_ = d;
  D.center_ = center;
  D.radius_ = radius;
  D.r0_ = radius;
  D.lambda0_ = 1.0 / radius;
  return D;
}

Domain Domain::annulus(int d, double inner_radius) {
  if (d != 2 && d != 3) throw ConfigError("annulus: dimension must be 2 or 3");
  if (!(inner_radius > 0.0 && inner_radius < 1.0)) throw ConfigError("annulus: inner radius must lie in (0,1)");
  Domain D;
  D.kind_ = DomainKind::annulus;
  D.dim_ = d;
  D.radius_ = 1.0;
  D.inner_ = inner_radius;
  // Exterior balls at the inner sphere are limited by the hole, interior balls by the shell width.
  D.r0_ = std::min(inner_radius, 0.5 * (1.0 - inner_radius));
  D.lambda0_ = 1.0 / inner_radius;
  return D;
}

Domain Domain::perturbed_disk(double eps, int k) {
  if (!(eps >= 0.0) || k < 0 || eps * k * k > 0.1 + 1e-15 || eps >= 0.5)
    throw ConfigError("perturbed_disk: need eps >= 0, k >= 0, eps*k^2 <= 0.1");
  Domain D;
  D.kind_ = DomainKind::perturbed_disk;
  D.dim_ = 2;
  D.radius_ = 1.0;
  D.eps_ = eps;
  D.wave_ = k;
  // Polar curvature |ρ² + 2ρ'² − ρρ''| / (ρ² + ρ'²)^{3/2} with |ρ'| ≤ εk, |ρ''| ≤ εk².
  const double ek = eps * k;
  const double kappa =
      ((1.0 + eps) * (1.0 + eps) + 2.0 * ek * ek + (1.0 + eps) * ek * k) / std::pow(1.0 - eps, 3);
  D.lambda0_ = kappa;
  D.r0_ = std::min(1.0 / kappa, 1.0 - eps);
  return D;
}

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::ball: return 2.0 * radius_;
    case DomainKind::annulus: return 2.0;
    case DomainKind::perturbed_disk: return 2.0 * (1.0 + eps_);
  }
  return 0.0;
}

double Domain::profile(double theta) const {
  if (kind_ == DomainKind::perturbed_disk) return 1.0 + eps_ * std::cos(wave_ * theta);
  return radius_;
}

double Domain::perturbed_signed_distance(const Vec3& x, Vec3* nearest) const {
  const auto curve = [&](double t) { return polar(profile(t), t); };
  const auto d2 = [&](double t) { return norm2(x - curve(t)); };
  // Any foot point lies within the angular window where the lower bound
  // |c(t) − x|² ≥ 4 r_min ρ sin²((t − θ)/2) stays below the radial candidate.
  constexpr int kScan = 256;
  const double rho = std::hypot(x.x, x.y);
  const double theta = std::atan2(x.y, x.x);
  const double radial = std::abs(profile(theta) - rho);
  double half = kPi;
  if (rho > 0.0) {
    const double s = radial / (2.0 * std::sqrt((1.0 - eps_) * rho));
    if (s < 1.0) half = std::min(kPi, 1.01 * 2.0 * std::asin(s) + 1e-9);
  }
  const bool full = half >= kPi;
  const int m = full ? kScan : std::max(3, int(std::ceil(2.0 * half * kScan / kTwoPi)) + 1);
  const double h = full ? kTwoPi / kScan : 2.0 * half / (m - 1);
  const double t0 = full ? 0.0 : theta - half;
  std::array<double, kScan + 1> v;
  for (int i = 0; i < m; ++i) v[i] = d2(t0 + i * h);
  // Refine the two smallest discrete local minima.
  std::array<int, kScan + 1> mins;
  int count = 0;
  for (int i = 0; i < m; ++i) {
    const bool left = full ? v[i] <= v[(i + m - 1) % m] : (i == 0 || v[i] <= v[i - 1]);
    const bool right = full ? v[i] <= v[(i + 1) % m] : (i == m - 1 || v[i] <= v[i + 1]);
    if (left && right) mins[count++] = i;
  }
  std::sort(mins.begin(), mins.begin() + count, [&](int a, int b) { return v[a] < v[b]; });
  count = std::min(count, 2);
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (int j = 0; j < count; ++j) {
    const double c = t0 + mins[j] * h;
    const auto r = boost::math::tools::brent_find_minima(d2, c - h, c + h, std::numeric_limits<double>::digits / 2);
    if (r.second < best) {
      best = r.second;
      best_t = r.first;
    }
  }
  // Newton polish on (c(t) − x)·c'(t) = 0; Brent alone leaves O(√ε) error in t.
  const double e = eps_, k = wave_;
  for (int it = 0; it < 4; ++it) {
    const double t = best_t;
    const double r = profile(t), dr = -e * k * std::sin(k * t), ddr = -e * k * k * std::cos(k * t);
    const double c = std::cos(t), s = std::sin(t);
    const Vec3 p{r * c, r * s, 0.0};
    const Vec3 d1{dr * c - r * s, dr * s + r * c, 0.0};
    const Vec3 d2v{ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s, 0.0};
    const Vec3 diff = p - Vec3{x.x, x.y, 0.0};
    const double g = dot(diff, d1);
    const double gp = norm2(d1) + dot(diff, d2v);
    if (!(gp > 0.0)) break;
    const double step = g / gp;
    if (!(std::abs(step) < kTwoPi / kScan)) break;
    best_t = t - step;
  }
  const Vec3 foot = curve(best_t);
  if (nearest) *nearest = foot;
  const double dist = std::hypot(x.x - foot.x, x.y - foot.y);
  const double rx = std::hypot(x.x, x.y);
  const bool inside = rx < profile(std::atan2(x.y, x.x));
  return inside ? dist : -dist;
}

double Domain::signed_distance(const Vec3& x) const {
  switch (kind_) {
    case DomainKind::ball: return radius_ - distance(x, center_);
    case DomainKind::annulus: {
      const double r = norm(x);
      return std::min(1.0 - r, r - inner_);
    }
    case DomainKind::perturbed_disk: return perturbed_signed_distance(x, nullptr);
  }
  return 0.0;
}

double Domain::dist_to_complement(const Vec3& x) const { return std::max(0.0, signed_distance(x)); }

Vec3 Domain::project_to_boundary(const Vec3& x) const {
  switch (kind_) {
    case DomainKind::ball: return center_ + normalized(x - center_) * radius_;
    case DomainKind::annulus: {
      const double r = norm(x);
      const Vec3 u = normalized(x);
      return std::abs(1.0 - r) <= std::abs(r - inner_) ? u : u * inner_;
    }
    case DomainKind::perturbed_disk: {
      Vec3 p;
      perturbed_signed_distance(x, &p);
      return p;
    }
  }
  return x;
}

Vec3 Domain::outer_normal(const Vec3& z) const {
  switch (kind_) {
    case DomainKind::ball: return normalized(z - center_);
    case DomainKind::annulus: {
      const Vec3 u = normalized(z);
      return norm(z) > 0.5 * (1.0 + inner_) ? u : -u;
    }
    case DomainKind::perturbed_disk: {
      const double t = std::atan2(z.y, z.x);
      const double r = profile(t);
      const double dr = -eps_ * wave_ * std::sin(wave_ * t);
      const Vec3 tangent{dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t), 0.0};
      return normalized(Vec3{tangent.y, -tangent.x, 0.0});
    }
  }
  return {};
}

double Domain::surface_measure() const {
  switch (kind_) {
    case DomainKind::ball:
      return dim_ == 2 ? kTwoPi * radius_ : 4.0 * kPi * radius_ * radius_;
    case DomainKind::annulus:
      return dim_ == 2 ? kTwoPi * (1.0 + inner_) : 4.0 * kPi * (1.0 + inner_ * inner_);
    case DomainKind::perturbed_disk: {
      const auto speed = [&](double t) {
        const double dr = -eps_ * wave_ * std::sin(wave_ * t);
        return std::hypot(profile(t), dr);
      };
      return detail::integrate_smooth("perimeter", speed, 0.0, kTwoPi, 1e-13);
    }
  }
  return 0.0;
}

double Domain::boundary_ball_measure(const Vec3& z, double r) const {
  if (!(r > 0.0)) return 0.0;
  switch (kind_) {
    case DomainKind::ball: return sphere_cap(dim_, center_, radius_, z, r);
    case DomainKind::annulus: return sphere_cap(dim_, {}, 1.0, z, r) + sphere_cap(dim_, {}, inner_, z, r);
    case DomainKind::perturbed_disk: {
      const auto f = [&](double t) { return distance(polar(profile(t), t), z) - r; };
      const auto speed = [&](double t) {
        const double dr = -eps_ * wave_ * std::sin(wave_ * t);
        return std::hypot(profile(t), dr);
      };
      // Locate the sign changes of |c(t) − z| − r and integrate arc length over the inside.
      constexpr int kScan = 4096;
      const double h = kTwoPi / kScan;
      std::vector<double> cuts;
      double prev = f(0.0);
      for (int i = 1; i <= kScan; ++i) {
        const double cur = f(i * h);
        if ((prev < 0.0) != (cur < 0.0)) {
          boost::math::tools::eps_tolerance<double> tol(50);
          std::uintmax_t it = 100;
          const auto br = boost::math::tools::toms748_solve(f, (i - 1) * h, i * h, prev, cur, tol, it);
          cuts.push_back(0.5 * (br.first + br.second));
        }
        prev = cur;
      }
      cuts.insert(cuts.begin(), 0.0);
      cuts.push_back(kTwoPi);
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a || f(0.5 * (a + b)) >= 0.0) continue;
        total += detail::integrate_smooth("boundary ball measure", speed, a, b, 1e-12);
      }
      return total;
    }
  }
  return 0.0;
}

AhlforsConstants Domain::ahlfors() const {
  // Single-component contributions for r ≤ R₀: the chord bound gives arc ≥ 2r and
  // arc = 4R arcsin(r/2R) ≤ πr on circles; caps on spheres have area exactly πr².
  // R₀ never exceeds half the annulus shell, so only one component is hit.
  AhlforsConstants a;
  a.radius = r0_;
  if (dim_ == 2) {
    a.c_lower = 2.0;
    a.c_upper = kPi;
  } else {
    a.c_lower = kPi;
    a.c_upper = kPi;
  }
  return a;
}

std::string Domain::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case DomainKind::ball:
      s << "ball(d=" << dim_ << ", center=(" << center_.x << "," << center_.y << "," << center_.z
        << "), radius=" << radius_ << ")";
      break;
    case DomainKind::annulus: s << "annulus(d=" << dim_ << ", r_in=" << inner_ << ")"; break;
    case DomainKind::perturbed_disk: s << "perturbed_disk(eps=" << eps_ << ", k=" << wave_ << ")"; break;
  }
  s << " R0=" << r0_ << " Lambda0=" << lambda0_ << " R1=" << r0_;
  return s.str();
}

ConeSpec ConeSpec::make(const Domain& D, const Vec3& z, double beta) {
  if (std::abs(D.signed_distance(z)) > 1e-9) throw DomainError("cone: apex is not on the boundary");
  const double kappa = D.r0() / 2.0;
  if (!(beta > 1.0) || !(beta > (1.0 - kappa) / kappa)) {
    std::ostringstream msg;
    msg << "cone: aperture beta=" << beta << " must exceed max(1, (1-kappa)/kappa) = "
        << std::max(1.0, (1.0 - kappa) / kappa) << " (kappa = R0/2 = " << kappa << ")";
    throw DomainError(msg.str());
  }
  return ConeSpec{z, beta, D.r0()};
}

bool stolz_contains(const Domain& D, const ConeSpec& c, const Vec3& x) {
  const double delta = D.dist_to_complement(x);
  return delta > 0.0 && delta < c.cap_radius && distance(x, c.z) < c.beta * delta;
}

std::vector<Vec3> cone_sequence(const Domain& D, const ConeSpec& c, int n, ConeMode mode) {
  if (n < 1) throw DomainError("cone_sequence: n must be >= 1");
  const Vec3 nu = D.outer_normal(c.z);
  const Vec3 tau = any_tangent(nu, D.dim());
  const double w0 = std::min(1.0, 0.5 * std::sqrt(c.beta * c.beta - 1.0));
  std::vector<Vec3> out;
  out.reserve(n);
  for (int k = 1; k <= n; ++k) {
    const double t = c.cap_radius * std::ldexp(1.0, -k);
    Vec3 x = c.z - nu * t;
    if (mode == ConeMode::zigzag) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      double w = w0;
      Vec3 y = x + tau * (sign * w * t);
      while (!stolz_contains(D, c, y) && w > 1e-6) {
        w *= 0.5;
        y = x + tau * (sign * w * t);
      }
      if (stolz_contains(D, c, y)) x = y;
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Vec3> tangential_curve(const Domain& D, double theta, double gamma, std::span<const double> depths) {
  if (D.dim() != 2 || D.kind() != DomainKind::ball) throw DomainError("tangential_curve: needs a disk");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("tangential_curve: gamma must lie in (0,1)");
  std::vector<Vec3> out;
  out.reserve(depths.size());
  for (double delta : depths) {
    if (!(delta > 0.0 && delta < D.radius())) throw DomainError("tangential_curve: depth out of range");
    out.push_back(D.center() + polar(D.radius() - delta, theta + std::pow(delta, gamma)));
  }
  return out;
}

std::vector<Vec3> tangential_curve(const Domain& D, double theta, double gamma, int n) {
  if (n < 1) throw DomainError("tangential_curve: n must be >= 1");
  std::vector<double> depths(n);
  for (int k = 1; k <= n; ++k) depths[k - 1] = std::ldexp(1.0, -k);
  return tangential_curve(D, theta, gamma, depths);
}

// ---------------------------------------------------------------------------

BoundaryMesh BoundaryMesh::uniform(const Domain& D, int n_cells) {
  if (n_cells < 8) throw ConfigError("boundary_mesh: need at least 8 cells");
  BoundaryMesh m(D);
  const auto uniform_breaks = [](int n) {
    std::vector<double> b(n + 1);
    for (int i = 0; i <= n; ++i) b[i] = kTwoPi * i / n;
    return b;
  };
  switch (D.kind()) {
    case DomainKind::ball:
      if (D.dim() == 2)
        m.add_circle(D.center(), D.radius(), uniform_breaks(n_cells));
      else
        m.add_sphere(D.center(), D.radius(), n_cells);
      break;
    case DomainKind::annulus: {
      const double ri = D.inner_radius();
      const double share = D.dim() == 2 ? 1.0 / (1.0 + ri) : 1.0 / (1.0 + ri * ri);
      const int outer = std::clamp(static_cast<int>(std::lround(n_cells * share)), 4, n_cells - 4);
      if (D.dim() == 2) {
        m.add_circle({}, 1.0, uniform_breaks(outer));
        m.add_circle({}, ri, uniform_breaks(n_cells - outer));
      } else {
        m.add_sphere({}, 1.0, outer);
        m.add_sphere({}, ri, n_cells - outer);
      }
      break;
    }
    case DomainKind::perturbed_disk: m.add_perturbed(n_cells); break;
  }
  m.finalize();
  return m;
}

BoundaryMesh BoundaryMesh::from_breakpoints(const Domain& D, std::vector<double> breaks) {
  if (D.kind() != DomainKind::ball || D.dim() != 2) throw ConfigError("boundary_mesh: breakpoints need a disk");
  if (breaks.size() < 2) throw ConfigError("boundary_mesh: need at least 2 breakpoints");
  if (!std::is_sorted(breaks.begin(), breaks.end()) || !(breaks.back() - breaks.front() < kTwoPi))
    throw ConfigError("boundary_mesh: breakpoints must be sorted and span less than 2*pi");
  breaks.push_back(breaks.front() + kTwoPi);
  BoundaryMesh m(D);
  m.add_circle(D.center(), D.radius(), std::move(breaks));
  m.finalize();
  return m;
}

void BoundaryMesh::add_circle(Vec3 center, double radius, std::vector<double> breaks) {
  Component c;
  c.type = Component::circle;
  c.center = center;
  c.radius = radius;
  c.offset = cells_.size();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    cells_.push_back({center + polar(radius, 0.5 * (a + b)), radius * (b - a)});
    max_diameter_ = std::max(max_diameter_, 2.0 * radius * std::sin(std::min(b - a, kPi) / 2.0));
  }
  c.breaks = std::move(breaks);
  components_.push_back(std::move(c));
}

void BoundaryMesh::add_sphere(Vec3 center, double radius, int n) {
  // Band count: the divisor of n closest to sqrt(n/π), making equatorial cells roughly square.
  const double target = std::sqrt(n / kPi);
  int bands = 1;
  for (int b = 1; b <= n; ++b) {
    if (n % b == 0 && std::abs(b - target) < std::abs(bands - target)) bands = b;
  }
  const int per = n / bands;
  Component c;
  c.type = Component::sphere;
  c.center = center;
  c.radius = radius;
  c.offset = cells_.size();
  c.bands = bands;
  c.per_band = per;
  const double area = 4.0 * kPi * radius * radius / n;
  const auto point = [&](double zc, double phi) {
    const double s = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    return center + Vec3{s * std::cos(phi), s * std::sin(phi), zc} * radius;
  };
  for (int b = 0; b < bands; ++b) {
    const double zhi = 1.0 - 2.0 * b / bands;
    const double zlo = 1.0 - 2.0 * (b + 1) / bands;
    const double zm = 0.5 * (zhi + zlo);
    const double dphi = kTwoPi / per;
    // Diameter of one cell (all cells in a band are congruent).
    const Vec3 probes[] = {point(zhi, 0.0), point(zhi, dphi), point(zlo, 0.0), point(zlo, dphi),
                           point(zm, 0.0), point(zm, dphi), point(zhi, 0.5 * dphi), point(zlo, 0.5 * dphi)};
    for (const auto& p : probes)
      for (const auto& q : probes) max_diameter_ = std::max(max_diameter_, distance(p, q));
    for (int l = 0; l < per; ++l) cells_.push_back({point(zm, (l + 0.5) * dphi), area});
  }
  components_.push_back(std::move(c));
}

void BoundaryMesh::add_perturbed(int n) {
  Component c;
  c.type = Component::perturbed;
  c.offset = cells_.size();
  c.breaks.resize(n + 1);
  for (int i = 0; i <= n; ++i) c.breaks[i] = kTwoPi * i / n;
  const Domain& D = domain_;
  const auto speed = [&](double t) {
    const double dr = -D.perturbation() * D.wavenumber() * std::sin(D.wavenumber() * t);
    return std::hypot(D.profile(t), dr);
  };
  for (int i = 0; i < n; ++i) {
    const double a = c.breaks[i], b = c.breaks[i + 1];
    const double tm = 0.5 * (a + b);
    const double len = detail::integrate_smooth("cell measure", speed, a, b, 1e-13);
    cells_.push_back({polar(D.profile(tm), tm), len});
    max_diameter_ = std::max(max_diameter_, distance(polar(D.profile(a), a), polar(D.profile(b), b)));
  }
  components_.push_back(std::move(c));
}

void BoundaryMesh::finalize() {
  xs_.resize(cells_.size());
  ys_.resize(cells_.size());
  zs_.resize(cells_.size());
  ms_.resize(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    xs_[i] = cells_[i].center.x;
    ys_[i] = cells_[i].center.y;
    zs_[i] = cells_[i].center.z;
    ms_[i] = cells_[i].measure;
  }
}

double BoundaryMesh::total_measure() const {
  double s = 0.0;
  for (double m : ms_) s += m;
  return s;
}

std::pair<double, double> BoundaryMesh::arc(std::size_t i) const {
  for (const auto& c : components_) {
    const std::size_t n = c.breaks.empty() ? 0 : c.breaks.size() - 1;
    if (c.type != Component::sphere && i >= c.offset && i < c.offset + n) {
      return {c.breaks[i - c.offset], c.breaks[i - c.offset + 1]};
    }
  }
  throw DomainError("boundary_mesh: cell is not an arc");
}

BoundaryMesh::SphereBox BoundaryMesh::sphere_box(std::size_t i) const {
  for (const auto& c : components_) {
    if (c.type != Component::sphere) continue;
    const std::size_t n = std::size_t(c.bands) * c.per_band;
    if (i < c.offset || i >= c.offset + n) continue;
    const std::size_t local = i - c.offset;
    const int b = int(local / c.per_band), l = int(local % c.per_band);
    const double dphi = kTwoPi / c.per_band;
    return {c.center, c.radius, 1.0 - 2.0 * (b + 1) / c.bands, 1.0 - 2.0 * b / c.bands, l * dphi, (l + 1) * dphi};
  }
  throw DomainError("boundary_mesh: cell is not a sphere cell");
}

std::size_t BoundaryMesh::locate(const Vec3& w) const {
  const Component* comp = &components_.front();
  if (components_.size() == 2) {
    const double mid = 0.5 * (components_[0].radius + components_[1].radius);
    comp = norm(w) >= mid ? &components_[0] : &components_[1];
  }
  const Vec3 rel = w - comp->center;
  if (comp->type == Component::sphere) {
    const double zc = std::clamp(rel.z / comp->radius, -1.0, 1.0);
    const int band = std::min(comp->bands - 1, static_cast<int>((1.0 - zc) * comp->bands / 2.0));
    double phi = std::atan2(rel.y, rel.x);
    if (phi < 0.0) phi += kTwoPi;
    const int l = std::min(comp->per_band - 1, static_cast<int>(phi * comp->per_band / kTwoPi));
    return comp->offset + static_cast<std::size_t>(band) * comp->per_band + l;
  }
  const auto& b = comp->breaks;
  const double phi = wrap_angle(std::atan2(rel.y, rel.x), b.front());
  auto it = std::upper_bound(b.begin(), b.end(), phi);
  std::size_t idx = static_cast<std::size_t>(it - b.begin());
  idx = idx == 0 ? 0 : idx - 1;
  idx = std::min(idx, b.size() - 2);
  return comp->offset + idx;
}

}  // namespace sbm
