#include "sbm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>


#include "quadrature.hpp"
#include "sbm/error.hpp"

namespace sbm {

namespace {
constexpr double kPi = std::numbers::pi;
}

double green_envelope(const Domain& D, const Vec3& x, const Vec3& y) {
  const double dx = D.dist_to_complement(x), dy = D.dist_to_complement(y);
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("green_envelope: points must lie in D");
  const double r2 = norm2(x - y);
  if (r2 == 0.0) return std::numeric_limits<double>::infinity();
  const double q = dx * dy / r2;
  if (D.dim() == 2) return std::log1p(q);
  return std::pow(r2, 0.5 * (2 - D.dim())) * std::min(1.0, q);
}

double martin_surrogate(const Domain& D, const Vec3& x, const Vec3& z) {
  return D.dist_to_complement(x) / std::pow(distance(x, z), D.dim());
}

double ball_poisson_kernel(const Domain& ball, const Vec3& x, const Vec3& z) {
  if (ball.kind() != DomainKind::ball) throw DomainError("ball_poisson_kernel: needs a ball");
  const double R = ball.radius();
  return (R * R - norm2(x - ball.center())) / (unit_sphere_area(ball.dim()) * R * std::pow(distance(x, z), ball.dim()));
}

double disk_arc_harmonic_measure(const Domain& disk, const Vec3& x, double a, double b) {
  if (disk.kind() != DomainKind::ball || disk.dim() != 2) throw DomainError("arc harmonic measure: needs a disk");
  const double len = b - a;
  if (len >= 2 * kPi) return 1.0;
  if (len <= 0.0) return 0.0;
  const Vec3 u0 = (x - disk.center()) * (1.0 / disk.radius());
  // Counter-clockwise angle at x from e^{ia} to e^{ib}; ω = angle/π − (b − a)/(2π).
  const Vec3 u = polar(1.0, a) - u0;
  const Vec3 w = polar(2.0 * std::sin(0.5 * len), 0.5 * (a + b) + 0.5 * kPi);
  const Vec3 v = u + w;
  double angle = std::atan2(u.x * w.y - u.y * w.x, dot(u, v));
  if (angle < 0.0) angle += 2 * kPi;
  return std::clamp(angle / kPi - len / (2 * kPi), 0.0, 1.0);
}

double ball_poisson_cell_mean(const BoundaryMesh& mesh, const Vec3& x, std::size_t cell) {
  const Domain& D = mesh.domain();
  if (D.kind() != DomainKind::ball) throw DomainError("ball_poisson_cell_mean: needs a ball mesh");
  if (D.dim() == 2) {
    const auto [a, b] = mesh.arc(cell);
    return disk_arc_harmonic_measure(D, x, a, b) / mesh[cell].measure;
  }
  const auto box = mesh.sphere_box(cell);
  // polar angle keeps the integrand smooth at the caps (z = cos θ, dσ = sin θ dθ dφ)
  const auto point = [&](double th, double phi) {
    const double s = std::sin(th);
    return box.center + Vec3{s * std::cos(phi), s * std::sin(phi), std::cos(th)} * box.radius;
  };
  const auto inner = [&](double th) {
    return std::sin(th) * detail::integrate_smooth(
                              "poisson cell (phi)", [&](double phi) { return ball_poisson_kernel(D, x, point(th, phi)); },
                              box.phi_lo, box.phi_hi, 1e-12);
  };
  const double th_lo = std::acos(std::clamp(box.z_hi, -1.0, 1.0));
  const double th_hi = std::acos(std::clamp(box.z_lo, -1.0, 1.0));
  const double integral = detail::integrate_smooth("poisson cell (theta)", inner, th_lo, th_hi, 1e-10);
  return integral * box.radius * box.radius / mesh[cell].measure;
}

BoundaryDensityResult boundary_density(const Domain& D, const JumpKernel& k, const Vec3& x, const BoundaryMesh& mesh,
                                       std::uint64_t n, const PathConfig& cfg, const RunOptions& opt) {
  if (n < 10000) throw ConfigError("boundary_density: need n >= 10^4");
  struct Acc {
    std::vector<std::uint64_t> hits;
    PathCounts counts;
  };
  const Acc acc = collect_exits(
      D, k, x, n, cfg, opt, [&] { return Acc{std::vector<std::uint64_t>(mesh.size(), 0), {}}; },
      [&](Acc& a, const ExitRecord& r) {
        a.counts.record(r);
        if (r.type == ExitType::boundary) ++a.hits[mesh.locate(r.exit_point)];
      },
      [](Acc& a, const Acc& b) {
        for (std::size_t i = 0; i < a.hits.size(); ++i) a.hits[i] += b.hits[i];
        a.counts += b.counts;
      });
  const std::uint64_t n_eff = acc.counts.boundary + acc.counts.jump;
  if (n_eff == 0) throw InsufficientSamples("boundary_density: every path was censored");
  std::vector<Vec3> centers;
  std::vector<double> measures;
  for (const auto& c : mesh.cells()) {
    centers.push_back(c.center);
    measures.push_back(c.measure);
  }
  BoundaryDensityResult res{KernelGrid(std::move(centers), std::move(measures)), acc.counts, {}};
  for (std::size_t i = 0; i < mesh.size(); ++i) res.density.add_hits(i, acc.hits[i]);
  for (std::uint64_t i = 0; i < acc.counts.jump; ++i) res.density.add_empty_path();
  const double f = double(acc.counts.boundary) / double(n_eff);
  res.F = {f, std::sqrt(f * (1.0 - f) / double(n_eff))};
  return res;
}

EnvelopeStats envelope_ratio_stats(const KernelGrid& P, const Domain& D, const Vec3& x) {
  const double delta = D.dist_to_complement(x);
  if (!(delta > 0.0)) throw DomainError("envelope_ratio_stats: x must lie in D");
  EnvelopeStats s;
  s.ratio_min = std::numeric_limits<double>::infinity();
  double mass = 0.0, used_mass = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double v = P.value(i);
    mass += P.mass(i);
    if (!(v > 0.0) || !(P.stderr(i) <= 0.2 * v)) continue;
    used_mass += P.mass(i);
    const double rho = v * std::pow(distance(x, P.center(i)), D.dim()) / delta;
    s.ratio_min = std::min(s.ratio_min, rho);
    s.ratio_max = std::max(s.ratio_max, rho);
    ++s.cells_used;
  }
  if (s.cells_used < 2 || used_mass < 0.9 * mass) {
    std::ostringstream msg;
    msg << "envelope_ratio_stats: only " << s.cells_used << " cells with stderr/value <= 0.2 carrying "
        << (mass > 0 ? used_mass / mass : 0.0) << " of the mass (need >= 0.9)";
    throw InsufficientSamples(msg.str());
  }
  s.spread = s.ratio_max / s.ratio_min;
  return s;
}

MartinReport martin_estimate(const Domain& D, const JumpKernel& k, const Vec3& x, const Vec3& z,
                             const std::vector<double>& t_levels, double cell, std::uint64_t n,
                             const PathConfig& cfg, const RunOptions& opt, std::optional<Vec3> x0_opt) {
  if (t_levels.empty()) throw ConfigError("martin_estimate: no t levels");
  for (std::size_t i = 0; i < t_levels.size(); ++i) {
    if (i > 0 && !(t_levels[i] < t_levels[i - 1])) throw ConfigError("martin_estimate: t levels must decrease");
  }
  if (!(t_levels.back() >= 10.0 * cell)) throw ConfigError("martin_estimate: smallest t must be >= 10 cell sizes");
  const Vec3 x0 = x0_opt.value_or(D.center_of_mass());
  const Vec3 nu = D.outer_normal(z);
  std::vector<Vec3> probes;
  for (double t : t_levels) probes.push_back(z - nu * t);

  const OccupationResult gx = occupation_probes(D, k, x, probes, cell, n, cfg, opt.child(1));
  const OccupationResult g0 = x == x0 ? gx : occupation_probes(D, k, x0, probes, cell, n, cfg, opt.child(2));

  MartinReport rep;
  rep.t_levels = t_levels;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double a = gx.green.value(i), b = g0.green.value(i);
    const double sa = gx.green.stderr(i), sb = g0.green.stderr(i);
    if (!(a > 0.0) || !(b > 0.0) || sa > 0.2 * a || sb > 0.2 * b) {
      std::ostringstream msg;
      msg << "martin_estimate: insufficient samples at t=" << t_levels[i] << " (G(x)=" << a << "±" << sa
          << ", G(x0)=" << b << "±" << sb << ")";
      throw InsufficientSamples(msg.str());
    }
    const double r = a / b;
    rep.ratios.push_back(r);
    rep.ratio_stderr.push_back(x == x0 ? 0.0 : r * std::hypot(sa / a, sb / b));
  }
  const std::size_t m = rep.ratios.size();
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < m; ++i) {
    inc = inc && rep.ratios[i] >= rep.ratios[i - 1];
    dec = dec && rep.ratios[i] <= rep.ratios[i - 1];
  }
  rep.monotone = inc || dec;
  if (m == 1) {
    rep.value = rep.ratios[0];
    rep.stderr = rep.ratio_stderr[0];
  } else {
    // Linear extrapolation to t = 0 through the two smallest levels.
    const double t1 = t_levels[m - 2], t2 = t_levels[m - 1];
    const double c2 = t1 / (t1 - t2), c1 = -t2 / (t1 - t2);
    rep.value = c2 * rep.ratios[m - 1] + c1 * rep.ratios[m - 2];
    rep.stderr = std::hypot(c2 * rep.ratio_stderr[m - 1], c1 * rep.ratio_stderr[m - 2]);
  }
  return rep;
}

Estimate poisson_K(const Domain& D, const JumpKernel& k, const KernelGrid& green, const Vec3& z_out, double eps_b) {
  if (D.signed_distance(z_out) >= -eps_b) throw DomainError("poisson_K: singular target (z_out within eps_b of D)");
  Estimate e;
  if (!k.has_jumps()) return e;
  for (std::size_t i = 0; i < green.size(); ++i) {
    const double j = k.jump_density_fast(distance(green.center(i), z_out));
    e.value += green.mass(i) * j;
    const double se = green.stderr(i);
    if (std::isfinite(se)) e.stderr += se * green.measure(i) * j;
  }
  return e;
}

RadialFunction RadialFunction::indicator(Vec3 c, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw ConfigError("RadialFunction: need 0 <= r_lo < r_hi");
  return RadialFunction{c, lo, hi, [](double) { return 1.0; }};
}

double RadialFunction::operator()(const Vec3& z) const {
  const double r = distance(z, center);
  return (r > r_lo && r < r_hi) ? profile(r) : 0.0;
}

void RadialFunction::check_exterior(const Domain& D, double eps_b) const {
  // Bounding ball of D.
  const Vec3 c = D.kind() == DomainKind::ball ? D.center() : Vec3{};
  const double R = 0.5 * D.diameter();
  const double s = distance(c, center);
  const bool encloses = r_lo >= s + R + eps_b;
  const bool disjoint = r_hi + eps_b <= s - R;
  if (!encloses && !disjoint)
    throw ConfigError("test function support must stay at distance > eps_b outside the domain");
}

namespace {

// ∫_{S^{d−1}} j(|s e₁ − ρ θ|) dθ.
double sphere_average_j(const JumpKernel& k, double s, double rho) {
  const auto j = [&](double r2) { return k.jump_density_fast(std::sqrt(std::max(r2, 1e-300))); };
  if (s == 0.0) return unit_sphere_area(k.dim()) * k.jump_density_fast(rho);
  if (k.dim() == 2) {
    return 2.0 * detail::integrate_smooth(
                     "sphere average", [&](double p) { return j(s * s + rho * rho - 2 * s * rho * std::cos(p)); },
                     0.0, kPi, 1e-8, 8);
  }
  return 2.0 * kPi *
         detail::integrate_smooth(
             "sphere average", [&](double u) { return j(s * s + rho * rho - 2 * s * rho * u); }, -1.0, 1.0, 1e-8, 8);
}

}  // namespace

JumpIntensityTable::JumpIntensityTable(const JumpKernel& k, const RadialFunction& f, double s_lo, double s_hi,
                                       double r_trunc, int points)
    : k_(&k), f_(f), s_lo_(s_lo), s_hi_(s_hi), r_trunc_(r_trunc) {
  if (points < 8 || !(s_hi > s_lo)) throw ConfigError("JumpIntensityTable: bad range");
  values_.resize(points);
  for (int i = 0; i < points; ++i) values_[i] = exact(s_lo + (s_hi - s_lo) * i / (points - 1));
  spline_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      values_.begin(), values_.end(), s_lo, (s_hi - s_lo) / (points - 1));
}

double JumpIntensityTable::exact(double s) const {
  if (!k_->has_jumps()) return 0.0;
  const double hi = std::min(f_.r_hi, r_trunc_);
  const int d = k_->dim();
  const auto g = [&](double rho) { return f_.profile(rho) * std::pow(rho, d - 1) * sphere_average_j(*k_, s, rho); };
  // Split at ρ = s where the integrand peaks for ball-shaped supports.
  double total = 0.0;
  if (f_.r_lo < s && s < hi) {
    total += detail::integrate_smooth("jump intensity", g, f_.r_lo, s, 1e-7, 10);
    total += detail::integrate_smooth("jump intensity", g, s, hi, 1e-7, 10);
  } else {
    total = detail::integrate_smooth("jump intensity", g, f_.r_lo, hi, 1e-7, 10);
  }
  return total;
}

double JumpIntensityTable::operator()(double s) const {
  return (*spline_)(std::clamp(s, s_lo_, s_hi_));
}

LevySystemResult levy_system_check(const Domain& D, const JumpKernel& k, const Vec3& x, const RadialFunction& f,
                                   std::uint64_t n, const PathConfig& cfg, const RunOptions& opt) {
  const double eps_b = cfg.eps_b > 0.0 ? cfg.eps_b : 1e-4 * D.diameter();
  f.check_exterior(D, eps_b);
  LevySystemResult res;

  const auto fz = [&](const Vec3& z) { return f(z); };
  const FunctionalEstimate mc = exit_functional(D, k, x, fz, ExitClass::jump, n, cfg, opt.child(1));
  res.mc = mc.est;
  res.mc_counts = mc.counts;

  // Range of s = |y − f.center| over y ∈ D.
  const Vec3 c = D.kind() == DomainKind::ball ? D.center() : Vec3{};
  const double R = 0.5 * D.diameter();
  const double s_lo = std::max(0.0, distance(c, f.center) - R);
  const double s_hi = distance(c, f.center) + R;

  double r_trunc = f.r_hi;
  if (!std::isfinite(r_trunc) && k.has_jumps()) {
    // Truncate where sup|f|·Λ(r − s_hi) ≤ 1% of the smallest untruncated intensity.
    r_trunc = std::max(2.0 * f.r_lo, s_hi + 1.0);
    for (;;) {
      const RadialFunction abs_f{f.center, f.r_lo, r_trunc, [&](double r) { return std::abs(f.profile(r)); }};
      const JumpIntensityTable probe(k, abs_f, s_lo, s_hi, r_trunc, 9);
      double inf_F = std::numeric_limits<double>::infinity();
      double sup_f = 0.0;
      for (int i = 0; i < 9; ++i) inf_F = std::min(inf_F, probe.exact(s_lo + (s_hi - s_lo) * i / 8.0));
      for (int i = 0; i <= 64; ++i) sup_f = std::max(sup_f, std::abs(f.profile(r_trunc * (1.0 + i / 16.0))));
      const double tail = sup_f * k.tail_mass(r_trunc - s_hi);
      if (tail <= 0.01 * inf_F) break;
      r_trunc *= 2.0;
      if (r_trunc > 1e4 * D.diameter()) {
        std::ostringstream msg;
        msg << "levy_system_check: exterior truncation bound unattainable (needs radius > " << r_trunc << ")";
        throw NumericError(msg.str());
      }
    }
  }
  res.truncation_radius = r_trunc;

  if (k.has_jumps()) {
    const JumpIntensityTable table(k, f, s_lo, s_hi, r_trunc);
    const auto F = [&](const Vec3& y) { return table(distance(y, f.center)); };
    const FunctionalEstimate q = occupation_functional(D, k, x, F, n, cfg, opt.child(2));
    res.quad = q.est;
    res.quad_counts = q.counts;
  }
  const double err = combined_error(res.mc, res.quad);
  const double diff = std::abs(res.mc.value - res.quad.value);
  res.sigma_distance = err > 0.0 ? diff / err : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return res;
}

HarnackResult harnack_check(const Domain& D, const JumpKernel& k, const Vec3& x0, double r,
                            const std::function<double(const Vec3&)>& g, int pair_count, std::uint64_t n,
                            const PathConfig& cfg, const RunOptions& opt) {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("harnack_check: need 0 < r <= 1");
  if (D.dist_to_complement(x0) < r) throw DomainError("harnack_check: B(x0, r) must lie in D");
  if (pair_count < 1) throw ConfigError("harnack_check: need at least one pair");
  const Domain B = Domain::ball(D.dim(), x0, r);
  HarnackResult res;
  Rng rng = make_rng(opt.seed, opt.child(0x4841524eULL).stream, 0);
  while (res.points.size() < std::size_t(2 * pair_count)) {
    Vec3 p{(2 * uniform01(rng) - 1), (2 * uniform01(rng) - 1), D.dim() == 3 ? (2 * uniform01(rng) - 1) : 0.0};
    if (norm2(p) < 1.0) res.points.push_back(x0 + p * (0.5 * r));
  }
  PathConfig c = cfg;
  c.eps_b = cfg.eps_b > 0.0 ? cfg.eps_b : 1e-4 * B.diameter();
  if (c.t_max == 0.0) c = resolve_config(B, k, x0, c, opt);
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto u = exit_functional(B, k, res.points[i], g, ExitClass::all, n, c, opt.child(100 + i));
    res.values.push_back(u.est);
  }
  res.max_ratio = 1.0;
  for (int p = 0; p < pair_count; ++p) {
    const Estimate a = res.values[2 * p], b = res.values[2 * p + 1];
    if (!(a.value > 0.0) || !(b.value > 0.0))
      throw InsufficientSamples("harnack_check: u vanished at a sample point; increase n");
    const double ratio = std::max(a.value / b.value, b.value / a.value);
    if (ratio >= res.max_ratio) {
      res.max_ratio = ratio;
      res.max_ratio_stderr = ratio * std::hypot(a.stderr / a.value, b.stderr / b.value);
    }
  }
  return res;
}

}  // namespace sbm
