#include "sbm/fatou.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sbm/error.hpp"
#include "sbm/parallel.hpp"
#include "sbm/simd.hpp"

namespace sbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

void require_same_mesh(const BoundaryData& a, const BoundaryData& b) {
  a.validate();
  b.validate();
  if (a.mesh.get() != b.mesh.get() && a.size() != b.size()) throw ConfigError("boundary data on different meshes");
}

}  // namespace

// ---------------------------------------------------------------------------

BoundaryData BoundaryData::from_function(std::shared_ptr<const BoundaryMesh> mesh,
                                         const std::function<double(const Vec3&)>& g) {
  if (!mesh) throw ConfigError("BoundaryData: no mesh");
  BoundaryData b{std::move(mesh), {}};
  b.values.reserve(b.mesh->size());
  for (const auto& c : b.mesh->cells()) b.values.push_back(g(c.center));
  b.validate();
  return b;
}

BoundaryData BoundaryData::constant(std::shared_ptr<const BoundaryMesh> mesh, double c) {
  return from_function(std::move(mesh), [c](const Vec3&) { return c; });
}

void BoundaryData::validate() const {
  if (!mesh) throw ConfigError("BoundaryData: no mesh");
  if (values.size() != mesh->size()) throw ConfigError("BoundaryData: one value per mesh cell required");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("BoundaryData: non-finite value");
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

void ConvergenceReport::finish() {
  if (values.empty()) throw ConfigError("ConvergenceReport: empty trace");
  if (stderrs.size() != values.size()) stderrs.resize(values.size(), 0.0);
  limit = values.back();
  limit_stderr = stderrs.back();
  const std::size_t start = values.size() - values.size() / 2 - (values.size() == 1 ? 1 : 0);
  const auto [lo, hi] = std::minmax_element(values.begin() + start, values.end());
  oscillation = *hi - *lo;
  if (!std::isfinite(expected) || limit_stderr > tolerance) {
    verdict = Verdict::inconclusive;
  } else {
    verdict = std::abs(limit - expected) <= tolerance + 3.0 * limit_stderr ? Verdict::pass : Verdict::fail;
  }
}

std::string ConvergenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["target"] = vec_json(target);
  j["path"] = path;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : points) pts.push_back(vec_json(p));
  j["points"] = pts;
  j["depths"] = depths;
  j["values"] = values;
  j["stderr"] = stderrs;
  j["expected"] = number_or_null(expected);
  j["limit"] = limit;
  j["limit_stderr"] = limit_stderr;
  j["oscillation"] = oscillation;
  j["tolerance"] = tolerance;
  j["verdict"] = to_string(verdict);
  return j.dump(2);
}

void ConvergenceReport::write_csv(std::ostream& os) const {
  os << "depth_index,delta,value,stderr\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << i << ',' << (i < depths.size() ? depths[i] : 0.0) << ',' << values[i] << ',' << stderrs[i] << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Fatou traces

FatouTraces fatou_traces(const Domain& D, const JumpKernel& k, std::span<const BoundaryData> gs,
                         const TraceSpec& spec, std::uint64_t n, const PathConfig& cfg, const RunOptions& opt) {
  if (gs.empty()) throw ConfigError("fatou_traces: no boundary data");
  if (spec.depth < 1) throw ConfigError("fatou_traces: depth must be >= 1");
  if (n < 100) throw ConfigError("fatou_traces: need n >= 100 per point");
  const BoundaryMesh& mesh = *gs.front().mesh;
  for (const auto& g : gs) {
    g.validate();
    if (g.size() != mesh.size()) throw ConfigError("fatou_traces: boundary data on different meshes");
  }
  const std::vector<Vec3> points = cone_sequence(D, spec.cone, spec.depth, spec.mode);

  std::ostringstream name;
  name << "cone beta=" << spec.cone.beta << (spec.mode == ConeMode::radial ? " radial" : " zigzag");
  const auto blank = [&](double expected) {
    ConvergenceReport r;
    r.target = spec.cone.z;
    r.path = name.str();
    r.points = points;
    r.expected = expected;
    r.tolerance = spec.tolerance;
    for (const auto& p : points) r.depths.push_back(D.dist_to_complement(p));
    return r;
  };
  const std::size_t zcell = mesh.locate(spec.cone.z);

  FatouTraces out;
  for (const auto& g : gs) {
    out.plain.push_back(blank(g.values[zcell]));
    out.relative.push_back(blank(g.values[zcell]));
  }
  out.F = blank(1.0);

  struct Acc {
    std::vector<std::uint64_t> hits;
    PathCounts counts;
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Acc acc = collect_exits(
        D, k, points[i], n, cfg, opt.child(i + 1), [&] { return Acc{std::vector<std::uint64_t>(mesh.size(), 0), {}}; },
        [&](Acc& a, const ExitRecord& r) {
          a.counts.record(r);
          if (r.type == ExitType::boundary) ++a.hits[mesh.locate(r.exit_point)];
        },
        [](Acc& a, const Acc& b) {
          for (std::size_t j = 0; j < a.hits.size(); ++j) a.hits[j] += b.hits[j];
          a.counts += b.counts;
        });
    out.counts.push_back(acc.counts);
    const double m = double(acc.counts.total - acc.counts.censored);
    if (m < 2) throw InsufficientSamples("fatou_traces: every path was censored");
    const double nb = double(acc.counts.boundary);
    const double F = nb / m;
    out.F.values.push_back(F);
    out.F.stderrs.push_back(std::sqrt(F * (1.0 - F) / (m - 1.0)));

    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
      const auto& v = gs[gi].values;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t j = 0; j < mesh.size(); ++j) {
        s1 += v[j] * double(acc.hits[j]);
        s2 += v[j] * v[j] * double(acc.hits[j]);
      }
      const double u = s1 / m;
      out.plain[gi].values.push_back(u);
      out.plain[gi].stderrs.push_back(std::sqrt(std::max(0.0, s2 - m * u * u) / (m - 1.0) / m));

      if (F < 0.05) out.ratio_unstable = true;
      const double R = nb > 0.0 ? s1 / nb : 0.0;
      double dev = 0.0;
      for (std::size_t j = 0; j < mesh.size(); ++j) dev += double(acc.hits[j]) * (v[j] - R) * (v[j] - R);
      out.relative[gi].values.push_back(R);
      out.relative[gi].stderrs.push_back(nb > 0.0 ? std::sqrt(dev / (m - 1.0) / m) / F
                                                  : std::numeric_limits<double>::infinity());
    }
  }
  out.F.finish();
  for (auto& r : out.plain) r.finish();
  for (auto& r : out.relative) {
    r.finish();
    if (out.ratio_unstable) r.verdict = Verdict::inconclusive;
  }
  return out;
}

ConvergenceReport fatou_trace(const Domain& D, const JumpKernel& k, const BoundaryData& g, const TraceSpec& spec,
                              std::uint64_t n, const PathConfig& cfg, const RunOptions& opt) {
  return fatou_traces(D, k, std::span(&g, 1), spec, n, cfg, opt).plain.front();
}

ConvergenceReport relative_fatou_trace(const Domain& D, const JumpKernel& k, const BoundaryData& g,
                                       const TraceSpec& spec, std::uint64_t n, const PathConfig& cfg,
                                       const RunOptions& opt) {
  FatouTraces t = fatou_traces(D, k, std::span(&g, 1), spec, n, cfg, opt);
  if (t.ratio_unstable) {
    std::ostringstream msg;
    msg << "relative_fatou_trace: F below 0.05 on the trace (min " << *std::min_element(t.F.values.begin(), t.F.values.end())
        << "); the ratio is unstable";
    throw NumericError(msg.str());
  }
  return t.relative.front();
}

// ---------------------------------------------------------------------------
// Maximal inequality

double maximal_constant(double t, int d) { return std::max(std::pow(3.0 * t, d), std::pow(2.0, 3 * d)); }

namespace {

void check_cone_pair(const Domain& D, const Vec3& x, const Vec3& z, double t) {
  const double delta = D.dist_to_complement(x);
  if (!(delta > 0.0)) throw DomainError("maximal_inequality_check: x must lie in D");
  if (std::abs(D.signed_distance(z)) > 1e-9) throw DomainError("maximal_inequality_check: z must lie on the boundary");
  if (distance(x, z) > t * delta * (1.0 + 1e-12)) {
    throw DomainError("maximal_inequality_check: need |x - z| <= t * delta_D(x)");
  }
}

// Cells grouped by distance to z (ties merged): group index per cell and group count.
std::pair<std::vector<int>, int> distance_groups(const BoundaryMesh& mesh, const Vec3& z) {
  const std::size_t m = mesh.size();
  std::vector<std::size_t> order(m);
  std::vector<double> dist(m);
  for (std::size_t i = 0; i < m; ++i) {
    order[i] = i;
    dist[i] = distance(mesh[i].center, z);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<int> group(m);
  int g = -1;
  double last = -1.0;
  for (std::size_t i : order) {
    if (g < 0 || dist[i] > last * (1.0 + 1e-12) + 1e-15) {
      ++g;
      last = dist[i];
    }
    group[i] = g;
  }
  return {group, g + 1};
}

// sup/inf over prefixes; ν(B) = 0 < μ(B) gives +∞ for the sup.
void prefix_ratios(const double* mu, const double* nu, int groups, double& sup, double& inf) {
  double a = 0.0, b = 0.0;
  sup = 0.0;
  inf = std::numeric_limits<double>::infinity();
  for (int g = 0; g < groups; ++g) {
    a += mu[g];
    b += nu[g];
    if (b > 0.0) {
      const double r = a / b;
      sup = std::max(sup, r);
      inf = std::min(inf, r);
    } else if (a > 0.0) {
      sup = std::numeric_limits<double>::infinity();
    }
  }
}

}  // namespace

MaximalResult maximal_inequality_check(const BoundaryData& mu, const BoundaryData& nu, const Domain& D, const Vec3& x,
                                       const Vec3& z, double t) {
  require_same_mesh(mu, nu);
  const BoundaryMesh& mesh = *mu.mesh;
  if (mesh.domain().dim() != D.dim()) throw ConfigError("maximal_inequality_check: mesh dimension differs from D");
  check_cone_pair(D, x, z, t);
  double mass_nu = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.values[i] < 0.0 || nu.values[i] < 0.0) throw ConfigError("maximal_inequality_check: negative measure");
    mass_nu += nu.values[i];
  }
  if (!(mass_nu > 0.0)) throw ConfigError("maximal_inequality_check: nu has no mass");

  MaximalResult res;
  const int d = D.dim();
  // δ_D(x) cancels in the ratio of surrogate integrals
  const double top = inverse_power_sum(x, mesh.xs(), mesh.ys(), mesh.zs(), mu.values, d);
  const double bottom = inverse_power_sum(x, mesh.xs(), mesh.ys(), mesh.zs(), nu.values, d);
  res.mid = top / bottom;

  const auto [group, groups] = distance_groups(mesh, z);
  std::vector<double> gm(groups, 0.0), gn(groups, 0.0);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    gm[group[i]] += mu.values[i];
    gn[group[i]] += nu.values[i];
  }
  prefix_ratios(gm.data(), gn.data(), groups, res.sup_ratio, res.inf_ratio);
  res.C = maximal_constant(t, d);
  res.lhs = res.inf_ratio / res.C;
  res.rhs = res.sup_ratio * res.C;
  res.pass = res.lhs <= res.mid * (1.0 + 1e-12) && res.mid <= res.rhs * (1.0 + 1e-12);
  return res;
}

MaximalSweep maximal_exhaustive(const BoundaryMesh& mesh, std::span<const std::pair<Vec3, Vec3>> xz, double t,
                                int max_atoms, std::span<const double> weights) {
  if (max_atoms < 1 || weights.empty()) throw ConfigError("maximal_exhaustive: need atoms and weights");
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("maximal_exhaustive: weights must be positive");
  }
  const Domain& D = mesh.domain();
  const int m = int(mesh.size());
  const int d = D.dim();

  // sparse measures: up to max_atoms (cell, weight) pairs
  struct Atom {
    int cell;
    double w;
  };
  std::vector<std::vector<Atom>> measures;
  std::vector<Atom> cur;
  const auto grow = [&](auto&& self, int from) -> void {
    if (!cur.empty()) measures.push_back(cur);
    if (int(cur.size()) == max_atoms) return;
    for (int c = from; c < m; ++c) {
      for (double w : weights) {
        cur.push_back({c, w});
        self(self, c + 1);
        cur.pop_back();
      }
    }
  };
  grow(grow, 0);

  MaximalSweep out;
  out.geometry_pairs = xz.size();
  const double C = maximal_constant(t, d);
  const std::size_t nm = measures.size();
  std::vector<double> K(m);
  std::vector<double> kint(nm);
  for (const auto& [x, z] : xz) {
    check_cone_pair(D, x, z, t);
    for (int i = 0; i < m; ++i) K[i] = std::pow(distance(x, mesh[i].center), -d);
    const auto [group, groups] = distance_groups(mesh, z);
    std::vector<double> gmass(nm * groups, 0.0);
    for (std::size_t a = 0; a < nm; ++a) {
      double s = 0.0;
      for (const Atom& at : measures[a]) {
        s += at.w * K[at.cell];
        gmass[a * groups + group[at.cell]] += at.w;
      }
      kint[a] = s;
    }
    for (std::size_t a = 0; a < nm; ++a) {
      for (std::size_t b = 0; b < nm; ++b) {
        double sup, inf;
        prefix_ratios(&gmass[a * groups], &gmass[b * groups], groups, sup, inf);
        const double mid = kint[a] / kint[b];
        const double upper = mid / (sup * C);
        const double lower = (inf / C) / mid;
        out.worst_upper = std::max(out.worst_upper, upper);
        out.worst_lower = std::max(out.worst_lower, lower);
        if (upper > 1.0 + 1e-12 || lower > 1.0 + 1e-12) ++out.failures;
        ++out.instances;
      }
    }
  }
  return out;
}

std::vector<std::pair<Vec3, Vec3>> cone_grid_pairs(const Domain& D, std::span<const Vec3> zs, double t, double h) {
  if (!(h > 0.0)) throw ConfigError("cone_grid_pairs: spacing must be positive");
  const double half = 0.5 * D.diameter();
  const Vec3 c = D.center();
  const int steps = int(std::floor(2.0 * half / h));
  std::vector<std::pair<Vec3, Vec3>> out;
  for (const Vec3& z : zs) {
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        for (int l = 0; l <= (D.dim() == 3 ? steps : 0); ++l) {
          const Vec3 x = c + Vec3{-half + i * h, -half + j * h, D.dim() == 3 ? -half + l * h : 0.0};
          const double delta = D.dist_to_complement(x);
          if (delta > 0.0 && distance(x, z) <= t * delta) out.emplace_back(x, z);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GBoundResult G_boundedness_check(const BoundaryMesh& mesh, std::span<const Vec3> xs) {
  const Domain& D = mesh.domain();
  if (xs.empty()) throw ConfigError("G_boundedness_check: no points");
  GBoundResult res;
  res.min_value = std::numeric_limits<double>::infinity();
  for (const Vec3& x : xs) {
    const double delta = D.dist_to_complement(x);
    if (!(delta > 0.0)) throw DomainError("G_boundedness_check: points must lie in D");
    if (mesh.max_cell_diameter() > delta / 4.0) {
      std::ostringstream msg;
      msg << "G_boundedness_check: mesh cells (" << mesh.max_cell_diameter() << ") exceed delta/4 = " << delta / 4.0
          << "; refine the mesh";
      throw ConfigError(msg.str());
    }
    const double v = delta * inverse_power_sum(x, mesh.xs(), mesh.ys(), mesh.zs(), mesh.measures(), D.dim());
    res.deltas.push_back(delta);
    res.values.push_back(v);
    res.min_value = std::min(res.min_value, v);
    res.max_value = std::max(res.max_value, v);
  }
  return res;
}

std::vector<Vec3> radial_points(const Domain& D, const Vec3& z, double delta0, int count) {
  if (count < 1 || !(delta0 > 0.0)) throw ConfigError("radial_points: need count >= 1 and delta0 > 0");
  const Vec3 nu = D.outer_normal(z);
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) out.push_back(z - nu * std::ldexp(delta0, -i));
  return out;
}

LocalityReport exit_locality_check(const Domain& D, const JumpKernel& k, const Vec3& z, double r,
                                   std::span<const Vec3> xs, std::uint64_t n, const PathConfig& cfg,
                                   const RunOptions& opt, double slope_min) {
  if (!(r > 0.0 && r < D.r0())) throw DomainError("exit_locality_check: need 0 < r < R0");
  if (xs.size() < 2) throw ConfigError("exit_locality_check: need at least two points");
  LocalityReport rep;
  const auto far = [&](const Vec3& w) { return distance(w, z) >= r ? 1.0 : 0.0; };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rep.deltas.push_back(D.dist_to_complement(xs[i]));
    rep.q.push_back(exit_functional(D, k, xs[i], far, ExitClass::boundary, n, cfg, opt.child(i + 1)).est);
  }
  rep.decreasing = true;
  for (std::size_t i = 0; i + 1 < rep.q.size(); ++i) {
    if (!(rep.q[i].value - rep.q[i + 1].value > combined_error(rep.q[i], rep.q[i + 1]))) rep.decreasing = false;
  }
  // weighted least squares of log q on log δ over points above the noise floor
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < rep.q.size(); ++i) {
    const auto& q = rep.q[i];
    if (!(q.value > 3.0 * q.stderr) || !(q.stderr > 0.0)) continue;
    const double w = (q.value / q.stderr) * (q.value / q.stderr);
    const double lx = std::log(rep.deltas[i]), ly = std::log(q.value);
    sw += w;
    sx += w * lx;
    sy += w * ly;
    sxx += w * lx * lx;
    sxy += w * lx * ly;
    ++used;
  }
  if (used < 2) {
    rep.verdict = Verdict::inconclusive;
    return rep;
  }
  const double det = sw * sxx - sx * sx;
  rep.slope = (sw * sxy - sx * sy) / det;
  rep.slope_stderr = std::sqrt(sw / det);
  rep.verdict = rep.slope >= slope_min && rep.decreasing ? Verdict::pass : Verdict::fail;
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<RepresentationPoint> representation_check(const Domain& D, const JumpKernel& k, const RadialFunction& phi,
                                                      std::span<const Vec3> xs, std::uint64_t n,
                                                      const PathConfig& cfg, const RunOptions& opt,
                                                      double ball_fraction) {
  if (!(ball_fraction > 0.0 && ball_fraction < 1.0)) throw ConfigError("representation_check: ball fraction in (0,1)");
  const PathConfig cd = cfg.resolved(D);
  phi.check_exterior(D, cd.eps_b);
  std::vector<RepresentationPoint> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    RepresentationPoint p;
    p.x = xs[i];
    const double delta = D.dist_to_complement(p.x);
    if (!(delta > 0.0)) throw DomainError("representation_check: points must lie in D");

    const LevySystemResult lev = levy_system_check(D, k, p.x, phi, n, cd, opt.child(2 * i + 1));
    p.direct = lev.mc;
    p.quad = lev.quad;
    const auto& c = lev.mc_counts;
    p.F = double(c.boundary) / double(c.total - c.censored);

    // u(x) = E_x[u(X_τB); τB < τD] + E_x[φ(X_τB); τB = τD], u(X_τB) sampled by a continued path
    const Domain B = Domain::ball(D.dim(), p.x, ball_fraction * delta);
    const RunningSum acc = run_blocks(
        n, opt.child(2 * i + 2), [] { return RunningSum{}; },
        [&](Rng& rng, RunningSum& a) {
          const ExitRecord rb = simulate_exit(B, k, p.x, cd, rng);
          if (rb.type == ExitType::censored) return;
          const double sd = D.signed_distance(rb.exit_point);
          if (sd > cd.eps_b) {
            const ExitRecord rd = simulate_exit(D, k, rb.exit_point, cd, rng);
            if (rd.type == ExitType::censored) return;
            a.add(rd.type == ExitType::jump ? phi(rd.exit_point) : 0.0);
          } else {
            a.add(sd < -cd.eps_b ? phi(rb.exit_point) : 0.0);
          }
        },
        [](RunningSum& a, const RunningSum& b) { a += b; });
    if (acc.count < 2) throw InsufficientSamples("representation_check: every path was censored");
    p.two_step = {acc.mean(), acc.stderr_of_mean()};

    const auto sigma = [](const Estimate& a, const Estimate& b) {
      const double e = combined_error(a, b), diff = std::abs(a.value - b.value);
      return e > 0.0 ? diff / e : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    };
    p.sigma_quad = sigma(p.direct, p.quad);
    p.sigma_two_step = sigma(p.direct, p.two_step);
    p.pass = p.sigma_quad <= 3.0 && p.sigma_two_step <= 3.0;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tangential counterexample

LittlewoodArcs::LittlewoodArcs(int k_max, long base, std::vector<double> phases)
    : k_max_(k_max), base_(base), phases_(std::move(phases)) {
  if (k_max < 1 || k_max > 30) throw ConfigError("LittlewoodArcs: k_max must lie in [1, 30]");
  if (base < 1 || base > (1L << 40)) throw ConfigError("LittlewoodArcs: base out of range");
  if (int(phases_.size()) != k_max) throw ConfigError("LittlewoodArcs: one phase per level");
}

LittlewoodArcs LittlewoodArcs::make(int k_max, long base) {
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> ph;
  for (int k = 1; k <= k_max; ++k) {
    const double frac = k * golden - std::floor(k * golden);
    ph.push_back(frac * 2.0 * (kPi / double(base)) * std::ldexp(1.0, -k));
  }
  return LittlewoodArcs(k_max, base, std::move(ph));
}

double LittlewoodArcs::lambda0() const { return kPi / double(base_); }
double LittlewoodArcs::lambda(int k) const { return std::ldexp(lambda0(), -k); }
long LittlewoodArcs::frequency(int k) const { return base_ << k; }

namespace {

// N(θ − ψ) reduced to [0, 2π), reducing θ − ψ by whole periods first
double level_phase(long N, double psi, double theta) {
  const double period = kTwoPi / double(N);
  double a = theta - psi;
  a -= std::floor(a / period) * period;
  double ph = double(N) * a;
  ph = std::fmod(ph, kTwoPi);
  return ph < 0.0 ? ph + kTwoPi : ph;
}

}  // namespace

double LittlewoodArcs::boundary_value(double theta) const {
  double u = 0.0;
  for (int k = 1; k <= k_max_; ++k) {
    const double ph = level_phase(frequency(k), phases_[k - 1], theta);
    if (ph > 0.0 && ph < kPi) u += std::ldexp(1.0, -k);
  }
  return u;
}

double half_circle_measure(double delta, double phi) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("half_circle_measure: need 0 < delta <= 1");
  const double rho = 1.0 - delta;
  return 0.5 + std::atan2(2.0 * rho * std::sin(phi), delta * (2.0 - delta)) / kPi;
}

double LittlewoodArcs::poisson(double delta, double theta) const {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("LittlewoodArcs::poisson: need 0 < delta < 1");
  double u = 0.0;
  const double l = std::log1p(-delta);
  for (int k = 1; k <= k_max_; ++k) {
    const long N = frequency(k);
    const double dN = -std::expm1(double(N) * l);  // 1 − (1 − δ)^N
    u += std::ldexp(1.0, -k) * half_circle_measure(dN, level_phase(N, phases_[k - 1], theta));
  }
  return u;
}

std::vector<double> LittlewoodArcs::breakpoints() const {
  std::vector<double> b;
  for (int k = 1; k <= k_max_; ++k) {
    const long cnt = 2 * frequency(k);
    if (cnt > (1L << 22)) throw ConfigError("LittlewoodArcs::breakpoints: too many arcs for a mesh");
    for (long m = 0; m < cnt; ++m) {
      double a = phases_[k - 1] + double(m) * lambda(k);
      a = std::fmod(a, kTwoPi);
      b.push_back(a < 0.0 ? a + kTwoPi : a);
    }
  }
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double v : b) {
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  }
  if (out.size() > 1 && out.front() + kTwoPi - out.back() <= 1e-12) out.pop_back();
  return out;
}

BoundaryData counterexample_data(const LittlewoodArcs& arcs, std::shared_ptr<const BoundaryMesh> mesh) {
  if (!mesh) throw ConfigError("counterexample_data: no mesh");
  const Domain& D = mesh->domain();
  if (D.kind() != DomainKind::ball || D.dim() != 2) throw DomainError("counterexample: needs a disk");
  const double finest = arcs.lambda(arcs.k_max()) * D.radius();
  if (mesh->max_cell_diameter() > finest * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "counterexample: mesh cells (" << mesh->max_cell_diameter() << ") coarser than the finest arc (" << finest
        << "); refine the mesh";
    throw ConfigError(msg.str());
  }
  return BoundaryData::from_function(mesh, [&](const Vec3& w) {
    const Vec3 u = w - D.center();
    return arcs.boundary_value(std::atan2(u.y, u.x));
  });
}

double mesh_poisson(const BoundaryData& U, const Vec3& x) {
  U.validate();
  const BoundaryMesh& mesh = *U.mesh;
  const Domain& D = mesh.domain();
  double s = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (U.values[i] == 0.0) continue;
    const auto [a, b] = mesh.arc(i);
    s += U.values[i] * disk_arc_harmonic_measure(D, x, a, b);
  }
  return s;
}

double surrogate_ratio(const BoundaryData& U, const Vec3& x) {
  U.validate();
  const BoundaryMesh& mesh = *U.mesh;
  const Domain& D = mesh.domain();
  const double delta = D.dist_to_complement(x);
  if (!(delta > 0.0)) throw DomainError("surrogate_ratio: x must lie in D");
  if (mesh.max_cell_diameter() > delta / 4.0) throw ConfigError("surrogate_ratio: mesh too coarse for this depth");
  std::vector<double> w(mesh.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = U.values[i] * mesh[i].measure;
  const int d = D.dim();
  return inverse_power_sum(x, mesh.xs(), mesh.ys(), mesh.zs(), w, d) /
         inverse_power_sum(x, mesh.xs(), mesh.ys(), mesh.zs(), mesh.measures(), d);
}

std::vector<double> counterexample_offsets(const LittlewoodArcs& arcs, int points) {
  if (points < 4) throw ConfigError("counterexample: need at least 4 depth points");
  const int tail = points / 2;
  const double sa = 1.5 * arcs.lambda0();
  const double se = arcs.lambda0() / 1024.0;
  const double q = std::pow(se / sa, 1.0 / (tail - 1));
  std::vector<double> s(points);
  for (int i = 0; i < points; ++i) s[i] = sa * std::pow(q, i - (points - tail));
  return s;
}

CounterexampleResult littlewood_counterexample(const LittlewoodArcs& arcs, std::span<const double> thetas,
                                               const CounterexampleOptions& opt) {
  if (thetas.empty()) throw ConfigError("counterexample: no angles");
  if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) throw ConfigError("counterexample: gamma must lie in (0,1)");
  const Domain disk = Domain::unit_ball(2);
  const std::vector<double> s_all = counterexample_offsets(arcs, opt.points);
  std::vector<double> s, depths;
  for (double v : s_all) {
    const double delta = std::pow(v, 1.0 / opt.gamma);
    if (opt.mode == CounterexampleMode::monte_carlo && (delta < opt.mc_min_delta || delta > 0.5)) continue;
    if (!(delta < 1.0)) throw ConfigError("counterexample: depth list leaves the disk; increase the base");
    s.push_back(v);
    depths.push_back(delta);
  }
  if (s.size() < 2) throw ConfigError("counterexample: fewer than two usable depths");
  const bool mc = opt.mode == CounterexampleMode::monte_carlo;
  if (mc && (!opt.kernel || opt.n < 100)) throw ConfigError("counterexample: monte_carlo mode needs a kernel and n");

  CounterexampleResult res;
  res.thetas.assign(thetas.begin(), thetas.end());
  std::size_t tangential_hits = 0;
  res.radial_ok = true;
  res.dichotomy = true;
  std::size_t job = 0;
  for (double theta : thetas) {
    std::ostringstream rn, tn;
    rn << "radial theta=" << theta;
    tn << "tangential theta=" << theta << " gamma=" << opt.gamma;
    ConvergenceReport rad, tan;
    rad.target = tan.target = polar(1.0, theta);
    rad.path = rn.str();
    tan.path = tn.str();
    rad.depths = tan.depths = depths;
    tan.points = tangential_curve(disk, theta, opt.gamma, depths);
    for (std::size_t i = 0; i < s.size(); ++i) {
      rad.points.push_back(polar(1.0 - depths[i], theta));
      const double qr = arcs.poisson(depths[i], theta);
      const double qt = arcs.poisson(depths[i], theta + s[i]);
      if (!mc) {
        rad.values.push_back(qr);
        tan.values.push_back(qt);
        continue;
      }
      const auto U = [&](const Vec3& w) { return arcs.boundary_value(std::atan2(w.y, w.x)); };
      for (auto [rep, x, exact] : {std::tuple{&rad, rad.points.back(), qr}, std::tuple{&tan, tan.points[i], qt}}) {
        const auto e = exit_functional(disk, *opt.kernel, x, U, ExitClass::boundary, opt.n, opt.cfg, opt.opt.child(++job));
        rep->values.push_back(e.est.value);
        rep->stderrs.push_back(e.est.stderr);
        if (e.est.stderr > 0.0) {
          res.mc_sigma_max = std::max(res.mc_sigma_max, std::abs(e.est.value - exact) / e.est.stderr);
        }
      }
    }
    rad.expected = arcs.boundary_value(theta);
    rad.tolerance = opt.radial_max;
    tan.tolerance = opt.tangential_min;
    rad.finish();
    tan.finish();
    rad.verdict = rad.oscillation <= opt.radial_max && std::abs(rad.limit - rad.expected) <= opt.radial_max
                      ? Verdict::pass
                      : Verdict::fail;
    tan.verdict = tan.oscillation >= opt.tangential_min ? Verdict::pass : Verdict::fail;
    if (rad.verdict != Verdict::pass) res.radial_ok = false;
    if (tan.verdict == Verdict::pass) ++tangential_hits;
    if (!(rad.oscillation < tan.oscillation)) res.dichotomy = false;
    res.radial.push_back(std::move(rad));
    res.tangential.push_back(std::move(tan));
  }
  res.tangential_fraction = double(tangential_hits) / double(thetas.size());
  res.pass = res.radial_ok && res.tangential_fraction >= opt.tangential_share && res.dichotomy;
  return res;
}

double near_one_depth(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("near_one_depth: eps must lie in (0,1)");
  return std::min(1.0 / kPi, eps / (2.0 * kPi));
}

LemmaNearOneResult lemma_near_one_check(std::span<const double> lambdas, std::span<const double> epsilons,
                                        int j_max) {
  const Domain disk = Domain::unit_ball(2);
  LemmaNearOneResult res;
  for (double lam : lambdas) {
    if (!(lam > 0.0 && lam <= kPi / 2)) throw DomainError("lemma_near_one_check: arc half-width out of range");
    for (double eps : epsilons) {
      const double d = near_one_depth(eps);
      for (int j = 0; j <= j_max; ++j) {
        const double rho = 1.0 - lam * d * std::ldexp(1.0, -j);
        // u/h₁ with both integrals exact: the surrogate ratio of the arc is its harmonic measure
        const double ratio = disk_arc_harmonic_measure(disk, {rho, 0, 0}, -lam, lam);
        const double margin = ratio - (1.0 - eps);
        res.worst_margin = std::min(res.worst_margin, margin);
        if (margin < 0.0 || ratio > 1.0 + 1e-15) ++res.failures;
        ++res.cases;
      }
    }
  }
  return res;
}

}  // namespace sbm
