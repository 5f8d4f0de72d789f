#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "sbm/bernstein.hpp"
#include "sbm/error.hpp"
#include "sbm/fatou.hpp"
#include "sbm/kernels.hpp"
#include "sbm/levy.hpp"
#include "sbm/pathsim.hpp"

namespace sbm::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kPilotTag = 0x70696c6fULL;

constexpr std::string_view kNames[] = {"exit-stats", "green",          "boundary-density", "levy-system",
                                       "fatou",      "relative-fatou", "maximal",          "g-bound",
                                       "locality",   "representation", "counterexample",   "harnack",
                                       "condition-check"};

// Runs f, turning library validation errors into a config error on `key`.
template <class F>
auto checked(const Config& c, const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    c.fail(key, e.what());
  } catch (const DomainError& e) {
    c.fail(key, e.what());
  }
}

Domain make_domain(const Config& c) {
  const std::string kind = c.text("domain.kind");
  if (kind == "ball") {
    const long d = c.integer("domain.dim");
    if (d != 2 && d != 3) c.fail("domain.dim", "must be 2 or 3");
    const Vec3 center = c.point("domain.center");
    if (d == 2 && center.z != 0.0) c.fail("domain.center", "third coordinate must be 0 in 2-d");
    const double r = c.real("domain.radius");
    return checked(c, "domain.radius", [&] { return Domain::ball(int(d), center, r); });
  }
  if (kind == "annulus") {
    const long d = c.integer("domain.dim");
    if (d != 2 && d != 3) c.fail("domain.dim", "must be 2 or 3");
    const double r = c.real("domain.inner_radius");
    return checked(c, "domain.inner_radius", [&] { return Domain::annulus(int(d), r); });
  }
  if (kind == "perturbed_disk") {
    if (c.explicitly_set("domain.dim") && c.integer("domain.dim") != 2) c.fail("domain.dim", "perturbed_disk is 2-d");
    const double eps = c.real("domain.eps");
    const long k = c.integer("domain.wavenumber");
    return checked(c, "domain.eps", [&] { return Domain::perturbed_disk(eps, int(k)); });
  }
  c.fail("domain.kind", "unknown domain kind '" + kind + "'");
}

Subordinator make_subordinator(const Config& c) {
  const Family f = checked(c, "process.family", [&] { return parse_family(c.text("process.family")); });
  switch (f) {
    case Family::brownian_only:
      return Subordinator::brownian_only();
    case Family::stable_mixture: {
      const double a = c.real("process.alpha");
      return checked(c, "process.alpha", [&] { return Subordinator::stable_mixture(a); });
    }
    case Family::geometric_stable: {
      const double a = c.real("process.alpha");
      return checked(c, "process.alpha", [&] { return Subordinator::geometric_stable(a); });
    }
    case Family::mixed_stable: {
      const double a = c.real("process.alpha");
      const double b = c.real("process.beta");
      return checked(c, "process.beta", [&] { return Subordinator::mixed_stable(a, b); });
    }
    case Family::relativistic: {
      const double a = c.real("process.alpha");
      const double m = c.real("process.mass");
      return checked(c, "process.mass", [&] { return Subordinator::relativistic(a, m); });
    }
  }
  c.fail("process.family", "unsupported family");
}

struct Setup {
  Domain D;
  std::shared_ptr<const JumpKernel> k;
  PathConfig raw;  // as configured (t_max, eps_b may be 0)
  PathConfig cfg;  // eps_b resolved
  RunOptions opt;
  std::uint64_t n = 0;
};

Setup make_setup(const Config& c) {
  Setup s{make_domain(c), nullptr, {}, {}, {}, 0};
  const Subordinator sub = make_subordinator(c);
  PathConfig p;
  p.h = c.real("path.h");
  p.eps_b = c.real("path.eps_b");
  p.delta_cut = c.real("path.delta_cut");
  if (p.delta_cut == 0.0) p.delta_cut = 1e-2 * s.D.diameter();
  p.t_max = c.real("path.t_max");
  p.refine = c.real("path.refine");
  checked(c, "path.h", [&] {
    p.validate();
    return 0;
  });
  s.raw = p;
  s.cfg = p.resolved(s.D);
  s.k = checked(c, "path.delta_cut", [&] { return std::make_shared<const JumpKernel>(sub, s.D.dim(), p.delta_cut); });
  s.opt.seed = c.count("seed");
  const long lanes = c.integer("lanes");
  if (lanes < 1 || lanes > 1024) c.fail("lanes", "must be in 1..1024");
  s.opt.lanes = int(lanes);
  s.n = c.count("n");
  return s;
}

Vec3 inside(const Config& c, const Setup& s, const std::string& key, const Vec3& p) {
  if (s.D.dim() == 2 && p.z != 0.0) c.fail(key, "third coordinate must be 0 in 2-d");
  if (!s.D.contains(p)) c.fail(key, "point lies outside the domain");
  return p;
}

Vec3 inside_point(const Config& c, const Setup& s, const std::string& key) { return inside(c, s, key, c.point(key)); }

std::vector<Vec3> inside_points(const Config& c, const Setup& s, const std::string& key) {
  auto ps = c.points(key);
  for (const auto& p : ps) inside(c, s, key, p);
  return ps;
}

// A point of the (outer) boundary in direction θ from the center.
Vec3 boundary_point(const Domain& D, double theta) {
  switch (D.kind()) {
    case DomainKind::ball:
      return D.center() + polar(D.radius(), theta);
    case DomainKind::annulus:
      return polar(1.0, theta);
    case DomainKind::perturbed_disk:
      return polar(D.profile(theta), theta);
  }
  return {};
}

// An interior point well away from the boundary (pilot runs start here).
Vec3 reference_point(const Domain& D) {
  if (D.kind() == DomainKind::annulus) return polar(0.5 * (1.0 + D.inner_radius()), 0.0);
  return D.center();
}

bool unit_ball_at_origin(const Domain& D) {
  return D.kind() == DomainKind::ball && D.radius() == 1.0 && D.center() == Vec3{};
}

// cfg with t_max from the config or a pilot run at x0; recorded in the results.
PathConfig timed(const Setup& s, const Vec3& x0, json& where) {
  PathConfig c = s.cfg;
  if (c.t_max == 0.0) {
    c = resolve_config(s.D, *s.k, x0, c, s.opt.child(kPilotTag));
    where["t_max_pilot"] = c.t_max;
  }
  return c;
}

json point_json(const Setup& s, const Vec3& p) { return vec_json(p, s.D.dim()); }

RadialFunction shell(const Config& c, const Setup& s, const std::string& sec) {
  const Vec3 center = c.point(sec + ".center");
  const double lo = c.real(sec + ".r_lo");
  const double hi = c.real(sec + ".r_hi");
  if (!(lo >= 0.0 && hi > lo)) c.fail(sec + ".r_hi", "need 0 <= r_lo < r_hi");
  RadialFunction f = RadialFunction::indicator(center, lo, hi);
  checked(c, sec + ".r_lo", [&] {
    f.check_exterior(s.D, s.cfg.eps_b);
    return 0;
  });
  return f;
}

// ---------------------------------------------------------------------------

Job exit_stats(const Config& c) {
  const Setup s = make_setup(c);
  const auto xs = inside_points(c, s, "exit.points");
  const bool increasing = c.boolean("exit.increasing");
  const double F_min = c.real("exit.F_min");
  if (F_min < 0.0 || F_min > 1.0) c.fail("exit.F_min", "must be in [0, 1]");
  return [=](RunOutput& out) {
    CsvText csv;
    csv.os() << "point,x,y,z,delta,n,boundary,jump,censored,F,F_stderr,mean_exit_time,exit_time_stderr,t_max\n";
    json points = json::array();
    std::vector<Estimate> Fs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      json row;
      row["x"] = point_json(s, xs[i]);
      row["delta"] = s.D.dist_to_complement(xs[i]);
      const PathConfig cfg = timed(s, xs[i], row);
      const auto f = estimate_F(s.D, *s.k, xs[i], s.n, cfg, s.opt.child(i + 1));
      out.add_counts(f.counts);
      const Estimate tau{f.counts.exit_time.mean(), f.counts.exit_time.stderr_of_mean()};
      row["F"] = estimate_json(f.est);
      row["mean_exit_time"] = estimate_json(tau);
      row["counts"] = counts_json(f.counts);
      csv.os() << i << ',' << xs[i].x << ',' << xs[i].y << ',' << xs[i].z << ',' << s.D.dist_to_complement(xs[i])
               << ',' << f.counts.total << ',' << f.counts.boundary << ',' << f.counts.jump << ','
               << f.counts.censored << ',' << f.est.value << ',' << f.est.stderr << ',' << tau.value << ','
               << tau.stderr << ',' << cfg.t_max << '\n';
      const std::string tag = "point_" + std::to_string(i);
      if (!s.k->has_jumps()) {
        out.verdict(tag + "_F_is_one", f.est.value == 1.0 && f.counts.censored == 0);
        if (s.D.kind() == DomainKind::ball) {
          const double R = s.D.radius();
          const double oracle = (R * R - norm2(xs[i] - s.D.center())) / (2.0 * s.D.dim());
          row["mean_exit_time_oracle"] = oracle;
          row["mean_exit_time_sigma"] = std::abs(tau.value - oracle) / tau.stderr;
          out.verdict(tag + "_mean_exit_time", std::abs(tau.value - oracle) <= 3.0 * tau.stderr);
        }
      }
      Fs.push_back(f.est);
      points.push_back(row);
    }
    out.results()["points"] = points;
    out.write_figure("exit_stats.csv", csv.str());
    out.key_number("F", Fs.front().value);
    if (increasing) {
      bool ok = Fs.size() >= 2;
      json gaps = json::array();
      for (std::size_t i = 1; i < Fs.size(); ++i) {
        const double sig = (Fs[i].value - Fs[i - 1].value) / combined_error(Fs[i], Fs[i - 1]);
        gaps.push_back(num(sig));
        ok = ok && sig > 3.0;
      }
      out.results()["increase_sigma"] = gaps;
      out.verdict("F_increasing", ok);
    }
    if (F_min > 0.0) out.verdict("F_last_at_least_min", Fs.back().value >= F_min);
  };
}

Job green(const Config& c) {
  const Setup s = make_setup(c);
  const Vec3 x = inside_point(c, s, "x");
  const long per_axis = c.integer("green.grid");
  const long sub = c.integer("green.subsamples");
  if (per_axis < 4 || per_axis > 2000) c.fail("green.grid", "must be in 4..2000");
  if (sub < 1 || sub > 64) c.fail("green.subsamples", "must be in 1..64");
  const double spread_max = c.real("green.spread_max");
  if (!(spread_max >= 1.0)) c.fail("green.spread_max", "must be >= 1");
  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, x, out.results());
    const SpatialGrid grid = SpatialGrid::cartesian(s.D, int(per_axis), int(sub));
    const auto res = occupation_green(s.D, *s.k, x, grid, s.n, cfg, s.opt.child(1));
    out.add_counts(res.counts);
    const KernelGrid& G = res.green;
    CsvText csv;
    csv.os() << "cell_id,center_x,center_y,center_z,volume,value,stderr,envelope,ratio\n";
    double lo = INFINITY, hi = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      const Vec3 y = G.center(i);
      const double env = s.D.contains(y) && y != x ? green_envelope(s.D, x, y) : NAN;
      const double ratio = G.value(i) / env;
      csv.os() << i << ',' << y.x << ',' << y.y << ',' << y.z << ',' << G.measure(i) << ',' << G.value(i) << ','
               << G.stderr(i) << ',' << env << ',' << ratio << '\n';
      // resolved cells away from the pole and the boundary layer
      const double h = grid.spacing();
      if (distance(x, y) > 2.0 * h && s.D.dist_to_complement(y) > h && G.value(i) > 0.0 &&
          G.stderr(i) <= 0.2 * G.value(i)) {
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++used;
      }
    }
    out.write_figure("green.csv", csv.str());
    const Estimate total{G.total_mass(), G.total_mass_stderr()};
    json& r = out.results();
    r["x"] = point_json(s, x);
    r["cells"] = G.size();
    r["total_mass"] = estimate_json(total);
    r["envelope_ratio"] = {{"min", num(lo)}, {"max", num(hi)}, {"spread", num(hi / lo)}, {"cells_used", used}};
    r["counts"] = counts_json(res.counts);
    out.key_number("total_mass", total.value);
    out.key_number("envelope_spread", hi / lo);
    if (used < 10) {
      out.verdict("envelope_bracket", Verdict::inconclusive);
    } else {
      out.verdict("envelope_bracket", hi / lo <= spread_max);
    }
    if (!s.k->has_jumps() && s.D.kind() == DomainKind::ball) {
      const double R = s.D.radius();
      const double oracle = (R * R - norm2(x - s.D.center())) / (2.0 * s.D.dim());
      r["total_mass_oracle"] = oracle;
      out.verdict("total_mass", std::abs(total.value - oracle) <= 3.0 * total.stderr);
    }
  };
}

Job boundary_density_job(const Config& c) {
  const Setup s = make_setup(c);
  const Vec3 x = inside_point(c, s, "x");
  const long cells = c.integer("mesh.cells");
  if (cells < 4 || cells > (1 << 22)) c.fail("mesh.cells", "must be in 4..4194304");
  const double zmax = c.real("density.outlier_sigma");
  const long max_out = c.integer("density.max_outliers");
  const double spread_max = c.real("density.spread_max");
  if (s.n < 10000) c.fail("n", "boundary-density needs n >= 10000");
  if (!(zmax > 0.0)) c.fail("density.outlier_sigma", "must be positive");
  if (max_out < 0) c.fail("density.max_outliers", "must be >= 0");
  if (!(spread_max >= 1.0)) c.fail("density.spread_max", "must be >= 1");
  const auto mesh =
      checked(c, "mesh.cells", [&] { return std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(s.D, int(cells))); });
  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, x, out.results());
    const auto res = boundary_density(s.D, *s.k, x, *mesh, s.n, cfg, s.opt.child(1));
    out.add_counts(res.counts);
    const bool oracle = !s.k->has_jumps() && s.D.kind() == DomainKind::ball;
    CsvText csv;
    csv.os() << "cell_id,center_x,center_y,center_z,measure,value,stderr,classical,z_score\n";
    std::size_t outliers = 0;
    double worst = 0.0, chi2 = 0.0;
    for (std::size_t i = 0; i < mesh->size(); ++i) {
      const Vec3 w = (*mesh)[i].center;
      csv.os() << i << ',' << w.x << ',' << w.y << ',' << w.z << ',' << (*mesh)[i].measure << ','
               << res.density.value(i) << ',' << res.density.stderr(i) << ',';
      if (oracle) {
        const double P = ball_poisson_cell_mean(*mesh, x, i);
        const double z = (res.density.value(i) - P) / res.density.stderr(i);
        worst = std::max(worst, std::abs(z));
        chi2 += z * z;
        if (!(std::abs(z) <= zmax)) ++outliers;
        csv.os() << P << ',' << z;
      } else {
        csv.os() << ',';
      }
      csv.os() << '\n';
    }
    out.write_figure("density.csv", csv.str());
    json& r = out.results();
    r["x"] = point_json(s, x);
    r["cells"] = mesh->size();
    r["F"] = estimate_json(res.F);
    r["counts"] = counts_json(res.counts);
    out.key_number("F", res.F.value);
    if (oracle) {
      r["classical_kernel"] = {{"outlier_sigma", zmax},
                               {"outliers", outliers},
                               {"max_abs_z", worst},
                               {"chi2_per_cell", chi2 / double(mesh->size())}};
      out.key_number("max_abs_z", worst);
      out.verdict("classical_kernel", outliers <= std::size_t(max_out));
    }
    try {
      const EnvelopeStats e = envelope_ratio_stats(res.density, s.D, x);
      r["envelope"] = {{"ratio_min", e.ratio_min},
                       {"ratio_max", e.ratio_max},
                       {"spread", e.spread},
                       {"cells_used", e.cells_used}};
      out.key_number("envelope_spread", e.spread);
      out.verdict("envelope_spread", std::isfinite(e.spread) && e.spread <= spread_max);
    } catch (const InsufficientSamples& e) {
      r["envelope"] = {{"error", e.what()}};
      out.verdict("envelope_spread", Verdict::inconclusive);
    }
  };
}

Job levy_system(const Config& c) {
  const Setup s = make_setup(c);
  const Vec3 x = inside_point(c, s, "x");
  const RadialFunction f = shell(c, s, "levy");
  const double sigma_max = c.real("levy.sigma_max");
  if (!(sigma_max > 0.0)) c.fail("levy.sigma_max", "must be positive");
  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, x, out.results());
    const auto res = levy_system_check(s.D, *s.k, x, f, s.n, cfg, s.opt.child(1));
    out.add_counts(res.mc_counts);
    out.add_counts(res.quad_counts);
    json& r = out.results();
    r["x"] = point_json(s, x);
    r["mc"] = estimate_json(res.mc);
    r["quad"] = estimate_json(res.quad);
    r["sigma_distance"] = num(res.sigma_distance);
    r["truncation_radius"] = num(res.truncation_radius);
    r["mc_counts"] = counts_json(res.mc_counts);
    r["quad_counts"] = counts_json(res.quad_counts);
    CsvText csv;
    csv.os() << "route,value,stderr,paths,censored\n";
    csv.os() << "direct," << res.mc.value << ',' << res.mc.stderr << ',' << res.mc_counts.total << ','
             << res.mc_counts.censored << '\n';
    csv.os() << "quadrature," << res.quad.value << ',' << res.quad.stderr << ',' << res.quad_counts.total << ','
             << res.quad_counts.censored << '\n';
    out.write_figure("levy_system.csv", csv.str());
    out.key_number("sigma_distance", res.sigma_distance);
    if (!s.k->has_jumps()) {
      out.verdict("levy_system", Verdict::inconclusive);  // both sides vanish
    } else {
      out.verdict("levy_system", res.sigma_distance <= sigma_max);
    }
  };
}

Vec3 tangent_at(const Vec3& nu, int dim) {
  if (dim == 2) return {-nu.y, nu.x, 0.0};
  const Vec3 e = std::abs(nu.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  return normalized(Vec3{nu.y * e.z - nu.z * e.y, nu.z * e.x - nu.x * e.z, nu.x * e.y - nu.y * e.x});
}

Job fatou(const Config& c, bool relative) {
  const Setup s = make_setup(c);
  const long cells = c.integer("mesh.cells");
  if (cells < 4 || cells > (1 << 22)) c.fail("mesh.cells", "must be in 4..4194304");
  const long P = c.integer("fatou.points");
  if (P < 1 || P > cells) c.fail("fatou.points", "must be in 1..mesh.cells");
  const auto data = c.words("fatou.data");
  for (const auto& d : data)
    if (d != "hemisphere" && d != "affine" && d != "constant") c.fail("fatou.data", "unknown boundary data '" + d + "'");
  const double beta = c.real("fatou.beta");
  const long depth = c.integer("fatou.depth");
  if (depth < 2 || depth > 40) c.fail("fatou.depth", "must be in 2..40");
  const std::string mode_s = c.text("fatou.mode");
  if (mode_s != "radial" && mode_s != "zigzag") c.fail("fatou.mode", "must be radial or zigzag");
  const double tol = c.real("fatou.tolerance");
  if (!(tol > 0.0)) c.fail("fatou.tolerance", "must be positive");
  const auto mesh =
      checked(c, "mesh.cells", [&] { return std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(s.D, int(cells))); });

  std::vector<TraceSpec> specs;
  std::vector<std::vector<BoundaryData>> gs;
  for (long i = 0; i < P; ++i) {
    const Vec3 z = (*mesh)[std::size_t(i * cells / P + cells / (2 * P))].center;
    TraceSpec t;
    t.cone = checked(c, "fatou.beta", [&] { return ConeSpec::make(s.D, z, beta); });
    t.depth = int(depth);
    t.mode = mode_s == "radial" ? ConeMode::radial : ConeMode::zigzag;
    t.tolerance = tol;
    specs.push_back(t);
    const Vec3 nu = s.D.outer_normal(z);
    const Vec3 tau = tangent_at(nu, s.D.dim());
    const Vec3 ctr = s.D.center();
    std::vector<BoundaryData> row;
    for (const auto& d : data) {
      if (d == "hemisphere") {
        row.push_back(BoundaryData::from_function(mesh, [=](const Vec3& w) { return dot(w - ctr, nu) > 0 ? 1.0 : 0.0; }));
      } else if (d == "affine") {
        row.push_back(BoundaryData::from_function(mesh, [=](const Vec3& w) { return 0.3 + 0.2 * dot(w - z, tau); }));
      } else {
        row.push_back(BoundaryData::constant(mesh, 0.5));
      }
    }
    gs.push_back(std::move(row));
  }

  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, reference_point(s.D), out.results());
    json traces = json::array();
    double worst = 0.0;
    bool unstable = false;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto tr = fatou_traces(s.D, *s.k, gs[i], specs[i], s.n, cfg, s.opt.child(i + 1));
      for (const auto& ct : tr.counts) out.add_counts(ct);
      unstable = unstable || tr.ratio_unstable;
      const auto& reports = relative ? tr.relative : tr.plain;
      const std::string p = "p" + std::to_string(i);
      {
        CsvText csv;
        tr.F.write_csv(csv.os());
        out.write_figure("trace_" + p + "_F.csv", csv.str());
      }
      for (std::size_t j = 0; j < reports.size(); ++j) {
        const auto& rep = reports[j];
        CsvText csv;
        rep.write_csv(csv.os());
        out.write_figure("trace_" + p + "_" + data[j] + ".csv", csv.str());
        json tj = json::parse(rep.to_json());
        tj["point"] = i;
        tj["data"] = data[j];
        traces.push_back(tj);
        out.verdict(p + "_" + data[j], rep.verdict);
        worst = std::max(worst, std::abs(rep.limit - rep.expected));
      }
    }
    out.results()["kind"] = relative ? "relative" : "plain";
    out.results()["ratio_unstable"] = unstable;
    out.results()["traces"] = traces;
    out.key_number("max_limit_error", worst);
  };
}

Job maximal(const Config& c) {
  const Domain D = make_domain(c);
  const double t = c.real("maximal.t");
  if (!(t >= 1.0)) c.fail("maximal.t", "must be >= 1");
  const long cells = c.integer("maximal.cells");
  if (cells < 2 || cells > 16) c.fail("maximal.cells", "must be in 2..16 (exhaustive enumeration)");
  const long atoms = c.integer("maximal.atoms");
  if (atoms < 1 || atoms > 4) c.fail("maximal.atoms", "must be in 1..4");
  const auto weights = c.reals("maximal.weights");
  for (double w : weights)
    if (!(w > 0.0)) c.fail("maximal.weights", "weights must be positive");
  const double h = c.real("maximal.grid");
  if (!(h > 0.0 && h < D.diameter())) c.fail("maximal.grid", "must be in (0, diam)");
  std::vector<Vec3> zs;
  for (double a : c.reals("maximal.z_angles")) zs.push_back(boundary_point(D, a));
  const auto mesh = checked(c, "maximal.cells", [&] { return std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(D, int(cells))); });
  const auto pairs = cone_grid_pairs(D, zs, t, h);
  if (pairs.empty()) c.fail("maximal.grid", "no grid point lies in the cones; refine the grid");
  return [=](RunOutput& out) {
    const MaximalSweep sw = maximal_exhaustive(*mesh, pairs, t, int(atoms), weights);
    const double C = maximal_constant(t, D.dim());
    const double sharp = std::pow(2.0 * t + 1.0, D.dim());
    json& r = out.results();
    r["pairs"] = pairs.size();
    r["instances"] = sw.instances;
    r["failures"] = sw.failures;
    r["constant"] = C;
    r["worst_upper"] = sw.worst_upper;
    r["worst_lower"] = sw.worst_lower;
    r["sharp_constant"] = sharp;
    r["sharp_constant_holds"] = std::max(sw.worst_upper, sw.worst_lower) * C / sharp <= 1.0 + 1e-12;
    CsvText csv;
    csv.os() << "pair,x,y,z,zx,zy,zz,t_delta\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [x, z] = pairs[i];
      csv.os() << i << ',' << x.x << ',' << x.y << ',' << x.z << ',' << z.x << ',' << z.y << ',' << z.z << ','
               << t * D.dist_to_complement(x) << '\n';
    }
    out.write_file("maximal_pairs.csv", csv.str());
    out.key_number("instances", double(sw.instances));
    out.key_number("failures", double(sw.failures));
    out.verdict("maximal_inequality", sw.failures == 0);
  };
}

Job g_bound(const Config& c) {
  const Domain D = make_domain(c);
  const long cells = c.integer("gbound.cells");
  if (cells < 4 || cells > (1 << 24)) c.fail("gbound.cells", "must be in 4..16777216");
  const double angle = c.real("gbound.angle");
  const double delta0 = c.real("gbound.delta0");
  const long count = c.integer("gbound.count");
  if (count < 1 || count > 60) c.fail("gbound.count", "must be in 1..60");
  const double ratio_max = c.real("gbound.ratio_max");
  if (!(ratio_max >= 1.0)) c.fail("gbound.ratio_max", "must be >= 1");
  const Vec3 z = boundary_point(D, angle);
  const auto xs = checked(c, "gbound.delta0", [&] { return radial_points(D, z, delta0, int(count)); });
  const auto mesh = checked(c, "gbound.cells", [&] { return std::make_shared<const BoundaryMesh>(BoundaryMesh::uniform(D, int(cells))); });
  const double smallest = delta0 * std::ldexp(1.0, -int(count - 1));
  if (mesh->max_cell_diameter() > smallest / 4)
    c.fail("gbound.cells", "cells must be at most a quarter of the smallest depth; raise cells or lower count");
  return [=](RunOutput& out) {
    const GBoundResult g = G_boundedness_check(*mesh, xs);
    const bool closed = unit_ball_at_origin(D);
    CsvText csv;
    csv.os() << "index,delta,value,closed_form\n";
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      csv.os() << i << ',' << g.deltas[i] << ',' << g.values[i] << ',';
      if (closed) {
        const double cf = (D.dim() == 2 ? 2.0 : 4.0) * kPi / (1.0 + norm(xs[i]));
        worst_rel = std::max(worst_rel, std::abs(g.values[i] / cf - 1.0));
        csv.os() << cf;
      }
      csv.os() << '\n';
    }
    out.write_figure("gbound.csv", csv.str());
    json& r = out.results();
    r["min"] = g.min_value;
    r["max"] = g.max_value;
    r["ratio"] = g.max_value / g.min_value;
    out.key_number("max_over_min", g.max_value / g.min_value);
    out.verdict("bounded", g.max_value / g.min_value <= ratio_max);
    if (closed) {
      r["closed_form_max_rel_error"] = worst_rel;
      out.verdict("closed_form", worst_rel <= 2e-3);
    }
  };
}

Job locality(const Config& c) {
  const Setup s = make_setup(c);
  const Vec3 z = boundary_point(s.D, c.real("locality.angle"));
  const double r = c.real("locality.r");
  if (!(r > 0.0)) c.fail("locality.r", "must be positive");
  const double delta0 = c.real("locality.delta0");
  const long count = c.integer("locality.count");
  if (count < 2 || count > 20) c.fail("locality.count", "must be in 2..20");
  const double slope_min = c.real("locality.slope_min");
  const auto xs = checked(c, "locality.delta0", [&] { return radial_points(s.D, z, delta0, int(count)); });
  if (!(delta0 < r)) c.fail("locality.delta0", "must be smaller than locality.r");
  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, reference_point(s.D), out.results());
    const LocalityReport rep = exit_locality_check(s.D, *s.k, z, r, xs, s.n, cfg, s.opt.child(1), slope_min);
    CsvText csv;
    csv.os() << "index,delta,q,stderr\n";
    json q = json::array();
    for (std::size_t i = 0; i < rep.q.size(); ++i) {
      csv.os() << i << ',' << rep.deltas[i] << ',' << rep.q[i].value << ',' << rep.q[i].stderr << '\n';
      q.push_back(estimate_json(rep.q[i]));
    }
    out.write_figure("locality.csv", csv.str());
    json& res = out.results();
    res["z"] = point_json(s, z);
    res["deltas"] = rep.deltas;
    res["q"] = q;
    res["slope"] = num(rep.slope);
    res["slope_stderr"] = num(rep.slope_stderr);
    res["decreasing"] = rep.decreasing;
    out.key_number("slope", rep.slope);
    out.verdict("locality", rep.verdict);
  };
}

Job representation(const Config& c) {
  const Setup s = make_setup(c);
  const RadialFunction f = shell(c, s, "representation");
  const auto xs = inside_points(c, s, "representation.points");
  const double frac = c.real("representation.ball_fraction");
  if (!(frac > 0.0 && frac < 1.0)) c.fail("representation.ball_fraction", "must be in (0, 1)");
  return [=](RunOutput& out) {
    const PathConfig cfg = timed(s, reference_point(s.D), out.results());
    const auto pts = representation_check(s.D, *s.k, f, xs, s.n, cfg, s.opt.child(1), frac);
    CsvText csv;
    csv.os() << "point,x,y,z,F,direct,direct_stderr,quadrature,quadrature_stderr,two_step,two_step_stderr,"
                "sigma_quadrature,sigma_two_step,pass\n";
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      csv.os() << i << ',' << p.x.x << ',' << p.x.y << ',' << p.x.z << ',' << p.F << ',' << p.direct.value << ','
               << p.direct.stderr << ',' << p.quad.value << ',' << p.quad.stderr << ',' << p.two_step.value << ','
               << p.two_step.stderr << ',' << p.sigma_quad << ',' << p.sigma_two_step << ',' << int(p.pass) << '\n';
      rows.push_back({{"x", point_json(s, p.x)},
                      {"F", p.F},
                      {"direct", estimate_json(p.direct)},
                      {"quadrature", estimate_json(p.quad)},
                      {"two_step", estimate_json(p.two_step)},
                      {"sigma_quadrature", num(p.sigma_quad)},
                      {"sigma_two_step", num(p.sigma_two_step)}});
      worst = std::max({worst, p.sigma_quad, p.sigma_two_step});
      out.verdict("point_" + std::to_string(i), p.pass);
    }
    out.write_figure("representation.csv", csv.str());
    out.results()["points"] = rows;
    out.key_number("max_sigma", worst);
  };
}

Job counterexample(const Config& c) {
  const Domain D = make_domain(c);
  if (!(unit_ball_at_origin(D) && D.dim() == 2)) c.fail("domain.kind", "the counterexample lives on the unit disk");
  const long k_max = c.integer("counterexample.k_max");
  if (k_max < 1 || k_max > 20) c.fail("counterexample.k_max", "must be in 1..20");
  const long base = c.integer("counterexample.base");
  if (base < 2 || base > (1L << 40)) c.fail("counterexample.base", "must be in 2..2^40");
  const long angles = c.integer("counterexample.angles");
  if (angles < 1 || angles > 100000) c.fail("counterexample.angles", "must be in 1..100000");
  const double offset = c.real("counterexample.angle_offset");
  CounterexampleOptions o;
  o.gamma = c.real("counterexample.gamma");
  if (!(o.gamma > 0.0 && o.gamma < 1.0)) c.fail("counterexample.gamma", "must be in (0, 1)");
  const long depths = c.integer("counterexample.depths");
  if (depths < 4 || depths > 4096) c.fail("counterexample.depths", "must be in 4..4096");
  o.points = int(depths);
  const std::string mode = c.text("counterexample.mode");
  if (mode != "surrogate_quadrature" && mode != "monte_carlo")
    c.fail("counterexample.mode", "must be surrogate_quadrature or monte_carlo");
  o.radial_max = c.real("counterexample.radial_max");
  o.tangential_min = c.real("counterexample.tangential_min");
  o.tangential_share = c.real("counterexample.tangential_share");
  if (!(o.tangential_share > 0.0 && o.tangential_share <= 1.0))
    c.fail("counterexample.tangential_share", "must be in (0, 1]");
  std::shared_ptr<const Setup> setup;
  if (mode == "monte_carlo") {
    o.mode = CounterexampleMode::monte_carlo;
    o.mc_min_delta = c.real("counterexample.mc_min_delta");
    if (!(o.mc_min_delta > 0.0 && o.mc_min_delta < 0.5)) c.fail("counterexample.mc_min_delta", "must be in (0, 0.5)");
    setup = std::make_shared<const Setup>(make_setup(c));
  }
  const auto lambdas = c.reals("lemma.lambdas");
  for (double l : lambdas)
    if (!(l > 0.0 && l <= kPi / 2)) c.fail("lemma.lambdas", "half-widths must be in (0, pi/2]");
  const auto eps = c.reals("lemma.eps");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) c.fail("lemma.eps", "epsilons must be in (0, 1)");
  const long j_max = c.integer("lemma.j_max");
  if (j_max < 0 || j_max > 60) c.fail("lemma.j_max", "must be in 0..60");
  const LittlewoodArcs arcs = checked(c, "counterexample.base", [&] { return LittlewoodArcs::make(int(k_max), base); });
  std::vector<double> thetas;
  for (long i = 0; i < angles; ++i) thetas.push_back(2 * kPi * (double(i) + offset) / double(angles));

  return [=](RunOutput& out) mutable {
    if (setup) {
      o.kernel = setup->k.get();
      o.n = setup->n;
      o.cfg = timed(*setup, Vec3{}, out.results());
      o.opt = setup->opt.child(1);
    }
    const CounterexampleResult res = littlewood_counterexample(arcs, thetas, o);
    CsvText osc;
    osc.os() << "theta,boundary_value,radial_limit,radial_oscillation,tangential_oscillation\n";
    for (std::size_t i = 0; i < res.thetas.size(); ++i) {
      osc.os() << res.thetas[i] << ',' << res.radial[i].expected << ',' << res.radial[i].limit << ','
               << res.radial[i].oscillation << ',' << res.tangential[i].oscillation << '\n';
    }
    out.write_figure("oscillation.csv", osc.str());
    {
      CsvText a, b;
      res.radial.front().write_csv(a.os());
      res.tangential.front().write_csv(b.os());
      out.write_figure("radial_trace_0.csv", a.str());
      out.write_figure("tangential_trace_0.csv", b.str());
    }
    double rad_worst = 0.0;
    for (const auto& r : res.radial) rad_worst = std::max(rad_worst, r.oscillation);
    const LemmaNearOneResult lemma = lemma_near_one_check(lambdas, eps, int(j_max));
    json& r = out.results();
    r["mode"] = mode;
    r["lambda0"] = arcs.lambda0();
    r["radial_max_oscillation"] = rad_worst;
    r["tangential_fraction"] = res.tangential_fraction;
    r["dichotomy"] = res.dichotomy;
    if (setup) r["mc_sigma_max"] = res.mc_sigma_max;
    r["lemma_near_one"] = {{"cases", lemma.cases}, {"failures", lemma.failures}, {"worst_margin", lemma.worst_margin}};
    out.key_number("radial_max_oscillation", rad_worst);
    out.key_number("tangential_fraction", res.tangential_fraction);
    out.verdict("radial", res.radial_ok);
    out.verdict("tangential", res.tangential_fraction >= o.tangential_share);
    out.verdict("dichotomy", res.dichotomy);
    out.verdict("lemma_near_one", lemma.failures == 0);
  };
}

Job harnack(const Config& c) {
  const Setup s = make_setup(c);
  const Vec3 x0 = inside_point(c, s, "harnack.x0");
  const double r = c.real("harnack.r");
  if (!(r > 0.0 && r <= 1.0)) c.fail("harnack.r", "must be in (0, 1]");
  if (s.D.dist_to_complement(x0) < r) c.fail("harnack.r", "B(x0, r) must lie in the domain");
  const long pairs = c.integer("harnack.pairs");
  if (pairs < 1 || pairs > 1000) c.fail("harnack.pairs", "must be in 1..1000");
  const double threshold = c.real("harnack.threshold");
  const double ratio_max = c.real("harnack.ratio_max");
  if (!(ratio_max >= 1.0)) c.fail("harnack.ratio_max", "must be >= 1");
  return [=](RunOutput& out) {
    const auto g = [threshold](const Vec3& w) { return w.x > threshold ? 1.0 : 0.0; };
    const HarnackResult h = harnack_check(s.D, *s.k, x0, r, g, int(pairs), s.n, s.raw, s.opt.child(1));
    CsvText csv;
    csv.os() << "point,x,y,z,u,stderr\n";
    for (std::size_t i = 0; i < h.points.size(); ++i) {
      csv.os() << i << ',' << h.points[i].x << ',' << h.points[i].y << ',' << h.points[i].z << ','
               << h.values[i].value << ',' << h.values[i].stderr << '\n';
    }
    out.write_figure("harnack.csv", csv.str());
    out.results()["max_ratio"] = num(h.max_ratio);
    out.results()["max_ratio_stderr"] = num(h.max_ratio_stderr);
    out.key_number("max_ratio", h.max_ratio);
    out.verdict("harnack", std::isfinite(h.max_ratio) && h.max_ratio <= ratio_max);
  };
}

Job condition_check(const Config& c) {
  const Subordinator sub = make_subordinator(c);
  if (!sub.has_jumps()) c.fail("process.family", "brownian_only has no Levy density to check");
  const double K = c.real("condition.K");
  if (!(K > 0.0)) c.fail("condition.K", "must be positive");
  const long grid = c.integer("condition.grid");
  if (grid < 16 || grid > 100000) c.fail("condition.grid", "must be in 16..100000");
  return [=](RunOutput& out) {
    const ConditionReport rep = check_condition(sub, K, int(grid));
    out.results()["family"] = sub.describe();
    out.results()["doubling_constant"] = num(rep.doubling_constant);
    out.results()["cm_violations"] = rep.cm_violations;
    CsvText csv;
    csv.os() << "family,K,grid,doubling_constant,cm_violations\n"
             << to_string(sub.family()) << ',' << K << ',' << grid << ',' << rep.doubling_constant << ','
             << rep.cm_violations << '\n';
    out.write_file("condition.csv", csv.str());
    out.key_number("doubling_constant", rep.doubling_constant);
    out.key_number("cm_violations", rep.cm_violations);
    out.verdict("complete_monotonicity", rep.cm_violations == 0);
    out.verdict("doubling", std::isfinite(rep.doubling_constant));
  };
}

}  // namespace

std::span<const std::string_view> experiment_names() { return kNames; }

Job plan_experiment(const std::string& name, const Config& cfg) {
  if (name == "exit-stats") return exit_stats(cfg);
  if (name == "green") return green(cfg);
  if (name == "boundary-density") return boundary_density_job(cfg);
  if (name == "levy-system") return levy_system(cfg);
  if (name == "fatou") return fatou(cfg, false);
  if (name == "relative-fatou") return fatou(cfg, true);
  if (name == "maximal") return maximal(cfg);
  if (name == "g-bound") return g_bound(cfg);
  if (name == "locality") return locality(cfg);
  if (name == "representation") return representation(cfg);
  if (name == "counterexample") return counterexample(cfg);
  if (name == "harnack") return harnack(cfg);
  if (name == "condition-check") return condition_check(cfg);
  if (name.empty()) cfg.fail("experiment", "missing; set experiment = <name>");
  cfg.fail("experiment", "unknown experiment '" + name + "'");
}

}  // namespace sbm::cli
