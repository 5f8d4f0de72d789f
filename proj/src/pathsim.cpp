#include "sbm/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sbm/error.hpp"

namespace sbm {

void PathConfig::validate() const {
  std::ostringstream msg;
  if (!(h > 0.0)) msg << "h must be positive; ";
  if (!(eps_b >= 0.0)) msg << "eps_b must be nonnegative; ";
  if (!(delta_cut > 0.0)) msg << "delta_cut must be positive; ";
  if (!(t_max >= 0.0)) msg << "t_max must be nonnegative; ";
  if (!(refine >= 1.0)) msg << "refine_factor must be >= 1; ";
  if (!msg.str().empty()) throw ConfigError("PathConfig: " + msg.str());
}

PathConfig PathConfig::resolved(const Domain& D) const {
  validate();
  PathConfig c = *this;
  if (c.eps_b == 0.0) c.eps_b = 1e-4 * D.diameter();
  return c;
}

std::string to_string(ExitType t) {
  switch (t) {
    case ExitType::boundary: return "boundary";
    case ExitType::jump: return "jump";
    case ExitType::censored: return "censored";
  }
  return "?";
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
  out_ << "step,time,x,y,z,event\n";
  out_.precision(17);
}

void TraceWriter::step(const Vec3&, const Vec3& b, double dt) {
  time_ += dt;
  out_ << ++index_ << ',' << time_ << ',' << b.x << ',' << b.y << ',' << b.z << ",0\n";
}

void TraceWriter::jump(const Vec3&, const Vec3& to) {
  out_ << ++index_ << ',' << time_ << ',' << to.x << ',' << to.y << ',' << to.z << ",1\n";
}

void TraceWriter::finish(const ExitRecord& r) {
  const int flag = r.type == ExitType::boundary ? 2 : (r.type == ExitType::jump ? 3 : 4);
  out_ << ++index_ << ',' << r.exit_time << ',' << r.exit_point.x << ',' << r.exit_point.y << ','
       << r.exit_point.z << ',' << flag << '\n';
}

ExitRecord simulate_exit(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg, Rng& rng,
                         PathObserver* obs) {
  if (k.dim() != D.dim()) throw ConfigError("simulate_exit: kernel and domain dimensions differ");
  if (!(cfg.t_max > 0.0)) throw ConfigError("simulate_exit: t_max unresolved (run resolve_config)");
  if (k.has_jumps() && std::abs(k.cutoff() - cfg.delta_cut) > 1e-12 * cfg.delta_cut)
    throw ConfigError("simulate_exit: kernel cutoff differs from delta_cut");
  const double eps_b = cfg.eps_b > 0.0 ? cfg.eps_b : 1e-4 * D.diameter();
  const int d = D.dim();
  const double s2 = 2.0 * k.subordinator().drift() + k.small_variance_rate();
  const double rate = k.has_jumps() ? k.tail_intensity() : 0.0;
  const double collar = 4.0 * std::sqrt(cfg.h);
  const double h_in = cfg.h / cfg.refine;

  ExitRecord rec;
  Vec3 x = x0;
  double delta = D.signed_distance(x);
  if (!(delta > 0.0)) throw DomainError("simulate_exit: starting point is not in D");
  double t = 0.0;

  const auto boundary_exit = [&](const Vec3& p, const Vec3& pre, double time) {
    rec.type = ExitType::boundary;
    rec.exit_point = D.project_to_boundary(p);
    rec.pre_exit_point = pre;
    rec.exit_time = time;
    return rec;
  };

  if (delta <= eps_b) return boundary_exit(x, x, 0.0);
  double next_jump = rate > 0.0 ? std_exponential(rng) / rate : std::numeric_limits<double>::infinity();

  for (;;) {
    if (t >= cfg.t_max) {
      rec.type = ExitType::censored;
      rec.exit_point = x;
      rec.pre_exit_point = x;
      rec.exit_time = cfg.t_max;
      return rec;
    }
    double dt = delta < collar ? h_in : cfg.h;
    bool jump_now = false;
    if (next_jump - t <= dt && next_jump < cfg.t_max) {
      dt = next_jump - t;
      jump_now = true;
    }
    if (!jump_now) dt = std::min(dt, cfg.t_max - t);

    const double sd = std::sqrt(s2 * dt);
    Vec3 y = x;
    y.x += sd * std_normal(rng);
    y.y += sd * std_normal(rng);
    if (d == 3) y.z += sd * std_normal(rng);
    const double delta_y = D.signed_distance(y);
    ++rec.steps;

    if (delta_y <= eps_b) {
      const double frac = delta_y < 0.0 ? delta / (delta - delta_y) : 1.0;
      ExitRecord r = boundary_exit(y, x, t + frac * dt);
      if (obs) obs->step(x, r.exit_point, frac * dt);
      return r;
    }
    // Half-space Brownian bridge: P(cross | endpoints) = exp(−2 δ₁δ₂ / (s² dt)).
    const double a = 2.0 * delta * delta_y / (s2 * dt);
    if (a < 40.0 && uniform01(rng) < std::exp(-a)) {
      ExitRecord r = boundary_exit((x + y) * 0.5, x, t + 0.5 * dt);
      if (obs) obs->step(x, r.exit_point, 0.5 * dt);
      return r;
    }
    if (obs) obs->step(x, y, dt);
    x = y;
    delta = delta_y;
    t += dt;

    if (jump_now) {
      t = next_jump;
      const Vec3 z = x + k.sample_jump(rng);
      const double delta_z = D.signed_distance(z);
      if (obs) obs->jump(x, z);
      if (delta_z > eps_b) {
        x = z;
        delta = delta_z;
        next_jump = t + std_exponential(rng) / rate;
        continue;
      }
      if (delta_z >= -eps_b) return boundary_exit(z, x, t);
      rec.type = ExitType::jump;
      rec.exit_point = z;
      rec.pre_exit_point = x;
      rec.exit_time = t;
      return rec;
    }
  }
}

void PathCounts::record(const ExitRecord& r) {
  ++total;
  switch (r.type) {
    case ExitType::boundary: ++boundary; break;
    case ExitType::jump: ++jump; break;
    case ExitType::censored: ++censored; return;
  }
  exit_time.add(r.exit_time);
}

PathCounts& PathCounts::operator+=(const PathCounts& o) {
  total += o.total;
  boundary += o.boundary;
  jump += o.jump;
  censored += o.censored;
  exit_time += o.exit_time;
  return *this;
}

double pilot_t_max(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg,
                   const RunOptions& opt, std::uint64_t n) {
  PathConfig pilot = cfg.resolved(D);
  pilot.t_max = 100.0 * D.diameter() * D.diameter();
  const RunOptions o = opt.with_stream(opt.stream ^ 0x70696c6f74ULL);
  const PathCounts c = collect_exits(
      D, k, x0, n, pilot, o, [] { return PathCounts{}; }, [](PathCounts& a, const ExitRecord& r) { a.record(r); },
      [](PathCounts& a, const PathCounts& b) { a += b; });
  if (c.exit_time.count == 0) throw NumericError("pilot_t_max: every pilot path was censored");
  return 50.0 * c.exit_time.mean();
}

PathConfig resolve_config(const Domain& D, const JumpKernel& k, const Vec3& x0, const PathConfig& cfg,
                          const RunOptions& opt) {
  PathConfig c = cfg.resolved(D);
  if (c.t_max == 0.0) c.t_max = pilot_t_max(D, k, x0, c, opt);
  return c;
}

namespace {

struct MeanAcc {
  PathCounts counts;
  RunningSum values;
  MeanAcc& operator+=(const MeanAcc& o) {
    counts += o.counts;
    values += o.values;
    return *this;
  }
};

}  // namespace

FunctionalEstimate estimate_F(const Domain& D, const JumpKernel& k, const Vec3& x, std::uint64_t n,
                              const PathConfig& cfg, const RunOptions& opt) {
  if (n < 100) throw ConfigError("estimate_F: need n >= 100");
  const PathCounts c = collect_exits(
      D, k, x, n, cfg, opt, [] { return PathCounts{}; }, [](PathCounts& a, const ExitRecord& r) { a.record(r); },
      [](PathCounts& a, const PathCounts& b) { a += b; });
  const std::uint64_t m = c.boundary + c.jump;
  if (m == 0) throw InsufficientSamples("estimate_F: every path was censored");
  const double f = double(c.boundary) / double(m);
  return {{f, std::sqrt(f * (1.0 - f) / double(m))}, c};
}

FunctionalEstimate exit_functional(const Domain& D, const JumpKernel& k, const Vec3& x,
                                   const std::function<double(const Vec3&)>& f, ExitClass cls, std::uint64_t n,
                                   const PathConfig& cfg, const RunOptions& opt) {
  if (n < 100) throw ConfigError("exit_functional: need n >= 100");
  const MeanAcc acc = collect_exits(
      D, k, x, n, cfg, opt, [] { return MeanAcc{}; },
      [&](MeanAcc& a, const ExitRecord& r) {
        a.counts.record(r);
        if (r.type == ExitType::censored) return;
        const bool take = cls == ExitClass::all || (cls == ExitClass::boundary && r.type == ExitType::boundary) ||
                          (cls == ExitClass::jump && r.type == ExitType::jump);
        a.values.add(take ? f(r.exit_point) : 0.0);
      },
      [](MeanAcc& a, const MeanAcc& b) { a += b; });
  if (acc.values.count < 2) throw InsufficientSamples("exit_functional: every path was censored");
  return {{acc.values.mean(), acc.values.stderr_of_mean()}, acc.counts};
}

SpatialGrid SpatialGrid::cartesian(const Domain& D, int per_axis, int subsamples) {
  if (per_axis < 2 || subsamples < 1) throw ConfigError("SpatialGrid: need per_axis >= 2, subsamples >= 1");
  SpatialGrid g;
  g.dim_ = D.dim();
  g.per_axis_ = per_axis;
  const double half = 0.5 * D.diameter();
  const Vec3 c = D.kind() == DomainKind::ball ? D.center() : Vec3{};
  g.spacing_ = 2.0 * half / per_axis;
  g.origin_ = c - Vec3{half, half, g.dim_ == 3 ? half : 0.0};
  const long nz = g.dim_ == 3 ? per_axis : 1;
  const long total = long(per_axis) * per_axis * nz;
  g.index_.assign(total, -1);
  const int sz = g.dim_ == 3 ? subsamples : 1;
  const double sub = g.spacing_ / subsamples;
  for (long iz = 0; iz < nz; ++iz) {
    for (long iy = 0; iy < per_axis; ++iy) {
      for (long ix = 0; ix < per_axis; ++ix) {
        const Vec3 lo = g.origin_ + Vec3{ix * g.spacing_, iy * g.spacing_, g.dim_ == 3 ? iz * g.spacing_ : 0.0};
        int inside = 0;
        for (int a = 0; a < subsamples; ++a)
          for (int b = 0; b < subsamples; ++b)
            for (int e = 0; e < sz; ++e) {
              const Vec3 p = lo + Vec3{(a + 0.5) * sub, (b + 0.5) * sub, g.dim_ == 3 ? (e + 0.5) * sub : 0.0};
              inside += D.contains(p) ? 1 : 0;
            }
        if (inside == 0) continue;
        const double frac = double(inside) / double(subsamples * subsamples * sz);
        const double cell_volume = std::pow(g.spacing_, g.dim_);
        g.index_[(iz * per_axis + iy) * per_axis + ix] = long(g.centers_.size());
        g.centers_.push_back(lo + Vec3{0.5 * g.spacing_, 0.5 * g.spacing_, g.dim_ == 3 ? 0.5 * g.spacing_ : 0.0});
        g.volumes_.push_back(frac * cell_volume);
      }
    }
  }
  return g;
}

long SpatialGrid::cell_of(const Vec3& y) const {
  const Vec3 r = (y - origin_) * (1.0 / spacing_);
  const long ix = long(std::floor(r.x)), iy = long(std::floor(r.y));
  const long iz = dim_ == 3 ? long(std::floor(r.z)) : 0;
  if (ix < 0 || iy < 0 || iz < 0 || ix >= per_axis_ || iy >= per_axis_ || (dim_ == 3 && iz >= per_axis_)) return -1;
  return index_[(iz * per_axis_ + iy) * per_axis_ + ix];
}

namespace {

class OccupationRecorder : public PathObserver {
 public:
  explicit OccupationRecorder(const SpatialGrid& g) : grid_(g) {}
  void step(const Vec3& a, const Vec3& b, double dt) override {
    const long ca = grid_.cell_of(a), cb = grid_.cell_of(b);
    if (ca >= 0) items.emplace_back(std::size_t(ca), 0.5 * dt);
    if (cb >= 0) items.emplace_back(std::size_t(cb), 0.5 * dt);
  }
  std::vector<std::pair<std::size_t, double>> items;

 private:
  const SpatialGrid& grid_;
};

class TrapezoidIntegrator : public PathObserver {
 public:
  explicit TrapezoidIntegrator(const std::function<double(const Vec3&)>& F) : F_(F) {}
  void step(const Vec3& a, const Vec3& b, double dt) override {
    if (!has_last_ || !(a == last_)) last_value_ = F_(a);
    const double fb = F_(b);
    total += 0.5 * (last_value_ + fb) * dt;
    last_ = b;
    last_value_ = fb;
    has_last_ = true;
  }
  void jump(const Vec3&, const Vec3&) override { has_last_ = false; }
  void reset() {
    total = 0.0;
    has_last_ = false;
  }
  double total = 0.0;

 private:
  const std::function<double(const Vec3&)>& F_;
  Vec3 last_{};
  double last_value_ = 0.0;
  bool has_last_ = false;
};

}  // namespace

OccupationResult occupation_green(const Domain& D, const JumpKernel& k, const Vec3& x, const SpatialGrid& grid,
                                  std::uint64_t n, const PathConfig& cfg, const RunOptions& opt) {
  if (n < 1000) throw ConfigError("occupation_green: need n >= 1000");
  struct Acc {
    OccupationResult res;
    OccupationRecorder rec;
  };
  auto acc = run_blocks(
      n, opt, [&] { return Acc{{grid.empty_kernel_grid(), {}}, OccupationRecorder(grid)}; },
      [&](Rng& rng, Acc& a) {
        a.rec.items.clear();
        const ExitRecord r = simulate_exit(D, k, x, cfg, rng, &a.rec);
        a.res.counts.record(r);
        if (r.type == ExitType::censored) return;
        a.res.green.add_path(a.rec.items);
      },
      [](Acc& a, const Acc& b) {
        a.res.green.merge(b.res.green);
        a.res.counts += b.res.counts;
      });
  return std::move(acc.res);
}

OccupationResult occupation_probes(const Domain& D, const JumpKernel& k, const Vec3& x,
                                   const std::vector<Vec3>& probes, double radius, std::uint64_t n,
                                   const PathConfig& cfg, const RunOptions& opt) {
  if (n < 1000) throw ConfigError("occupation_probes: need n >= 1000");
  for (const auto& p : probes) {
    if (D.dist_to_complement(p) <= radius) throw ConfigError("occupation_probes: probe ball leaves D");
  }
  const double vol = D.dim() == 2 ? std::numbers::pi * radius * radius
                                  : 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  const std::vector<double> volumes(probes.size(), vol);
  class ProbeRecorder : public PathObserver {
   public:
    ProbeRecorder(const std::vector<Vec3>& p, double r) : probes_(p), r2_(r * r) {}
    void step(const Vec3& a, const Vec3& b, double dt) override {
      for (std::size_t i = 0; i < probes_.size(); ++i) {
        if (norm2(a - probes_[i]) < r2_) items.emplace_back(i, 0.5 * dt);
        if (norm2(b - probes_[i]) < r2_) items.emplace_back(i, 0.5 * dt);
      }
    }
    std::vector<std::pair<std::size_t, double>> items;

   private:
    const std::vector<Vec3>& probes_;
    double r2_;
  };
  struct Acc {
    OccupationResult res;
    ProbeRecorder rec;
  };
  auto acc = run_blocks(
      n, opt, [&] { return Acc{{KernelGrid(probes, volumes), {}}, ProbeRecorder(probes, radius)}; },
      [&](Rng& rng, Acc& a) {
        a.rec.items.clear();
        const ExitRecord r = simulate_exit(D, k, x, cfg, rng, &a.rec);
        a.res.counts.record(r);
        if (r.type == ExitType::censored) return;
        a.res.green.add_path(a.rec.items);
      },
      [](Acc& a, const Acc& b) {
        a.res.green.merge(b.res.green);
        a.res.counts += b.res.counts;
      });
  return std::move(acc.res);
}

FunctionalEstimate occupation_functional(const Domain& D, const JumpKernel& k, const Vec3& x,
                                         const std::function<double(const Vec3&)>& F, std::uint64_t n,
                                         const PathConfig& cfg, const RunOptions& opt) {
  if (n < 100) throw ConfigError("occupation_functional: need n >= 100");
  struct Acc {
    MeanAcc mean;
    TrapezoidIntegrator integ;
  };
  auto acc = run_blocks(
      n, opt, [&] { return Acc{{}, TrapezoidIntegrator(F)}; },
      [&](Rng& rng, Acc& a) {
        a.integ.reset();
        const ExitRecord r = simulate_exit(D, k, x, cfg, rng, &a.integ);
        a.mean.counts.record(r);
        if (r.type != ExitType::censored) a.mean.values.add(a.integ.total);
      },
      [](Acc& a, const Acc& b) { a.mean += b.mean; });
  if (acc.mean.values.count < 2) throw InsufficientSamples("occupation_functional: every path was censored");
  return {{acc.mean.values.mean(), acc.mean.values.stderr_of_mean()}, acc.mean.counts};
}

}  // namespace sbm
