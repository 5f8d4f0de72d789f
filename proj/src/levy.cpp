#include "sbm/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

// fpclassify must precede pchip.hpp in Boost 1.74
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "quadrature.hpp"
#include "sbm/error.hpp"

namespace sbm {

namespace {

constexpr int kSplineKnots = 1024;
constexpr int kTableRadii = 4096;
constexpr double kResidualTail = 1e-9;

}  // namespace

double unit_sphere_area(int d) {
  if (d == 2) return 2.0 * std::numbers::pi;
  if (d == 3) return 4.0 * std::numbers::pi;
  throw DomainError("unit_sphere_area: dimension must be 2 or 3");
}

double stable_jump_constant(int d, double alpha) {
  return alpha * std::pow(2.0, alpha - 1.0) * std::pow(std::numbers::pi, -0.5 * d) *
         std::tgamma(0.5 * (d + alpha)) / std::tgamma(1.0 - 0.5 * alpha);
}

struct JumpKernel::Spline {
  double log_lo = 0.0;
  double log_hi = 0.0;
  double slope_lo = 0.0;  // d log j / d log r at the lower end
  double slope_hi = 0.0;  // same at the upper end
  double log_j_lo = 0.0;
  double log_j_hi = 0.0;
  bool exponential_tail = false;
  double exp_rate = 0.0;  // −d log j / dr at the upper end
  boost::math::interpolators::pchip<std::vector<double>> interp;

  Spline(std::vector<double> x, std::vector<double> y)
      : interp(std::move(x), std::move(y)) {}
};

JumpKernel::JumpKernel(Subordinator sub, int dim, double cutoff) : sub_(sub), dim_(dim), cutoff_(cutoff) {
  if (dim != 2 && dim != 3) throw ConfigError("JumpKernel: dimension must be 2 or 3");
  if (!(cutoff > 0.0)) throw ConfigError("JumpKernel: cutoff must be positive");
  if (!sub_.has_jumps()) return;

  tail_intensity_ = tail_mass(cutoff_);
  small_variance_ = small_jump_variance(cutoff_);

  double r_max = 2.0 * cutoff_;
  while (tail_mass(r_max) >= kResidualTail * tail_intensity_) {
    r_max *= 2.0;
    if (r_max > 1e30) throw NumericError("JumpKernel: tail mass does not decay");
  }

  // log-log spline of j over [cutoff/1000, 2 r_max]
  const double log_lo = std::log(1e-3 * cutoff_);
  const double log_hi = std::log(2.0 * r_max);
  std::vector<double> xs(kSplineKnots), ys(kSplineKnots);
  for (int i = 0; i < kSplineKnots; ++i) {
    xs[i] = log_lo + (log_hi - log_lo) * double(i) / double(kSplineKnots - 1);
    const double j = jump_density(std::exp(xs[i]));
    if (!(j > 0.0)) {
      std::ostringstream msg;
      msg << "JumpKernel: jump density underflows at r=" << std::exp(xs[i]);
      throw NumericError(msg.str());
    }
    ys[i] = std::log(j);
  }
  const double dx = xs[1] - xs[0];
  auto spline = std::make_shared<Spline>(xs, ys);
  spline->log_lo = log_lo;
  spline->log_hi = log_hi;
  spline->log_j_lo = ys.front();
  spline->log_j_hi = ys.back();
  spline->slope_lo = (ys[1] - ys[0]) / dx;
  spline->slope_hi = (ys[kSplineKnots - 1] - ys[kSplineKnots - 2]) / dx;
  spline->exponential_tail = sub_.has_exponential_tail();
  if (spline->exponential_tail) {
    const double r1 = std::exp(xs[kSplineKnots - 2]);
    const double r2 = std::exp(xs[kSplineKnots - 1]);
    spline->exp_rate = -(ys[kSplineKnots - 1] - ys[kSplineKnots - 2]) / (r2 - r1);
  }
  spline_ = std::move(spline);

  // Inverse-CDF table: bin masses by 4-point Gauss-Legendre in log r.
  static constexpr double gl_x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                     0.8611363115940526};
  static constexpr double gl_w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                     0.3478548451374538};
  table_radii_.resize(kTableRadii);
  table_cdf_.resize(kTableRadii);
  const double lc = std::log(cutoff_);
  const double lm = std::log(r_max);
  for (int i = 0; i < kTableRadii; ++i) {
    table_radii_[i] = std::exp(lc + (lm - lc) * double(i) / double(kTableRadii - 1));
  }
  table_radii_.front() = cutoff_;
  const double s = unit_sphere_area(dim_);
  double cumulative = 0.0;
  table_cdf_[0] = 0.0;
  for (int i = 0; i + 1 < kTableRadii; ++i) {
    const double a = std::log(table_radii_[i]);
    const double b = std::log(table_radii_[i + 1]);
    double mass = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double lr = 0.5 * (a + b) + 0.5 * (b - a) * gl_x[q];
      const double r = std::exp(lr);
      mass += gl_w[q] * jump_density_fast(r) * std::pow(r, dim_);
    }
    cumulative += 0.5 * (b - a) * mass * s;
    table_cdf_[i + 1] = cumulative;
  }
  // The residual tail beyond r_max is folded into the last bin.
  const double total = std::max(cumulative, tail_intensity_);
  for (auto& c : table_cdf_) c /= total;
  table_cdf_.back() = 1.0;
}

double JumpKernel::jump_density(double r) const {
  if (!(r > 0.0)) throw DomainError("jump_density: r must be positive");
  if (!sub_.has_jumps()) return 0.0;
  const double d = dim_;
  // t = r² u makes the heat-kernel factor scale free.
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double g = std::exp(-0.25 / u);
    if (g == 0.0) return 0.0;
    return std::pow(4.0 * std::numbers::pi * u, -0.5 * d) * g * sub_.levy_density(r * r * u);
  };
  return std::pow(r, 2.0 - d) * detail::integrate_half_line("jump_density", f, 1e-10);
}

double JumpKernel::jump_density_fast(double r) const {
  if (!sub_.has_jumps()) return 0.0;
  if (!(r > 0.0)) throw DomainError("jump_density_fast: r must be positive");
  const Spline& sp = *spline_;
  const double lr = std::log(r);
  if (lr < sp.log_lo) return std::exp(sp.log_j_lo + sp.slope_lo * (lr - sp.log_lo));
  if (lr > sp.log_hi) {
    if (sp.exponential_tail) {
      return std::exp(sp.log_j_hi - sp.exp_rate * (r - std::exp(sp.log_hi)));
    }
    return std::exp(sp.log_j_hi + sp.slope_hi * (lr - sp.log_hi));
  }
  return std::exp(sp.interp(lr));
}

double JumpKernel::tail_mass(double delta) const {
  if (!(delta > 0.0)) throw DomainError("tail_mass: delta must be positive");
  if (!sub_.has_jumps()) return 0.0;
  // Λ(δ) = ∫ m(t) P(|W_t| > δ) dt with |W_t|²/(4t) ~ Gamma(d/2); t = δ² u.
  const double half_d = 0.5 * dim_;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double q = boost::math::gamma_q(half_d, 0.25 / u);
    if (q == 0.0) return 0.0;
    return sub_.levy_density(delta * delta * u) * q;
  };
  return delta * delta * detail::integrate_half_line("tail_mass", f, 1e-11);
}

double JumpKernel::small_jump_variance(double delta) const {
  if (!(delta > 0.0)) throw DomainError("small_jump_variance: delta must be positive");
  if (!sub_.has_jumps()) return 0.0;
  // (1/d) E|W_t|² 1{|W_t| ≤ δ} = 2t P(d/2 + 1, δ²/(4t)); t = δ² u.
  const double k = 0.5 * dim_ + 1.0;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double t = delta * delta * u;
    return 2.0 * sub_.levy_density_times_power(t, 1.0) * boost::math::gamma_p(k, 0.25 / u);
  };
  return delta * delta * detail::integrate_half_line("small_jump_variance", f, 1e-11);
}

double JumpKernel::radius_quantile(double u) const {
  const auto it = std::upper_bound(table_cdf_.begin(), table_cdf_.end(), u);
  std::size_t i = std::size_t(it - table_cdf_.begin());
  i = std::clamp<std::size_t>(i, 1, table_cdf_.size() - 1) - 1;
  const double c0 = table_cdf_[i];
  const double c1 = table_cdf_[i + 1];
  const double w = c1 > c0 ? std::clamp((u - c0) / (c1 - c0), 0.0, 1.0) : 0.0;
  return table_radii_[i] * std::pow(table_radii_[i + 1] / table_radii_[i], w);
}

Vec3 JumpKernel::sample_jump(Rng& rng) const {
  const double r = radius_quantile(uniform01(rng));
  if (dim_ == 2) {
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    return polar(r, theta);
  }
  Vec3 g{std_normal(rng), std_normal(rng), std_normal(rng)};
  return normalized(g) * r;
}

}  // namespace sbm
