#include "sbm/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "quadrature.hpp"
#include "sbm/error.hpp"

namespace sbm {

namespace {

void require_open(double v, double lo, double hi, const char* what) {
  if (!(v > lo && v < hi)) {
    std::ostringstream msg;
    msg << what << " = " << v << " must lie in (" << lo << ", " << hi << ")";
    throw ConfigError(msg.str());
  }
}

// a / Γ(1 − a): normalizes t^{−1−a} so that ∫(1 − e^{−λt}) m = λ^a.
double stable_constant(double a) { return a / std::tgamma(1.0 - a); }

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::stable_mixture: return "stable_mixture";
    case Family::mixed_stable: return "mixed_stable";
    case Family::relativistic: return "relativistic";
    case Family::geometric_stable: return "geometric_stable";
    case Family::brownian_only: return "brownian_only";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::stable_mixture, Family::mixed_stable, Family::relativistic,
                 Family::geometric_stable, Family::brownian_only}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown subordinator family '" + std::string(name) + "'");
}

Subordinator Subordinator::stable_mixture(double alpha) {
  require_open(alpha, 0.0, 2.0, "alpha");
  return {Family::stable_mixture, alpha, 0.0, 0.0};
}

Subordinator Subordinator::mixed_stable(double alpha, double beta) {
  require_open(alpha, 0.0, 2.0, "alpha");
  require_open(beta, 0.0, alpha, "beta");
  return {Family::mixed_stable, alpha, beta, 0.0};
}

Subordinator Subordinator::relativistic(double alpha, double mass) {
  require_open(alpha, 0.0, 2.0, "alpha");
  if (!(mass > 0.0 && std::isfinite(mass))) throw ConfigError("relativistic mass must be positive");
  return {Family::relativistic, alpha, 0.0, mass};
}

Subordinator Subordinator::geometric_stable(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("geometric_stable alpha must lie in (0, 2]");
  return {Family::geometric_stable, alpha, 0.0, 0.0};
}

Subordinator Subordinator::brownian_only() { return {Family::brownian_only, 0.0, 0.0, 0.0}; }

double Subordinator::laplace_exponent(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("laplace_exponent: lambda must be positive");
  const double a = alpha_ / 2.0;
  switch (family_) {
    case Family::stable_mixture: return lambda + std::pow(lambda, a);
    case Family::mixed_stable: return lambda + std::pow(lambda, a) + std::pow(lambda, beta_ / 2.0);
    case Family::relativistic: {
      const double mu = std::pow(mass_, 1.0 / a);
      return lambda + (std::pow(mu + lambda, a) - mass_);
    }
    case Family::geometric_stable: return lambda + std::log1p(std::pow(lambda, a));
    case Family::brownian_only: return lambda;
  }
  return lambda;
}

double mittag_leffler_neg(double a, double x) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("mittag_leffler_neg: a must lie in (0, 1]");
  if (x < 0.0) throw DomainError("mittag_leffler_neg: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (a == 1.0) return std::exp(-x);
  if (x < 0.25) {
    double sum = 0.0;
    double p = 1.0;
    for (int k = 0; k < 60; ++k) {
      const double term = p / std::tgamma(a * k + 1.0);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
      p *= -x;
    }
    return sum;
  }
  // E_a(−t^a) = (sin aπ / π) ∫_0^∞ e^{−s} s^{a−1} t^{−a} / ((s/t)^{2a} + 2 (s/t)^a cos aπ + 1) ds
  const double t = std::pow(x, 1.0 / a);
  const double c = std::cos(a * std::numbers::pi);
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double q = std::pow(s / t, a);
    return std::exp(-s) * std::pow(s, a - 1.0) / (q * q + 2.0 * q * c + 1.0);
  };
  const double integral = detail::integrate_half_line("mittag_leffler_neg", f, 1e-13);
  return std::sin(a * std::numbers::pi) / std::numbers::pi * std::pow(t, -a) * integral;
}

double Subordinator::levy_density(double t) const {
  if (family_ == Family::brownian_only) throw DomainError("levy_density: brownian_only has no jump part");
  if (!(t > 0.0)) throw DomainError("levy_density: t must be positive");
  const double a = alpha_ / 2.0;
  switch (family_) {
    case Family::stable_mixture: return stable_constant(a) * std::pow(t, -1.0 - a);
    case Family::mixed_stable: {
      const double b = beta_ / 2.0;
      return stable_constant(a) * std::pow(t, -1.0 - a) + stable_constant(b) * std::pow(t, -1.0 - b);
    }
    case Family::relativistic: {
      const double mu = std::pow(mass_, 1.0 / a);
      return stable_constant(a) * std::exp(-mu * t) * std::pow(t, -1.0 - a);
    }
    case Family::geometric_stable:
      if (a == 1.0) return std::exp(-t) / t;
      return a / t * mittag_leffler_neg(a, std::pow(t, a));
    case Family::brownian_only: break;
  }
  return 0.0;
}

double Subordinator::levy_density_times_power(double t, double p) const {
  if (family_ == Family::brownian_only) throw DomainError("levy_density: brownian_only has no jump part");
  if (!(t > 0.0)) throw DomainError("levy_density: t must be positive");
  const double a = alpha_ / 2.0;
  switch (family_) {
    case Family::stable_mixture: return stable_constant(a) * std::pow(t, p - 1.0 - a);
    case Family::mixed_stable: {
      const double b = beta_ / 2.0;
      return stable_constant(a) * std::pow(t, p - 1.0 - a) + stable_constant(b) * std::pow(t, p - 1.0 - b);
    }
    case Family::relativistic: {
      const double mu = std::pow(mass_, 1.0 / a);
      return stable_constant(a) * std::exp(-mu * t) * std::pow(t, p - 1.0 - a);
    }
    case Family::geometric_stable:
      if (a == 1.0) return std::exp(-t) * std::pow(t, p - 1.0);
      return a * std::pow(t, p - 1.0) * mittag_leffler_neg(a, std::pow(t, a));
    case Family::brownian_only: break;
  }
  return 0.0;
}

double Subordinator::small_time_index() const {
  switch (family_) {
    case Family::stable_mixture:
    case Family::mixed_stable:
    case Family::relativistic: return alpha_ / 2.0;
    default: return 0.0;
  }
}

bool Subordinator::has_exponential_tail() const {
  return family_ == Family::relativistic || (family_ == Family::geometric_stable && alpha_ == 2.0);
}

std::string Subordinator::describe() const {
  std::ostringstream s;
  s << to_string(family_);
  if (family_ != Family::brownian_only) s << "(alpha=" << alpha_;
  if (family_ == Family::mixed_stable) s << ", beta=" << beta_;
  if (family_ == Family::relativistic) s << ", mass=" << mass_;
  if (family_ != Family::brownian_only) s << ")";
  return s.str();
}

ConditionReport check_condition(const Subordinator& sub, double K, int grid_size) {
  if (!sub.has_jumps()) throw DomainError("check_condition: brownian_only has no jump part");
  if (!(K > 0.0)) throw DomainError("check_condition: K must be positive");
  if (grid_size < 16) throw DomainError("check_condition: grid_size must be at least 16");

  // Six decades below K, K included.
  const int n = grid_size;
  std::vector<double> r(n), m(n);
  for (int i = 0; i < n; ++i) {
    r[i] = K * std::pow(10.0, -6.0 * double(n - 1 - i) / double(n - 1));
    m[i] = sub.levy_density(r[i]);
  }

  ConditionReport report;
  for (int i = 0; i < n; ++i) {
    report.doubling_constant = std::max(report.doubling_constant, m[i] / sub.levy_density(2.0 * r[i]));
  }

  constexpr double kTol = 1e-8;
  std::vector<double> dd = m;  // divided differences of the current order
  double factorial = 1.0;
  for (int order = 1; order <= 4; ++order) {
    factorial *= order;
    std::vector<double> next(n - order);
    for (int i = 0; i + order < n; ++i) {
      next[i] = (dd[i + 1] - dd[i]) / (r[i + order] - r[i]);
    }
    dd = std::move(next);
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    for (int i = 0; i + order < n; ++i) {
      const double hbar = (r[i + order] - r[i]) / order;
      const double scaled = factorial * dd[i] * std::pow(hbar, order);
      double mmax = 0.0;
      for (int k = i; k <= i + order; ++k) mmax = std::max(mmax, std::abs(m[k]));
      if (sign * scaled < -kTol * mmax) ++report.cm_violations;
    }
  }
  return report;
}

}  // namespace sbm
