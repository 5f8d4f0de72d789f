#pragma once

#include <string>
#include <string_view>

namespace sbm {

enum class Family { stable_mixture, mixed_stable, relativistic, geometric_stable, brownian_only };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

/// Subordinator with unit drift: φ(λ) = λ + ∫(1 − e^{−λt}) m(t) dt.
///
/// Shipped families (a = α/2, b = β/2):
///   stable_mixture    φ = λ + λ^a
///   mixed_stable      φ = λ + λ^a + λ^b,            0 < β < α < 2
///   relativistic      φ = λ + (M^{1/a} + λ)^a − M,  mass M > 0
///   geometric_stable  φ = λ + ln(1 + λ^a),          0 < α ≤ 2
///   brownian_only     φ = λ
/// Values are immutable after construction.
class Subordinator {
 public:
  static Subordinator stable_mixture(double alpha);
  static Subordinator mixed_stable(double alpha, double beta);
  static Subordinator relativistic(double alpha, double mass);
  static Subordinator geometric_stable(double alpha);
  static Subordinator brownian_only();

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double mass() const { return mass_; }
  double drift() const { return 1.0; }
  bool has_jumps() const { return family_ != Family::brownian_only; }

  /// φ(λ) in closed form. Throws DomainError for λ ≤ 0.
  double laplace_exponent(double lambda) const;

  /// m(t). Throws DomainError for t ≤ 0 or when the family has no jump part.
  double levy_density(double t) const;

  /// t^p m(t), evaluated without overflow for tiny t.
  double levy_density_times_power(double t, double p) const;

  /// Exponent a of the leading small-time behaviour m(t) ~ c t^{−1−a} (0 for the
  /// geometric family, whose density behaves like a/t).
  double small_time_index() const;

  /// True when m decays exponentially at infinity (relativistic, gamma).
  bool has_exponential_tail() const;

  std::string describe() const;

 private:
  Subordinator(Family f, double alpha, double beta, double mass)
      : family_(f), alpha_(alpha), beta_(beta), mass_(mass) {}

  Family family_;
  double alpha_;
  double beta_;
  double mass_;
};

/// Mittag-Leffler function E_a(−x) for 0 < a ≤ 1, x ≥ 0.
double mittag_leffler_neg(double a, double x);

struct ConditionReport {
  double doubling_constant = 0.0;
  int cm_violations = 0;
};

/// Numerical validation of the regularity condition on m: the doubling constant
/// sup m(r)/m(2r) over a geometric grid in (0, K], and sign violations of
/// (−1)^n Δ^n m for n = 1..4 using divided differences on the same grid.
ConditionReport check_condition(const Subordinator& sub, double K, int grid_size);

}  // namespace sbm
