#pragma once

// Thin wrappers over Boost.Math quadrature that convert silent inaccuracy into
// NumericError with diagnostics.

#include <cmath>
#include <limits>
#include <sstream>
#include <string_view>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sbm/error.hpp"

namespace sbm::detail {

inline void check_quadrature(std::string_view what, double value, double error, double l1, double tol) {
  if (!std::isfinite(value) || !(error <= tol * std::max(l1, 1e-300) * 100.0 + 1e-300)) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (value=" << value << ", error estimate=" << error
        << ", L1=" << l1 << ", tolerance=" << tol << ")";
    throw NumericError(msg.str());
  }
}

/// ∫_0^∞ f.
template <class F>
double integrate_half_line(std::string_view what, F&& f, double tol = 1e-12) {
  static thread_local boost::math::quadrature::exp_sinh<double> integrator(12);
  double error = 0.0;
  double l1 = 0.0;
  const double v = integrator.integrate(f, tol, &error, &l1);
  check_quadrature(what, v, error, l1, tol);
  return v;
}

/// ∫_a^b f on a finite interval with possible endpoint singularities.
template <class F>
double integrate_interval(std::string_view what, F&& f, double a, double b, double tol = 1e-12) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  double error = 0.0;
  double l1 = 0.0;
  const double v = integrator.integrate(f, a, b, tol, &error, &l1);
  check_quadrature(what, v, error, l1, tol);
  return v;
}

/// ∫_a^b f for smooth integrands.
template <class F>
double integrate_smooth(std::string_view what, F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 15) {
  double error = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &error, &l1);
  check_quadrature(what, v, error, l1, tol);
  return v;
}

}  // namespace sbm::detail
