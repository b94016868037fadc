#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace vallois {

// Adaptive Simpson quadrature with Richardson extrapolation.
// Relative tolerance with an absolute floor; throws Error(numeric,
// "NonFiniteDensity") if the integrand evaluates to NaN/Inf.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8, double abs_floor = 1e-14);

// Brent root finder on [a, b]; requires a sign change.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-12, int max_iter = 200);

// Monotonicity-preserving piecewise cubic interpolant (Fritsch-Carlson).
// Linear extrapolation with the endpoint slope outside [x.front(), x.back()].
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  bool empty() const { return x_.empty(); }

  // Solves interp(x) = target by bisection on [lo, hi] for a monotone
  // interpolant; tol is absolute in x.
  double invert(double target, double lo, double hi, double tol = 1e-10) const;

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_, y_, d_;  // knots, values, knot slopes
};

}  // namespace vallois
