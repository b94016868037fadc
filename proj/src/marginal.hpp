#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace vallois {

// How a symmetric density was specified: a named builtin or a tabulated grid
// of (x, density) points on the half-line x >= 0.
struct DensitySpec {
  enum class Kind { builtin, tabulated };
  Kind kind = Kind::builtin;
  std::string name;                               // builtin name
  double param = 0.0;                             // gaussian variance t
  std::vector<std::pair<double, double>> points;  // tabulated grid
};

// A centered symmetric probability distribution, represented by its density
// on the half-line; the full density is the even extension. tail(x) is
// mu([x, inf)), so tail(0) = 1/2.
class SymmetricMarginal {
 public:
  double density(double x) const { return density_(x); }
  double tail(double x) const { return tail_(x); }
  // CDF of the full (even-extended) distribution.
  double cdf(double x) const { return x >= 0.0 ? 1.0 - tail(x) : tail(-x); }
  double abs_moment() const { return abs_moment_; }
  double x_max() const { return x_max_; }
  const DensitySpec& spec() const { return spec_; }
  const std::string& label() const { return label_; }
  // Exponent of the mu2 family tail; zero for every other builtin.
  double mu2_alpha() const { return mu2_alpha_; }

  static std::shared_ptr<const SymmetricMarginal> sym_exp();
  static std::shared_ptr<const SymmetricMarginal> mu2_example();
  static std::shared_ptr<const SymmetricMarginal> gaussian(double t);
  static std::shared_ptr<const SymmetricMarginal> tabulated(
      std::vector<std::pair<double, double>> points);
  // {"kind":"builtin","name":...} or {"kind":"tabulated","points":[[x,d],...]}
  static std::shared_ptr<const SymmetricMarginal> from_json(const std::string& text);
  // Parses CLI-style names: "sym_exp", "mu2", "gaussian", "gaussian:t=0.5".
  static std::shared_ptr<const SymmetricMarginal> from_name(const std::string& name);

 private:
  SymmetricMarginal() = default;
  friend struct MarginalBuilder;

  std::function<double(double)> density_;
  std::function<double(double)> tail_;
  double abs_moment_ = 0.0;
  double x_max_ = 0.0;
  double mu2_alpha_ = 0.0;
  DensitySpec spec_;
  std::string label_;
};

using MarginalPtr = std::shared_ptr<const SymmetricMarginal>;

// A peacock candidate: delta = mu2 - mu1, with its signed density and tail.
struct DeltaMu {
  MarginalPtr mu1;
  MarginalPtr mu2;

  double delta_density(double x) const {
    return mu2->density(x) - mu1->density(x);
  }
  double delta_tail(double x) const { return mu2->tail(x) - mu1->tail(x); }
  double x_max() const { return std::max(mu1->x_max(), mu2->x_max()); }
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct ConvexOrderReport {
  double min_call_spread = 0.0;  // min over strikes of C_2(K) - C_1(K)
  double worst_strike = 0.0;
  bool pass = false;
};

// Tail mass mu([x, inf)) by adaptive quadrature of the density.
double tail_mass(const SymmetricMarginal& m, double x);

// Unit mass, positivity on the support, finite first absolute moment.
// Reports instead of throwing.
ValidationReport validate_marginal(const SymmetricMarginal& m);

// Checks mu1 <= mu2 in convex order via call prices on the strike grid.
ConvexOrderReport convex_order_check(const DeltaMu& pair,
                                     const std::vector<double>& strikes,
                                     double tolerance = 1e-7);

}  // namespace vallois
