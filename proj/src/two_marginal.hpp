#pragma once

#include <optional>
#include <vector>

#include "embedding.hpp"

namespace vallois {

enum class Psi2Regime { mu2, delta };

struct AssumptionsReport {
  bool neg_near_zero = false;       // delta mu <= 0, not identically 0, near 0
  bool positive_in_delta = false;   // delta mu > 0 wherever psi_1 < psi_2
  bool terminates = false;          // final regime one-sided up to x_max
  std::string certification;        // "finite-probe" when terminates holds
  double final_margin = 0.0;        // |psi_2 - psi_1| at x_max
  ConvexOrderReport convex_order;
  std::string detail;
  bool all_pass() const {
    return neg_near_zero && positive_in_delta && terminates && convex_order.pass;
  }
};

// The two-marginal barrier: psi_2 follows the mu2 integrand until it crosses
// psi_1, then the delta-mu integrand, alternating at each crossing. Stopping
// the continuation of the first embedding at |B| >= phi_2(L) embeds mu_2.
class TwoMarginalEmbedding : public StoppingBarrier {
 public:
  double psi1(double x) const;
  double psi2(double x) const { return psi2_of_x_(x); }
  double phi2(double l) const;
  // Exact derivative from the active regime's integrand.
  double psi2_prime(double x) const;
  double gamma2(double l) const { return gamma2_of_l_(std::max(l, 0.0)); }
  double gamma2_at_x(double x) const { return gamma2_of_x_(x); }
  Psi2Regime regime(double x) const;

  // Finite breakpoints (excluding x_0 = 0). Empty means the maps never cross.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  bool certified_infinite() const { return certified_infinite_; }
  const AssumptionsReport& report() const { return report_; }
  const EmbeddingMap* psi1_map() const {
    return psi1_ ? &*psi1_ : nullptr;
  }
  const DeltaMu& pair() const { return pair_; }
  double x_max() const { return x_max_; }

  // Density of the second stopped value predicted by the construction; the
  // embedding theorem says it coincides with mu_2.
  double implied_density(double x) const;
  // S_i(x) of the active regime's recursion (mu_2 tail on mu2 regimes,
  // delta-mu tail on delta regimes).
  double s_value(double x) const;

  bool exited(double b, double l) const override {
    const double ab = b < 0.0 ? -b : b;
    return ab >= x_max_ || psi2_of_x_(ab) >= l;
  }
  double phi_plus(double l) const override { return phi2(l); }
  double phi_minus(double l) const override { return -phi2(l); }

  // Degenerate single-marginal case: psi_1 treated as +infinity, so psi_2 is
  // the plain Vallois map of mu_2 and the density reduces to the S_0 branch.
  static TwoMarginalEmbedding single(const MarginalPtr& mu2);

 private:
  friend TwoMarginalEmbedding build_psi2(const DeltaMu&);
  TwoMarginalEmbedding() = default;
  std::size_t breakpoints_before(double x) const;

  DeltaMu pair_;
  std::optional<EmbeddingMap> psi1_;  // absent in the degenerate case
  std::vector<double> xs_, psi2_vals_, gamma2_vals_;
  Pchip psi2_of_x_, gamma2_of_x_, gamma2_of_l_;
  std::vector<double> breakpoints_;       // x_1 < x_2 < ...
  std::vector<double> break_levels_;      // l_j = psi_1(x_j) = psi_2(x_j)
  std::vector<double> s_coefficients_;    // partial alternating sums, j = 0, 1, ...
  bool certified_infinite_ = false;
  AssumptionsReport report_;
  double x_max_ = 0.0;
};

// Assumption checks alone (sign near zero, convex order, termination probe);
// runs a lightweight version of the construction.
AssumptionsReport check_assumptions(const DeltaMu& pair);

// Full construction; throws NonIncreasingPsi2 / DeltaTailVanishes when the
// delta-mu regime is invalid and AssumptionViolated when delta mu is not
// negative near zero.
TwoMarginalEmbedding build_psi2(const DeltaMu& pair);

double implied_density(const TwoMarginalEmbedding& t, double x);

}  // namespace vallois
