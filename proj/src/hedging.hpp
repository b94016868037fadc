#pragma once

#include <memory>
#include <string>
#include <vector>

#include "embedding.hpp"

namespace vallois {

// Lipschitz convex payoff F of the terminal local time, stored as
// F(0), F'(0) and the atoms of F'' (piecewise-linear convex F). Every
// integral in the hedge construction is then exact per segment.
struct ConvexPayoff {
  struct Atom {
    double k;  // local-time level
    double w;  // mass of F'' at k, > 0
  };

  double f0 = 0.0;
  double slope0 = 0.0;
  std::vector<Atom> atoms;  // strictly increasing k

  double value(double l) const;
  double right_derivative(double l) const;
  double slope_inf() const;
  double lipschitz() const;

  void check() const;  // throws on w <= 0 or non-increasing k

  // Mini-language: "linear", "const:c=<v>", "call_on_L:K=<k>",
  // "pwl:[(k,w),...]".
  static ConvexPayoff parse(const std::string& text);
  std::string describe() const;
};

enum class HedgeSide { super, sub };

struct RelationsReport {
  double max_r1 = 0.0;  // residual of the A_+/A_- vs F' identity
  double max_r2 = 0.0;  // residual of the H(phi_+) / H(phi_-) identity
};

// Semi-static hedge: hedge-ratio maps A_+/-, static payoff H, and its market
// price mu(H). Immutable; all evaluators are pure.
class HedgePlan {
 public:
  HedgeSide side() const { return side_; }
  const ConvexPayoff& payoff() const { return payoff_; }
  double price() const { return price_; }

  double a_plus(double l) const;
  double a_minus(double l) const;
  double h(double x) const;
  // Hedge ratio Delta = A_+(l) 1{x>0} - A_-(l) 1{x<=0}.
  double delta(double x, double l) const;
  // Value function u(x,l) of the verification argument.
  double u(double x, double l) const;

  double phi_plus(double l) const;
  double phi_minus(double l) const;
  const StoppingBarrier& barrier() const;

  double a_norm() const { return a_norm_; }
  double h_prime_norm() const { return h_prime_norm_; }
  // 5 (|A|_inf + |H'|_inf) sqrt(dt): tolerance for pathwise slack checks.
  double discretization_tolerance(double dt) const;

 private:
  friend HedgePlan build_super_hedge(const ConvexPayoff&, const EmbeddingMap&);
  friend HedgePlan build_super_hedge(const ConvexPayoff&, const GeneralEmbedding&);
  friend HedgePlan build_sub_hedge(const ConvexPayoff&, const ReversedEmbedding&);
  friend RelationsReport check_relations(const HedgePlan&);
  HedgePlan() = default;

  double gamma(double l) const;
  double l_domain() const;

  HedgeSide side_ = HedgeSide::super;
  ConvexPayoff payoff_;
  bool general_ = false;

  // Symmetric case: one of the two maps is set; atom data carries gamma(k_i).
  std::shared_ptr<const EmbeddingMap> fwd_;
  std::shared_ptr<const ReversedEmbedding> rev_;
  std::vector<double> atom_k_, atom_w_, atom_g_;
  Pchip h_of_absx_;

  // General (asymmetric) case.
  std::shared_ptr<const GeneralEmbedding> gen_;
  Pchip a_plus_of_l_, a_minus_of_l_;
  Pchip h_pos_, h_neg_;

  double price_ = 0.0;
  double a_norm_ = 0.0;
  double h_prime_norm_ = 0.0;
};

HedgePlan build_super_hedge(const ConvexPayoff& payoff, const EmbeddingMap& map);
HedgePlan build_super_hedge(const ConvexPayoff& payoff, const GeneralEmbedding& map);
HedgePlan build_sub_hedge(const ConvexPayoff& payoff, const ReversedEmbedding& map);

double eval_delta(const HedgePlan& plan, double x, double l);
double eval_u(const HedgePlan& plan, double x, double l);

// Residuals of the two structural identities over a 512-point grid.
RelationsReport check_relations(const HedgePlan& plan);

// Model price under the optimal measure: E F(L_tau) = F(0) + int F' e^{-gamma}.
// Independent of the hedge construction; equals the super price when there is
// no duality gap.
double analytic_price(const ConvexPayoff& payoff, const EmbeddingMap& map);

}  // namespace vallois
