#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hedging.hpp"

using namespace vallois;

namespace {

const ConvexPayoff kLinear = ConvexPayoff::parse("linear");
const ConvexPayoff kConst = ConvexPayoff::parse("const:c=2.5");
const ConvexPayoff kCall1 = ConvexPayoff::parse("call_on_L:K=1");

EmbeddingMap sym_exp_map() { return build_psi(SymmetricMarginal::sym_exp()); }

}  // namespace

TEST_CASE("payoff parsing and evaluation") {
  CHECK(kLinear.value(0.7) == doctest::Approx(0.7));
  CHECK(kLinear.right_derivative(0.0) == 1.0);
  CHECK(kConst.value(3.0) == 2.5);
  CHECK(kCall1.value(0.5) == 0.0);
  CHECK(kCall1.value(2.0) == doctest::Approx(1.0));
  CHECK(kCall1.slope_inf() == doctest::Approx(1.0));
  const auto pwl = ConvexPayoff::parse("pwl:[(0.5,1),(2,0.25)]");
  CHECK(pwl.atoms.size() == 2);
  CHECK(pwl.value(3.0) == doctest::Approx(2.5 + 0.25));
  CHECK_THROWS_AS(ConvexPayoff::parse("pwl:[(2,1),(0.5,1)]"), Error);
  CHECK_THROWS_AS(ConvexPayoff::parse("garbage"), Error);
  CHECK_THROWS_AS(ConvexPayoff::parse("call_on_L:K=oops"), Error);
}

TEST_CASE("super hedge of the linear payoff") {
  const auto plan = build_super_hedge(kLinear, sym_exp_map());
  CHECK(plan.a_plus(0.3) == doctest::Approx(1.0));
  CHECK(plan.a_minus(0.7) == doctest::Approx(-1.0));
  for (double x : {0.1, 0.5, 2.0}) {
    CHECK(plan.h(x) == doctest::Approx(x).epsilon(1e-8));
    CHECK(plan.h(-x) == doctest::Approx(x).epsilon(1e-8));
  }
  // mu(|x|) = 2 int x e^{-2x} = 1/2
  CHECK(plan.price() == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("super hedge of a constant payoff") {
  const auto plan = build_super_hedge(kConst, sym_exp_map());
  CHECK(plan.a_plus(0.5) == doctest::Approx(0.0));
  CHECK(plan.h(1.3) == doctest::Approx(2.5));
  CHECK(plan.price() == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(eval_delta(plan, 0.4, 0.2) == doctest::Approx(0.0));
}

TEST_CASE("super hedge of the local-time call, K = 1") {
  const auto plan = build_super_hedge(kCall1, sym_exp_map());
  // A_+(l) = exp(2 (sqrt(l ^ 1) - 1)) for gamma(l) = 2 sqrt(l)
  for (double l : {0.1, 0.5, 1.0, 3.0}) {
    const double expected = std::exp(2.0 * (std::sqrt(std::min(l, 1.0)) - 1.0));
    CHECK(plan.a_plus(l) == doctest::Approx(expected).epsilon(1e-6));
  }
  // price = 1.5 e^{-2} from the closed form int_1^inf e^{-2 sqrt(l)} dl
  CHECK(plan.price() == doctest::Approx(1.5 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("analytic price examples") {
  const auto map = sym_exp_map();
  CHECK(analytic_price(kLinear, map) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(analytic_price(kConst, map) == doctest::Approx(2.5));
  CHECK(analytic_price(kCall1, map) ==
        doctest::Approx(1.5 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("duality: super price equals the analytic price") {
  const auto map = sym_exp_map();
  const auto mu2_map = build_psi(SymmetricMarginal::mu2_example());
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> uk(0.02, 6.0);
  std::uniform_real_distribution<double> uw(0.1, 2.0);
  std::uniform_int_distribution<int> un(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    ConvexPayoff payoff;
    payoff.f0 = trial % 3 == 0 ? 0.4 : 0.0;
    payoff.slope0 = trial % 2 == 0 ? 0.5 : 0.0;
    std::vector<double> ks;
    for (int i = un(gen); i > 0; --i) ks.push_back(uk(gen));
    std::sort(ks.begin(), ks.end());
    for (double k : ks) {
      if (!payoff.atoms.empty() && k <= payoff.atoms.back().k + 1e-3) continue;
      payoff.atoms.push_back({k, uw(gen)});
    }
    const auto& m = trial % 2 == 0 ? map : mu2_map;
    const auto plan = build_super_hedge(payoff, m);
    CHECK(plan.price() == doctest::Approx(analytic_price(payoff, m)).epsilon(1e-6));
  }
}

TEST_CASE("sub hedge of the linear payoff matches the super price") {
  const auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  const auto plan = build_sub_hedge(kLinear, rev);
  CHECK(plan.a_plus(0.2) == doctest::Approx(1.0));
  CHECK(plan.h(0.8) == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(plan.price() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("sub hedge of a constant payoff") {
  const auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  const auto plan = build_sub_hedge(kConst, rev);
  CHECK(plan.h(0.9) == doctest::Approx(2.5));
  CHECK(plan.price() == doctest::Approx(2.5).epsilon(1e-8));
}

TEST_CASE("sub price is below the super price for the call") {
  const auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  const auto sub = build_sub_hedge(kCall1, rev);
  const auto super = build_super_hedge(kCall1, sym_exp_map());
  CHECK(sub.price() < super.price());
  // K = 1 exceeds l_top ~ 0.822: the reversed rule never charges the atom
  CHECK(sub.price() == doctest::Approx(0.0).epsilon(1e-8));

  // a reachable strike gives a positive lower bound below the upper one
  const auto call_quarter = ConvexPayoff::parse("call_on_L:K=0.25");
  const auto sub_q = build_sub_hedge(call_quarter, rev);
  const auto super_q = build_super_hedge(call_quarter, sym_exp_map());
  CHECK(sub_q.price() > 0.0);
  CHECK(sub_q.price() < super_q.price());
  // oracle: E[(L - K)^+] = int_K^{l_top} exp(-gamma_rev) under the reversed rule
  const double oracle =
      integrate([&](double l) { return rev.local_time_tail(l); }, 0.25, rev.l_top());
  CHECK(sub_q.price() == doctest::Approx(oracle).epsilon(2e-5));
}

TEST_CASE("sub-side ordering holds for random payoffs") {
  const auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  const auto map = sym_exp_map();
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> uk(0.05, 2.0);
  std::uniform_real_distribution<double> uw(0.1, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    ConvexPayoff payoff;
    payoff.slope0 = trial % 2 ? 0.0 : 0.3;
    payoff.atoms.push_back({uk(gen), uw(gen)});
    const auto sub = build_sub_hedge(payoff, rev);
    const auto super = build_super_hedge(payoff, map);
    CHECK(sub.price() <= super.price() + 1e-8);
  }
}

TEST_CASE("eval_delta examples") {
  const auto plan = build_super_hedge(kLinear, sym_exp_map());
  CHECK(eval_delta(plan, 0.3, 0.7) == doctest::Approx(1.0));
  CHECK(eval_delta(plan, -0.3, 0.7) == doctest::Approx(1.0));  // -A_-
}

TEST_CASE("eval_u examples") {
  const auto plan = build_super_hedge(kLinear, sym_exp_map());
  for (double l : {0.2, 1.0, 2.5}) {
    const double x = std::sqrt(l);  // phi(l)
    CHECK(eval_u(plan, x, l) == doctest::Approx(l - std::sqrt(l)).epsilon(1e-6));
  }
  const auto flat = build_super_hedge(kConst, sym_exp_map());
  CHECK(eval_u(flat, 0.4, 1.1) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("property: u dominates F - H with equality at the barrier") {
  const auto plan = build_super_hedge(kCall1, sym_exp_map());
  for (double l : {0.3, 1.0, 2.0}) {
    double min_gap = 1e300;
    for (int i = -400; i <= 400; ++i) {
      const double x = i * 0.02;
      const double gap = eval_u(plan, x, l) - (plan.payoff().value(l) - plan.h(x));
      CHECK(gap >= -1e-7);
      min_gap = std::min(min_gap, gap);
    }
    CHECK(min_gap == doctest::Approx(0.0).epsilon(1e-4));
    // exact touch at the barrier itself (for l >= K the contact set is the
    // whole ray beyond the atom image, so only x = +-phi(l) is certain)
    for (double sgn : {1.0, -1.0}) {
      const double xb = sgn * plan.phi_plus(l);
      const double gap = eval_u(plan, xb, l) - (plan.payoff().value(l) - plan.h(xb));
      CHECK(std::abs(gap) <= 1e-8);
    }
  }
}

TEST_CASE("check_relations examples") {
  const auto linear_plan = build_super_hedge(kLinear, sym_exp_map());
  const auto r_linear = check_relations(linear_plan);
  CHECK(r_linear.max_r1 == 0.0);
  CHECK(r_linear.max_r2 == doctest::Approx(0.0).epsilon(1e-9));

  const auto call_plan = build_super_hedge(kCall1, sym_exp_map());
  const auto r_call = check_relations(call_plan);
  CHECK(r_call.max_r1 <= 1e-6);
  CHECK(r_call.max_r2 <= 1e-6);

  const auto const_plan = build_super_hedge(kConst, sym_exp_map());
  const auto r_const = check_relations(const_plan);
  CHECK(r_const.max_r1 == 0.0);
}

TEST_CASE("boundedness: |A| <= 3 max(|F'(0)|, |F'(inf)|)") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> uk(0.05, 4.0);
  const auto map = sym_exp_map();
  for (int trial = 0; trial < 10; ++trial) {
    ConvexPayoff payoff;
    payoff.slope0 = trial % 2 ? -0.4 : 0.2;
    payoff.atoms.push_back({uk(gen), 1.0});
    const auto plan = build_super_hedge(payoff, map);
    CHECK(plan.a_norm() <= 3.0 * payoff.lipschitz() + 1e-12);
  }
}

TEST_CASE("convexity: H' nondecreasing on the positive half-line (super)") {
  const auto plan = build_super_hedge(kCall1, sym_exp_map());
  double prev = -1e300;
  for (double x = 0.01; x < 8.0; x += 0.01) {
    const double d = (plan.h(x + 5e-4) - plan.h(x - 5e-4)) / 1e-3;
    CHECK(d >= prev - 1e-6);
    prev = d;
  }
}

TEST_CASE("concavity: H' nonincreasing on the positive half-line (sub)") {
  const auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  const auto plan = build_sub_hedge(ConvexPayoff::parse("call_on_L:K=0.25"), rev);
  double prev = 1e300;
  for (double x = 0.02; x < 8.0; x += 0.01) {
    const double d = (plan.h(x + 5e-4) - plan.h(x - 5e-4)) / 1e-3;
    CHECK(d <= prev + 1e-6);
    prev = d;
  }
}

TEST_CASE("super hedge on the general (asymmetric) embedding") {
  // centered two-sided exponential with different rates:
  // c+ e^{-x} on x > 0, c- e^{2x} on x < 0, c+ = 1/3, c- = 4/3.
  AsymmetricDensity skew;
  skew.density = [](double x) {
    return x >= 0.0 ? std::exp(-x) / 3.0 : 4.0 / 3.0 * std::exp(2.0 * x);
  };
  skew.tail = [](double x) {
    return x >= 0.0 ? std::exp(-x) / 3.0 : 1.0 - 2.0 / 3.0 * std::exp(2.0 * x);
  };
  skew.x_lo = -16.0;
  skew.x_hi = 40.0;
  const auto gen_map = build_phi_general(skew);
  const auto plan = build_super_hedge(kLinear, gen_map);
  CHECK(plan.a_plus(0.4) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(plan.a_minus(0.4) == doctest::Approx(-1.0).epsilon(1e-6));
  // price = E|X| = 2 (c+/1 - ... ) : int |x| mu = c+ * 1 + c- * (1/4) = 2/3
  CHECK(plan.price() == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  const auto rel = check_relations(plan);
  CHECK(rel.max_r1 <= 1e-5);
  CHECK(rel.max_r2 <= 1e-4);

  // one-atom payoff: duality against E[F(L_tau)] = F(0) + int F' e^{-gamma}
  const auto call = ConvexPayoff::parse("call_on_L:K=0.5");
  const auto plan2 = build_super_hedge(call, gen_map);
  const double oracle =
      integrate([&](double l) { return gen_map.local_time_tail(l); }, 0.5, gen_map.l_max());
  CHECK(plan2.price() == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("DomainExceeded for an unreachable atom") {
  const auto map = sym_exp_map();
  ConvexPayoff payoff;
  payoff.atoms.push_back({map.l_max() * 2.0, 1.0});
  CHECK_THROWS_WITH_AS(build_super_hedge(payoff, map), doctest::Contains("DomainExceeded"),
                       Error);
  CHECK_THROWS_AS(analytic_price(payoff, map), Error);
}
