#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "marginal.hpp"

using namespace vallois;

TEST_CASE("tail mass at zero is one half") {
  for (const auto& m : {SymmetricMarginal::sym_exp(), SymmetricMarginal::mu2_example(),
                        SymmetricMarginal::gaussian(1.0)}) {
    CHECK(tail_mass(*m, 0.0) == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("sym_exp tail closed form") {
  auto m = SymmetricMarginal::sym_exp();
  CHECK(tail_mass(*m, 1.0) == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-8));
  CHECK(m->abs_moment() == doctest::Approx(0.5));
}

TEST_CASE("mu2 tail closed form at 1") {
  auto m = SymmetricMarginal::mu2_example();
  // primitive of (5/2) y^3 exp(-5y^4/4) is -exp(-5y^4/4)/2
  CHECK(tail_mass(*m, 1.0) == doctest::Approx(0.5 * std::exp(-1.25)).epsilon(1e-8));
  CHECK(m->density(1.0 - 1e-9) == doctest::Approx(m->density(1.0 + 1e-9)).epsilon(1e-6));
}

TEST_CASE("mu2 alpha solves delta(1) = alpha * delta_tail(1)") {
  auto m = SymmetricMarginal::mu2_example();
  const double target = (2.5 * std::exp(-1.25) - std::exp(-2.0)) /
                        ((std::exp(-1.25) - std::exp(-2.0)) / 2.0);
  CHECK(std::abs(m->mu2_alpha() - target) < 1e-10);
  CHECK(m->mu2_alpha() == doctest::Approx(7.686).epsilon(1e-3));
}

TEST_CASE("tail_mass rejects negative x") {
  auto m = SymmetricMarginal::sym_exp();
  CHECK_THROWS_AS(tail_mass(*m, -0.5), Error);
}

TEST_CASE("validate_marginal passes the builtins") {
  CHECK(validate_marginal(*SymmetricMarginal::sym_exp()).all_pass());
  CHECK(validate_marginal(*SymmetricMarginal::gaussian(1.0)).all_pass());
  CHECK(validate_marginal(*SymmetricMarginal::mu2_example()).all_pass());
}

TEST_CASE("validate_marginal flags a negative tabulated entry") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 40; ++i) {
    const double x = i * 0.25;
    pts.emplace_back(x, std::exp(-2.0 * x));
  }
  pts[10].second = -0.05;
  auto m = SymmetricMarginal::tabulated(pts);
  const auto report = validate_marginal(*m);
  bool positivity_failed = false;
  for (const auto& c : report.checks) {
    if (c.name == "positivity") positivity_failed = !c.pass;
  }
  CHECK(positivity_failed);
}

TEST_CASE("tabulated grids must increase") {
  std::vector<std::pair<double, double>> pts{{0.0, 1.0}, {1.0, 0.5}, {1.0, 0.2}, {2.0, 0.1}};
  CHECK_THROWS_AS(SymmetricMarginal::tabulated(pts), Error);
}

TEST_CASE("convex order: identical marginals give zero spreads") {
  auto m = SymmetricMarginal::sym_exp();
  DeltaMu pair{m, m};
  const auto report = convex_order_check(pair, {0.0, 0.5, 1.0, 2.0});
  CHECK(report.pass);
  CHECK(std::abs(report.min_call_spread) < 1e-10);
}

TEST_CASE("convex order: the example pair passes") {
  DeltaMu pair{SymmetricMarginal::sym_exp(), SymmetricMarginal::mu2_example()};
  std::vector<double> strikes;
  for (int i = 0; i <= 40; ++i) strikes.push_back(i * 0.2);
  CHECK(convex_order_check(pair, strikes).pass);
}

TEST_CASE("convex order: shrinking gaussian variance fails") {
  DeltaMu pair{SymmetricMarginal::gaussian(1.0), SymmetricMarginal::gaussian(0.5)};
  std::vector<double> strikes{0.0, 0.25, 0.5, 1.0, 2.0};
  const auto report = convex_order_check(pair, strikes);
  CHECK_FALSE(report.pass);
  CHECK(report.min_call_spread < -1e-3);
}

TEST_CASE("convex_order_check needs strikes") {
  DeltaMu pair{SymmetricMarginal::sym_exp(), SymmetricMarginal::sym_exp()};
  CHECK_THROWS_AS(convex_order_check(pair, {}), Error);
}

TEST_CASE("property: tail + lower mass = 1/2 on a random grid") {
  std::mt19937 gen(42);
  for (const auto& m : {SymmetricMarginal::sym_exp(), SymmetricMarginal::gaussian(0.7)}) {
    std::uniform_real_distribution<double> ux(0.0, 0.8 * m->x_max());
    for (int i = 0; i < 25; ++i) {
      const double x = ux(gen);
      const double upper = tail_mass(*m, x);
      const double lower = integrate([&](double y) { return m->density(y); }, 0.0, x);
      CHECK(upper + lower == doctest::Approx(0.5).epsilon(1e-8));
    }
  }
}

TEST_CASE("property: tabulated sampling of a builtin reproduces its tail") {
  for (const auto& src : {SymmetricMarginal::sym_exp(), SymmetricMarginal::gaussian(1.0)}) {
    std::vector<std::pair<double, double>> pts;
    const double x_min = 1e-6 * src->x_max();
    for (int i = 0; i < 2000; ++i) {
      const double x = x_min * std::pow(src->x_max() / x_min, i / 1999.0);
      pts.emplace_back(x, src->density(x));
    }
    auto tab = SymmetricMarginal::tabulated(pts);
    for (double x : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      CHECK(tail_mass(*tab, x) == doctest::Approx(src->tail(x)).epsilon(1e-6));
      CHECK(tab->tail(x) == doctest::Approx(src->tail(x)).epsilon(1e-6));
    }
  }
}

TEST_CASE("json loading") {
  auto m = SymmetricMarginal::from_json(R"({"kind":"builtin","name":"sym_exp"})");
  CHECK(m->spec().name == "sym_exp");
  auto g = SymmetricMarginal::from_json(R"({"kind":"builtin","name":"gaussian","params":{"t":0.5}})");
  CHECK(g->spec().param == doctest::Approx(0.5));
  auto tab = SymmetricMarginal::from_json(
      R"({"kind":"tabulated","points":[[0.1,1.0],[0.5,0.6],[1.0,0.3],[2.0,0.05],[4.0,0.001]]})");
  CHECK(tab->spec().kind == DensitySpec::Kind::tabulated);
  CHECK_THROWS_AS(SymmetricMarginal::from_json("{\"kind\":\"builtin\",\"name\":\"nope\"}"), Error);
  CHECK_THROWS_AS(SymmetricMarginal::from_json("not json"), Error);
}

TEST_CASE("name parsing") {
  CHECK(SymmetricMarginal::from_name("sym_exp")->label() == "sym_exp");
  CHECK(SymmetricMarginal::from_name("gaussian:t=0.25")->spec().param == doctest::Approx(0.25));
  CHECK_THROWS_AS(SymmetricMarginal::from_name("unknown"), Error);
  CHECK_THROWS_AS(SymmetricMarginal::from_name("gaussian:q=1"), Error);
}

TEST_CASE("delta mu of the example pair") {
  DeltaMu pair{SymmetricMarginal::sym_exp(), SymmetricMarginal::mu2_example()};
  CHECK(pair.delta_tail(0.0) == doctest::Approx(0.0).epsilon(1e-8));
  // delta(1) = 2.5 e^{-5/4} - e^{-2} > 0, delta < 0 near zero
  CHECK(pair.delta_density(1.0) == doctest::Approx(2.5 * std::exp(-1.25) - std::exp(-2.0)));
  CHECK(pair.delta_density(0.05) < 0.0);
}
