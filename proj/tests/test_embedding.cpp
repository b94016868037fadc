#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "embedding.hpp"

using namespace vallois;

TEST_CASE("sym_exp: psi(x) = x^2 on the grid") {
  auto map = build_psi(SymmetricMarginal::sym_exp());
  CHECK(map.psi(0.0) == 0.0);
  for (double x : map.grid()) {
    CHECK(map.psi(x) == doctest::Approx(x * x).epsilon(1e-8));
  }
  // gamma(l) = 2 sqrt(l) for this marginal
  for (double l : {0.01, 0.25, 1.0, 4.0}) {
    CHECK(map.gamma(l) == doctest::Approx(2.0 * std::sqrt(l)).epsilon(1e-7));
  }
}

TEST_CASE("mu2: psi(x) = x^5 on [0, 1]") {
  auto map = build_psi(SymmetricMarginal::mu2_example());
  for (double x = 0.05; x <= 1.0; x += 0.05) {
    CHECK(map.psi(x) == doctest::Approx(std::pow(x, 5.0)).epsilon(1e-7));
  }
}

TEST_CASE("local time tail examples") {
  auto map = build_psi(SymmetricMarginal::sym_exp());
  CHECK(map.local_time_tail(0.0) == doctest::Approx(1.0));
  CHECK(map.local_time_tail(1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
  CHECK(map.local_time_tail(4.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-6));
  CHECK(local_time_tail(map, 1.0) == map.local_time_tail(1.0));
}

TEST_CASE("property: phi(psi(x)) round trip") {
  auto map = build_psi(SymmetricMarginal::mu2_example());
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> ux(1e-4, map.x_max());
  for (int i = 0; i < 100; ++i) {
    const double x = ux(gen);
    CHECK(std::abs(map.phi(map.psi(x)) - x) <= 1e-8 * (1.0 + x));
  }
}

TEST_CASE("property: tail identity exp(-gamma(psi(x))) = 2 R(x)") {
  for (const auto& m : {SymmetricMarginal::sym_exp(), SymmetricMarginal::mu2_example(),
                        SymmetricMarginal::gaussian(1.0)}) {
    auto map = build_psi(m);
    for (double x : map.grid()) {
      if (x <= 0.0) continue;
      const double lhs = std::exp(-map.gamma_at_x(x));
      const double rhs = 2.0 * m->tail(x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
  }
}

TEST_CASE("property: E[L_tau] = E|X| via the gamma integral") {
  for (const auto& m : {SymmetricMarginal::sym_exp(), SymmetricMarginal::gaussian(1.0)}) {
    auto map = build_psi(m);
    const double mean_lt =
        integrate([&](double l) { return map.local_time_tail(l); }, 0.0, map.l_max());
    CHECK(mean_lt == doctest::Approx(m->abs_moment()).epsilon(1e-6));
  }
}

TEST_CASE("reversed map: psi decreases from a finite value to zero") {
  auto rev = build_reversed_psi(SymmetricMarginal::sym_exp());
  CHECK(rev.psi(rev.x_max()) == doctest::Approx(0.0));
  // l_top = sum 1/(2 n^2) = pi^2 / 12 for the two-sided exponential
  const double pi = 3.14159265358979323846;
  CHECK(rev.l_top() == doctest::Approx(pi * pi / 12.0).epsilon(1e-5));
  CHECK(rev.derived_construction());
  // psi is finite at 0+ (the integrand tends to 1) and nonincreasing
  double prev = rev.l_top();
  for (double x = 0.01; x < rev.x_max(); x += 0.37) {
    const double v = rev.psi(x);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("reversed map: tail identity exp(-gamma(psi(x))) = 1 - 2R(x)") {
  auto m = SymmetricMarginal::sym_exp();
  auto rev = build_reversed_psi(m);
  for (double x : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    const double lhs = std::exp(-rev.gamma(rev.psi(x)));
    CHECK(lhs == doctest::Approx(1.0 - 2.0 * m->tail(x)).epsilon(1e-6));
  }
}

TEST_CASE("csv export import round trip") {
  auto map = build_psi(SymmetricMarginal::sym_exp());
  const std::string path = "/tmp/vallois_test_map.csv";
  map.export_csv(path);
  auto back = EmbeddingMap::import_csv(path);
  for (double x : {0.01, 0.3, 1.0, 3.0, 9.0}) {
    CHECK(back.psi(x) == doctest::Approx(map.psi(x)).epsilon(1e-12));
    CHECK(back.gamma_at_x(x) == doctest::Approx(map.gamma_at_x(x)).epsilon(1e-12));
  }
  std::remove(path.c_str());
}

TEST_CASE("csv import validates the header") {
  const std::string path = "/tmp/vallois_bad_header.csv";
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("a,b,c\n1,2,3\n", f);
  std::fclose(f);
  CHECK_THROWS_AS(EmbeddingMap::import_csv(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("general ODE reduces to the symmetric map") {
  auto m = SymmetricMarginal::sym_exp();
  auto sym = build_psi(m);
  auto gen = build_phi_general(as_full_line(m));
  for (double l : {0.01, 0.1, 0.5, 1.0, 4.0, 20.0}) {
    if (l > gen.l_max()) continue;
    CHECK(gen.phi_plus(l) == doctest::Approx(std::sqrt(l)).epsilon(1e-6));
    CHECK(gen.phi_plus(l) == doctest::Approx(-gen.phi_minus(l)).epsilon(1e-6));
    CHECK(gen.phi_plus(l) == doctest::Approx(sym.phi(l)).epsilon(1e-5));
    CHECK(gen.gamma(l) == doctest::Approx(sym.gamma(l)).epsilon(1e-5));
  }
}

TEST_CASE("general ODE rejects a density vanishing at zero") {
  AsymmetricDensity bad;
  bad.density = [](double x) { return std::abs(x) < 1e-6 ? 0.0 : 0.5 * std::exp(-std::abs(x)); };
  bad.tail = [](double x) {
    return x >= 0.0 ? 0.5 * std::exp(-x) : 1.0 - 0.5 * std::exp(x);
  };
  bad.x_lo = -40.0;
  bad.x_hi = 40.0;
  CHECK_THROWS_AS(build_phi_general(bad), Error);
}

TEST_CASE("embedding rejects an invalid marginal") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 20; ++i) pts.emplace_back(0.2 * i, 1.0);  // not unit mass
  auto bad = SymmetricMarginal::tabulated(pts);
  CHECK_THROWS_AS(build_psi(bad), Error);
}
