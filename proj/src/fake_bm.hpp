#pragma once

#include <vector>

#include "embedding.hpp"
#include "simulate.hpp"

namespace vallois {

// Test function for the generator: values and derivative tabulated on a grid
// spanning both half-lines.
class GridFunction {
 public:
  GridFunction(std::vector<double> x, std::vector<double> values,
               std::vector<double> derivatives);
  static GridFunction from_callable(const std::function<double(double)>& f,
                                    const std::function<double(double)>& fprime,
                                    double x_lo, double x_hi, int n = 4001);

  double operator()(double y) const { return value_(y); }
  double derivative(double y) const { return deriv_(y); }

 private:
  Pchip value_, deriv_;
};

// Vallois embeddings of the Gaussian family mu_t = N(0, t) on a time grid.
// phi_s <= phi_t for s <= t (the stopping times are well-ordered), so the
// stopped process (B_{tau_t}) is a Markov martingale with Brownian marginals.
class PeacockFamily {
 public:
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const EmbeddingMap& map_at(std::size_t k) const { return maps_.at(k); }
  const EmbeddingMap& reference() const { return ref_; }

  // Scaling evaluations, valid for any t > 0: psi_t(x) = sqrt(t) psi_1(x/sqrt(t)).
  double psi_t(double t, double x) const;
  double dpsi_dt(double t, double x) const;
  double dpsi_dx(double t, double x) const;
  double phi_t(double t, double l) const;
  double gamma_t(double t, double l) const;
  double gamma_at_x_t(double t, double x) const;

  // n_times equally spaced times T/n, 2T/n, ..., T.
  static PeacockFamily build(double horizon, int n_times);
  static PeacockFamily from_times(std::vector<double> times);

 private:
  PeacockFamily() = default;

  std::vector<double> times_;
  std::vector<EmbeddingMap> maps_;
  EmbeddingMap ref_;           // t = 1
  MarginalPtr ref_marginal_;   // gaussian(1)
};

// E[f(X_s) | X_t = x] for grid times or any 0 < t < s, going through the
// barrier representation: the state is (x, l) with l = psi_t(|x|).
double conditional_expectation(const PeacockFamily& fam, const GridFunction& f,
                               double x, double t, double s);

// Generator of the Markov martingale at time t and spot x != 0. The jump
// integral is taken against the exact differences of e^{-gamma_t o psi_t}
// on the grid.
double generator_apply(const PeacockFamily& fam, const GridFunction& f, double t,
                       double x);

struct FakeBmResult {
  std::vector<double> times;
  // samples[k][p]: path p observed at the time-k barrier exit.
  std::vector<std::vector<StoppedSample>> samples;
  double censor_rate = 0.0;
};

// One Brownian path per sample; each grid time records the first exit through
// its (wider) barrier, continuing the same path and local time.
FakeBmResult simulate_fake_bm(const PeacockFamily& fam, const SimConfig& cfg);

}  // namespace vallois
