#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "embedding.hpp"
#include "hedging.hpp"
#include "two_marginal.hpp"

namespace vallois {

struct SimConfig {
  double dt = 1.0 / 4000.0;
  double eps = 0.04;              // local-time window half-width
  long long n_paths = 1 << 17;
  std::uint64_t seed = 20160818;
  double t_budget = 64.0;         // max Brownian time per path
  int threads = 0;                // 0 = hardware concurrency

  void check() const;  // throws ConfigError
};

struct StoppedSample {
  double b_tau = 0.0;
  double l_tau = 0.0;
  double tau = 0.0;
  double gains = 0.0;  // int Delta dX, when a plan is attached
  double slack = 0.0;  // gains + H(B_tau) - F(L_tau)
  bool censored = false;
};

// L_{k dt} - L_{(k-1) dt} = dt/(2 eps) 1{|B_{(k-1) dt}| <= eps}.
inline double step_local_time(double prev_l, double prev_b, const SimConfig& cfg) {
  const double ab = prev_b < 0.0 ? -prev_b : prev_b;
  return ab <= cfg.eps ? prev_l + cfg.dt / (2.0 * cfg.eps) : prev_l;
}

// Fixed interval ]-c, c[; first exit is the classic two-sided barrier time.
class ConstantBarrier : public StoppingBarrier {
 public:
  explicit ConstantBarrier(double c) : c_(c) {}
  bool exited(double b, double l) const override {
    (void)l;
    return b >= c_ || b <= -c_;
  }
  double phi_plus(double l) const override {
    (void)l;
    return c_;
  }
  double phi_minus(double l) const override {
    (void)l;
    return -c_;
  }

 private:
  double c_;
};

// Runs n_paths Brownian paths until the barrier exit. When plan is given, the
// gains integral accumulates Delta evaluated at the left endpoint of each
// step (predictable evaluation). Deterministic in (seed, cfg, barrier)
// regardless of thread count.
std::vector<StoppedSample> simulate_stopped(const StoppingBarrier& barrier,
                                            const SimConfig& cfg,
                                            const HedgePlan* plan = nullptr);

// Continues each path past the first stop until the second barrier; both
// stops share one running local time. tau_2 >= tau_1 on every path by
// construction.
std::pair<std::vector<StoppedSample>, std::vector<StoppedSample>> simulate_sequential(
    const EmbeddingMap& first, const TwoMarginalEmbedding& second, const SimConfig& cfg);

// Nested stopping through an ordered family of barriers; returns one sample
// per (path, stage) in stage-major layout: out[stage][path].
std::vector<std::vector<StoppedSample>> simulate_nested(
    const std::vector<const StoppingBarrier*>& stages, const SimConfig& cfg,
    const HedgePlan* plan = nullptr);

class EmpiricalCDF {
 public:
  explicit EmpiricalCDF(std::vector<double> samples);

  double query(double x) const;  // fraction of samples <= x
  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

// Collects non-censored b_tau values.
EmpiricalCDF terminal_cdf(const std::vector<StoppedSample>& samples);

// sup |F_emp - F| over sample points outside [excl_lo, excl_hi]; pass
// excl_lo > excl_hi to disable the exclusion.
double ks_distance(const EmpiricalCDF& emp, const SymmetricMarginal& analytic,
                   double excl_lo, double excl_hi);

}  // namespace vallois
