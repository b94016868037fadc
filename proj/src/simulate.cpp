#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rng.hpp"

namespace vallois {

void SimConfig::check() const {
  if (!(dt > 0.0)) {
    throw Error(Errc::invalid_argument, "ConfigError", "dt must be positive");
  }
  if (!(eps > 0.0)) {
    throw Error(Errc::invalid_argument, "ConfigError", "eps must be positive");
  }
  if (n_paths < 1) {
    throw Error(Errc::invalid_argument, "ConfigError", "n_paths must be >= 1");
  }
  if (!(t_budget > dt)) {
    throw Error(Errc::invalid_argument, "ConfigError", "t_budget must exceed dt");
  }
}

namespace {

// One path through the ordered stages. The exit test is skipped at step 0:
// the lagged local-time update makes the degenerate interval ]phi(0), phi(0)[
// at B_0 = 0 unobservable, so the first possible stop is after one step.
void run_path(const std::vector<const StoppingBarrier*>& stages, const SimConfig& cfg,
              const HedgePlan* plan, std::uint64_t path_index, StoppedSample* out) {
  PhiloxRng rng(cfg.seed, path_index);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long long max_steps = static_cast<long long>(std::llround(cfg.t_budget / cfg.dt));

  double b = 0.0, l = 0.0, gains = 0.0;
  long long k = 0;
  for (std::size_t stage = 0; stage < stages.size(); ++stage) {
    const StoppingBarrier& barrier = *stages[stage];
    bool stopped = false;
    while (!stopped) {
      if (k > 0 && barrier.exited(b, l)) {
        stopped = true;
        break;
      }
      if (k >= max_steps) break;  // budget exhausted: censor this stage
      const double delta = plan ? plan->delta(b, l) : 0.0;
      l = step_local_time(l, b, cfg);
      const double db = sqrt_dt * rng.normal();
      gains += delta * db;
      b += db;
      ++k;
    }
    StoppedSample& s = out[stage];
    s.b_tau = b;
    s.l_tau = l;
    s.tau = static_cast<double>(k) * cfg.dt;
    s.censored = !stopped;
    if (plan) {
      s.gains = gains;
      s.slack = gains + plan->h(b) - plan->payoff().value(l);
    }
  }
}

std::vector<std::vector<StoppedSample>> run_all(
    const std::vector<const StoppingBarrier*>& stages, const SimConfig& cfg,
    const HedgePlan* plan) {
  cfg.check();
  const std::size_t n_stages = stages.size();
  const long long n = cfg.n_paths;
  std::vector<std::vector<StoppedSample>> out(n_stages,
                                              std::vector<StoppedSample>(n));

  auto worker = [&](long long begin, long long end) {
    std::vector<StoppedSample> row(n_stages);
    for (long long p = begin; p < end; ++p) {
      run_path(stages, cfg, plan, static_cast<std::uint64_t>(p), row.data());
      for (std::size_t s = 0; s < n_stages; ++s) out[s][p] = row[s];
    }
  };

  int n_threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<long long>(n_threads, n));
  if (n_threads == 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (n + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const long long begin = t * chunk;
      const long long end = std::min<long long>(begin + chunk, n);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace

std::vector<StoppedSample> simulate_stopped(const StoppingBarrier& barrier,
                                            const SimConfig& cfg, const HedgePlan* plan) {
  auto out = run_all({&barrier}, cfg, plan);
  return std::move(out.front());
}

std::pair<std::vector<StoppedSample>, std::vector<StoppedSample>> simulate_sequential(
    const EmbeddingMap& first, const TwoMarginalEmbedding& second, const SimConfig& cfg) {
  auto out = run_all({&first, &second}, cfg, nullptr);
  return {std::move(out[0]), std::move(out[1])};
}

std::vector<std::vector<StoppedSample>> simulate_nested(
    const std::vector<const StoppingBarrier*>& stages, const SimConfig& cfg,
    const HedgePlan* plan) {
  if (stages.empty()) {
    throw Error(Errc::invalid_argument, "ConfigError", "need at least one stage");
  }
  return run_all(stages, cfg, plan);
}

EmpiricalCDF::EmpiricalCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) {
    throw Error(Errc::invalid_argument, "EmptySample", "empirical CDF needs samples");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::query(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EmpiricalCDF terminal_cdf(const std::vector<StoppedSample>& samples) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.censored) values.push_back(s.b_tau);
  }
  return EmpiricalCDF(std::move(values));
}

double ks_distance(const EmpiricalCDF& emp, const SymmetricMarginal& analytic,
                   double excl_lo, double excl_hi) {
  const auto& v = emp.sorted();
  const double n = static_cast<double>(v.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (excl_lo <= v[i] && v[i] <= excl_hi) continue;
    const double f = analytic.cdf(v[i]);
    const double hi = std::abs(static_cast<double>(i + 1) / n - f);
    const double lo = std::abs(static_cast<double>(i) / n - f);
    sup = std::max({sup, hi, lo});
  }
  return sup;
}

}  // namespace vallois
