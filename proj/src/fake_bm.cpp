#include "fake_bm.hpp"

#include <algorithm>
#include <cmath>

namespace vallois {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gaussian_density(double t, double y) {
  return std::exp(-y * y / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

}  // namespace

GridFunction::GridFunction(std::vector<double> x, std::vector<double> values,
                           std::vector<double> derivatives)
    : value_(x, std::move(values)), deriv_(std::move(x), std::move(derivatives)) {}

GridFunction GridFunction::from_callable(const std::function<double(double)>& f,
                                         const std::function<double(double)>& fprime,
                                         double x_lo, double x_hi, int n) {
  std::vector<double> x(n), v(n), d(n);
  for (int i = 0; i < n; ++i) {
    x[i] = x_lo + (x_hi - x_lo) * i / (n - 1);
    v[i] = f(x[i]);
    d[i] = fprime(x[i]);
  }
  return GridFunction(std::move(x), std::move(v), std::move(d));
}

// ---------------------------------------------------------------------------
// PeacockFamily

PeacockFamily PeacockFamily::build(double horizon, int n_times) {
  if (!(horizon > 0.0) || n_times < 2) {
    throw Error(Errc::invalid_argument, "BadArgument",
                "build_peacock needs horizon > 0 and n_times >= 2");
  }
  std::vector<double> times(n_times);
  for (int k = 0; k < n_times; ++k) times[k] = horizon * (k + 1) / n_times;
  return from_times(std::move(times));
}

PeacockFamily PeacockFamily::from_times(std::vector<double> times) {
  if (times.size() < 2) {
    throw Error(Errc::invalid_argument, "BadArgument", "need at least two times");
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw Error(Errc::invalid_argument, "BadArgument",
                  "times must be positive and strictly increasing");
    }
  }
  PeacockFamily fam;
  fam.times_ = std::move(times);
  fam.ref_marginal_ = SymmetricMarginal::gaussian(1.0);
  fam.ref_ = build_psi(fam.ref_marginal_);

  for (double t : fam.times_) {
    // psi_t by the log-tail-ratio form psi_t(x) = int_0^x log(R_t(y)/R_t(x)) dy,
    // which stays accurate where the plain ratio integrand loses digits in
    // the tail.
    MarginalPtr m = SymmetricMarginal::gaussian(t);
    EmbeddingMap map;
    map.marginal_ = m;
    const double x_max = m->x_max();
    map.x_.push_back(0.0);
    const int n = 4096;
    const double x_min = 1e-6 * x_max;
    const double step = std::log(x_max / x_min) / (n - 1);
    for (int i = 0; i < n; ++i) map.x_.push_back(x_min * std::exp(step * i));
    map.x_.back() = x_max;

    const std::size_t count = map.x_.size();
    map.psi_.assign(count, 0.0);
    map.gamma_.assign(count, 0.0);
    auto log_tail = [&m](double y) { return std::log(m->tail(y)); };
    auto hazard = [&m](double y) { return m->density(y) / m->tail(y); };
    double log_integral = 0.0;
    for (std::size_t i = 1; i < count; ++i) {
      log_integral += integrate(log_tail, map.x_[i - 1], map.x_[i]);
      map.psi_[i] = log_integral - map.x_[i] * log_tail(map.x_[i]);
      map.gamma_[i] = map.gamma_[i - 1] + integrate(hazard, map.x_[i - 1], map.x_[i]);
    }
    map.finalize();
    fam.maps_.push_back(std::move(map));
  }

  // Lemma-5 ordering: t -> psi_t(x) decreases for every fixed x > 0.
  for (std::size_t k = 0; k + 1 < fam.maps_.size(); ++k) {
    const EmbeddingMap& early = fam.maps_[k];
    const EmbeddingMap& late = fam.maps_[k + 1];
    const double x_hi = std::min(early.x_max(), late.x_max());
    for (int i = 1; i <= 512; ++i) {
      const double x = x_hi * i / 512.0;
      if (late.psi(x) > early.psi(x) + 1e-8) {
        throw Error(Errc::numeric, "OrderingViolation",
                    "psi_t is not decreasing in t at x = " + std::to_string(x));
      }
    }
  }
  return fam;
}

double PeacockFamily::psi_t(double t, double x) const {
  const double rt = std::sqrt(t);
  return rt * ref_.psi(x / rt);
}

double PeacockFamily::dpsi_dx(double t, double x) const {
  const double u = x / std::sqrt(t);
  return u * ref_marginal_->density(u) / ref_marginal_->tail(u);
}

double PeacockFamily::dpsi_dt(double t, double x) const {
  const double rt = std::sqrt(t);
  const double u = x / rt;
  return (ref_.psi(u) - u * dpsi_dx(1.0, u)) / (2.0 * rt);
}

double PeacockFamily::phi_t(double t, double l) const {
  const double rt = std::sqrt(t);
  return rt * ref_.phi(l / rt);
}

double PeacockFamily::gamma_t(double t, double l) const {
  return ref_.gamma(l / std::sqrt(t));
}

double PeacockFamily::gamma_at_x_t(double t, double x) const {
  return ref_.gamma_at_x(x / std::sqrt(t));
}

// ---------------------------------------------------------------------------
// Conditional expectation and generator

double conditional_expectation(const PeacockFamily& fam, const GridFunction& f,
                               double x, double t, double s) {
  if (!(t > 0.0) || !(s > t)) {
    throw Error(Errc::invalid_argument, "BadArgument",
                "conditional_expectation needs 0 < t < s");
  }
  const double l = fam.psi_t(t, std::abs(x));
  const double pp = fam.phi_t(s, l);
  if (std::abs(x) >= pp) return f(x);  // the s-barrier was already crossed

  // c(l) = e^{gamma_s(l)} int_{phi_s(l)}^{inf} (f(y) + f(-y)) mu_s(y) dy,
  // by substituting m = psi_s(y) in the barrier-representation integral.
  const double x_hi = std::sqrt(s) * fam.reference().x_max();
  const double c =
      std::exp(fam.gamma_t(s, l)) *
      integrate([&](double y) { return (f(y) + f(-y)) * gaussian_density(s, y); }, pp,
                x_hi);
  const double a = (f(pp) - c) / pp;
  const double b = (f(-pp) - c) / pp;
  const double xp = x > 0.0 ? x : 0.0;
  const double xm = x < 0.0 ? -x : 0.0;
  return a * xp + b * xm + c;
}

double generator_apply(const PeacockFamily& fam, const GridFunction& f, double t,
                       double x) {
  if (x == 0.0) {
    throw Error(Errc::domain, "ZeroSpot",
                "the generator formula degenerates at x = 0");
  }
  if (!(t > 0.0)) {
    throw Error(Errc::invalid_argument, "BadArgument", "t must be positive");
  }
  const double u = std::abs(x);
  const double sign = x > 0.0 ? 1.0 : -1.0;
  const double transport = fam.dpsi_dt(t, u) / fam.dpsi_dx(t, u);

  // Stieltjes integral of f(y) + f(-y) - 2 f(x) against d e^{-gamma_t o psi_t}
  // on [u, inf): exact differences of the composed grid function.
  const EmbeddingMap& ref = fam.reference();
  const double rt = std::sqrt(t);
  const auto& grid = ref.grid();
  const auto& gam = ref.gamma_values();
  const double fx2 = 2.0 * f(x);
  double integral = 0.0;
  double y_prev = u;
  double e_prev = std::exp(-fam.gamma_at_x_t(t, u));
  const auto first = std::upper_bound(grid.begin(), grid.end(), u / rt);
  for (auto it = first; it != grid.end(); ++it) {
    const std::size_t j = static_cast<std::size_t>(it - grid.begin());
    const double y = rt * grid[j];
    const double e = std::exp(-gam[j]);
    const double mid = 0.5 * (y_prev + y);
    integral += (f(mid) + f(-mid) - fx2) * (e - e_prev);
    y_prev = y;
    e_prev = e;
  }
  return -transport * (sign * f.derivative(x) -
                       std::exp(fam.gamma_at_x_t(t, u)) / (2.0 * u) * integral);
}

FakeBmResult simulate_fake_bm(const PeacockFamily& fam, const SimConfig& cfg) {
  std::vector<const StoppingBarrier*> stages;
  stages.reserve(fam.times().size());
  for (std::size_t k = 0; k < fam.times().size(); ++k) {
    stages.push_back(&fam.map_at(k));
  }
  FakeBmResult result;
  result.times = fam.times();
  result.samples = simulate_nested(stages, cfg);
  long long censored = 0;
  for (const auto& s : result.samples.back()) {
    if (s.censored) ++censored;
  }
  result.censor_rate =
      static_cast<double>(censored) / static_cast<double>(cfg.n_paths);
  return result;
}

}  // namespace vallois
