#include "embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vallois {

namespace {

constexpr int kGridPoints = 4096;

// Log-spaced grid on [1e-6 * x_max, x_max] with 0 appended in front.
// psi'(0) = 0 for the marginals of interest, so phi has infinite slope at the
// origin; log spacing resolves that flat region.
std::vector<double> make_log_grid(double x_max) {
  std::vector<double> x;
  x.reserve(kGridPoints + 1);
  x.push_back(0.0);
  const double x_min = 1e-6 * x_max;
  const double step = std::log(x_max / x_min) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) {
    x.push_back(x_min * std::exp(step * i));
  }
  x.back() = x_max;
  return x;
}

void require_valid(const SymmetricMarginal& m) {
  const ValidationReport report = validate_marginal(m);
  if (!report.all_pass()) {
    std::string failed;
    for (const auto& c : report.checks) {
      if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw Error(Errc::validation, "MarginalInvalid",
                "marginal fails checks: " + failed);
  }
}

// gamma(0+) = 0 needs int_0 mu/R to vanish near zero. The probe integrates
// over dyadically shrinking windows below the first grid point and flags an
// estimate that refuses to decay.
void probe_gamma_divergence(const SymmetricMarginal& m, double x_min) {
  auto hazard = [&m](double y) { return m.density(y) / m.tail(y); };
  double total = 0.0;
  double prev = -1.0, last = -1.0;
  double hi = x_min;
  for (int k = 0; k < 12; ++k) {
    const double lo = 0.5 * hi;
    prev = last;
    last = integrate(hazard, lo, hi, 1e-6);
    total += last;
    hi = lo;
  }
  if (total > 1.0 && prev > 0.0 && last >= 0.95 * prev) {
    throw Error(Errc::numeric, "GammaDivergence",
                "int 1/phi near 0 fails the integrability probe");
  }
}

void write_csv_rows(const std::string& path, const std::vector<double>& x,
                    const std::vector<double>& psi, const std::vector<double>& gamma) {
  std::ofstream out(path);
  if (!out) {
    throw Error(Errc::invalid_argument, "BadPath", "cannot open '" + path + "'");
  }
  out << "x,psi,gamma_at_psi\n";
  char line[128];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", x[i], psi[i], gamma[i]);
    out << line;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// EmbeddingMap

void EmbeddingMap::finalize() {
  psi_of_x_ = Pchip(x_, psi_);
  gamma_of_x_ = Pchip(x_, gamma_);
  // psi is strictly increasing, so (psi, gamma) is a valid knot set for
  // gamma as a function of the local-time level.
  std::vector<double> l_knots = psi_;
  l_knots.front() = 0.0;
  gamma_of_l_ = Pchip(l_knots, gamma_);
  x_max_ = x_.back();
  l_max_ = psi_.back();
}

double EmbeddingMap::phi(double l) const {
  if (l <= 0.0) return 0.0;
  if (l >= l_max_) return x_max_;
  // Bisection on the monotone interpolant keeps phi monotone even where the
  // interpolation wiggles.
  return psi_of_x_.invert(l, 0.0, x_max_);
}

double EmbeddingMap::gamma(double l) const {
  if (l <= 0.0) return 0.0;
  return gamma_of_l_(l);
}

double EmbeddingMap::local_time_tail(double l) const {
  return std::exp(-gamma(l));
}

void EmbeddingMap::export_csv(const std::string& path) const {
  write_csv_rows(path, x_, psi_, gamma_);
}

EmbeddingMap EmbeddingMap::import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::invalid_argument, "BadPath", "cannot open '" + path + "'");
  }
  std::string header;
  std::getline(in, header);
  if (header != "x,psi,gamma_at_psi") {
    throw Error(Errc::parse, "BadCsv", "expected header 'x,psi,gamma_at_psi'");
  }
  EmbeddingMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, p, g;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &p, &g) != 3) {
      throw Error(Errc::parse, "BadCsv", "bad row: " + line);
    }
    map.x_.push_back(x);
    map.psi_.push_back(p);
    map.gamma_.push_back(g);
  }
  if (map.x_.size() < 4) {
    throw Error(Errc::parse, "BadCsv", "too few rows");
  }
  map.finalize();
  return map;
}

EmbeddingMap build_psi(const MarginalPtr& m, double x_max_override) {
  require_valid(*m);
  const double x_max = x_max_override > 0.0 ? x_max_override : m->x_max();
  EmbeddingMap map;
  map.marginal_ = m;
  map.x_ = make_log_grid(x_max);

  probe_gamma_divergence(*m, map.x_[1]);

  const std::size_t n = map.x_.size();
  map.psi_.assign(n, 0.0);
  map.gamma_.assign(n, 0.0);
  auto psi_integrand = [&m](double y) { return y * m->density(y) / m->tail(y); };
  // gamma(psi(x)) = int_0^x psi'(y)/y dy; the substitution avoids 1/phi at
  // l -> 0 where phi vanishes.
  auto gamma_integrand = [&m](double y) { return m->density(y) / m->tail(y); };
  for (std::size_t i = 1; i < n; ++i) {
    map.psi_[i] = map.psi_[i - 1] + integrate(psi_integrand, map.x_[i - 1], map.x_[i]);
    map.gamma_[i] = map.gamma_[i - 1] + integrate(gamma_integrand, map.x_[i - 1], map.x_[i]);
    if (!(map.psi_[i] > map.psi_[i - 1])) {
      throw Error(Errc::numeric, "NonIncreasingPsi",
                  "psi is not strictly increasing on the grid");
    }
  }
  map.finalize();
  if (std::exp(-map.gamma_.back()) >= 1e-12) {
    throw Error(Errc::validation, "TailTruncation",
                "gamma(l_max) too small: exp(-gamma) >= 1e-12; the marginal is "
                "truncated too early");
  }
  return map;
}

double local_time_tail(const EmbeddingMap& e, double l) {
  return e.local_time_tail(l);
}

// ---------------------------------------------------------------------------
// ReversedEmbedding

double ReversedEmbedding::phi(double l) const {
  if (l <= 0.0) return x_max_;
  if (l >= l_top_) return 0.0;
  return psi_of_x_.invert(l, 0.0, x_max_);
}

double ReversedEmbedding::gamma(double l) const {
  if (l <= 0.0) return 0.0;
  return gamma_of_l_(l);
}

double ReversedEmbedding::local_time_tail(double l) const {
  if (l >= l_top_) return 0.0;
  return std::exp(-gamma(l));
}

void ReversedEmbedding::export_csv(const std::string& path) const {
  write_csv_rows(path, x_, psi_, gamma_);
}

ReversedEmbedding build_reversed_psi(const MarginalPtr& m) {
  require_valid(*m);
  ReversedEmbedding map;
  map.marginal_ = m;
  map.x_ = make_log_grid(m->x_max());
  probe_gamma_divergence(*m, map.x_[1]);

  const std::size_t n = map.x_.size();
  map.psi_.assign(n, 0.0);
  map.gamma_.assign(n, 0.0);
  // psi(x) = int_x^{x_max} y mu(y) / mu([0,y]) dy, accumulated from the top;
  // the integrand tends to 1 at the origin, so psi(0+) is finite.
  auto lower_mass = [&m](double y) { return 0.5 - m->tail(y); };
  auto psi_integrand = [&](double y) { return y * m->density(y) / lower_mass(y); };
  auto gamma_integrand = [&](double y) { return m->density(y) / lower_mass(y); };
  for (std::size_t i = n - 1; i > 1; --i) {
    // The cell touching x = 0 is excluded: the psi integrand has a removable
    // 0/0 there and the gamma integrand a genuine 1/y divergence. Both nodes
    // at x = 0 are fixed separately below.
    map.psi_[i - 1] = map.psi_[i] + integrate(psi_integrand, map.x_[i - 1], map.x_[i]);
    map.gamma_[i - 1] = map.gamma_[i] + integrate(gamma_integrand, map.x_[i - 1], map.x_[i]);
  }
  // The x = 0 node: psi(0) = l_top is finite (the integrand has a continuous
  // limit at 0), while gamma diverges there and is excluded from the
  // interpolant knots. The last sliver is closed with the limiting value.
  const double sliver = map.x_[1] * 1e-8;
  map.psi_[0] = map.psi_[1] + integrate(psi_integrand, sliver, map.x_[1]) +
                psi_integrand(sliver) * sliver;
  map.gamma_[0] = 0.0;  // placeholder, overwritten below

  map.psi_of_x_ = Pchip(map.x_, map.psi_);
  // Knots for gamma(l): reverse so that l is increasing, drop the x = 0 node.
  std::vector<double> l_knots(map.psi_.rbegin(), map.psi_.rend() - 1);
  std::vector<double> g_vals(map.gamma_.rbegin(), map.gamma_.rend() - 1);
  l_knots.front() = 0.0;
  map.gamma_of_l_ = Pchip(std::move(l_knots), std::move(g_vals));
  map.x_max_ = map.x_.back();
  map.l_top_ = map.psi_[0];
  map.gamma_[0] = map.gamma_of_l_(map.l_top_);
  return map;
}

// ---------------------------------------------------------------------------
// GeneralEmbedding

double GeneralEmbedding::phi_plus(double l) const {
  if (l <= l_.front()) return up_.front() * std::sqrt(std::max(l, 0.0) / l_.front());
  return phi_plus_of_l_(l);
}

double GeneralEmbedding::phi_minus(double l) const {
  if (l <= l_.front()) return dn_.front() * std::sqrt(std::max(l, 0.0) / l_.front());
  return phi_minus_of_l_(l);
}

double GeneralEmbedding::psi_plus(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= up_.back()) return l_max_;
  return phi_plus_of_l_.invert(y, l_.front(), l_max_);
}

double GeneralEmbedding::psi_minus(double y) const {
  if (y >= 0.0) return 0.0;
  if (y <= dn_.back()) return l_max_;
  // phi_minus decreases in l; invert handles either direction.
  return phi_minus_of_l_.invert(y, l_.front(), l_max_);
}

double GeneralEmbedding::gamma(double l) const {
  if (l <= 0.0) return 0.0;
  if (l <= l_.front()) return gamma_.front() * std::sqrt(l / l_.front());
  return gamma_of_l_(l);
}

double GeneralEmbedding::local_time_tail(double l) const {
  return std::exp(-gamma(l));
}

GeneralEmbedding build_phi_general(const AsymmetricDensity& source) {
  GeneralEmbedding g;
  g.source_ = source;

  const double mu_up = source.density(1e-9);
  const double mu_dn = source.density(-1e-9);
  if (!(mu_up > 0.0) || !(mu_dn > 0.0)) {
    throw Error(Errc::validation, "MarginalInvalid",
                "build_phi_general needs a positive density around zero");
  }

  auto bracket_left = [&](double up, double dn) {
    // 1 - mu([phi_-, phi_+]) = tail(phi_+) + (1 - tail(phi_-))
    return source.tail(up) + (1.0 - source.tail(dn));
  };
  struct State {
    double up, dn;
  };
  auto slope = [&](const State& s, double left) -> State {
    return {left / (2.0 * s.up * source.density(s.up)),
            left / (2.0 * s.dn * source.density(s.dn))};
  };
  auto rk4 = [&](const State& s, double l0, double h) -> State {
    auto f = [&](const State& q) { return slope(q, bracket_left(q.up, q.dn)); };
    (void)l0;  // the system is autonomous in l
    State k1 = f(s);
    State k2 = f({s.up + 0.5 * h * k1.up, s.dn + 0.5 * h * k1.dn});
    State k3 = f({s.up + 0.5 * h * k2.up, s.dn + 0.5 * h * k2.dn});
    State k4 = f({s.up + h * k3.up, s.dn + h * k3.dn});
    return {s.up + h / 6.0 * (k1.up + 2.0 * k2.up + 2.0 * k3.up + k4.up),
            s.dn + h / 6.0 * (k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn)};
  };

  // Startup from the square-root asymptotics phi_+ ~ sqrt(l/mu(0+)).
  const double l0 = 1e-10;
  State s{std::sqrt(l0 / mu_up), -std::sqrt(l0 / mu_dn)};
  double l = l0;
  double h = l0;
  g.l_.push_back(l);
  g.up_.push_back(s.up);
  g.dn_.push_back(s.dn);
  g.gamma_.push_back(std::sqrt(l0) * (std::sqrt(mu_up) + std::sqrt(mu_dn)));

  const int max_nodes = 400000;
  while (bracket_left(s.up, s.dn) > 1e-10) {
    // Step doubling: accept when the halved step agrees to relative 1e-10.
    State full = rk4(s, l, h);
    State mid = rk4(s, l, 0.5 * h);
    State half = rk4(mid, l + 0.5 * h, 0.5 * h);
    const double err = std::max(std::abs(full.up - half.up) / std::max(half.up, 1e-12),
                                std::abs(full.dn - half.dn) / std::max(-half.dn, 1e-12));
    if (err > 1e-10) {
      h *= 0.5;
      if (h < 1e-15 * std::max(l, 1.0)) {
        throw Error(Errc::numeric, "OdeStall",
                    "step size underflow while integrating the barrier ODE");
      }
      continue;
    }
    // Simpson increment of gamma = 1/2 int (1/phi_+ - 1/phi_-) using the
    // half-step midpoint state.
    auto integrand = [](const State& q) { return 0.5 * (1.0 / q.up - 1.0 / q.dn); };
    const double g_old = integrand(s);
    const double g_mid = integrand(mid);
    s = half;
    l += h;
    g.gamma_.push_back(g.gamma_.back() + h / 6.0 * (g_old + 4.0 * g_mid + integrand(s)));
    g.l_.push_back(l);
    g.up_.push_back(s.up);
    g.dn_.push_back(s.dn);
    if (err < 1e-12) h *= 2.0;
    if (static_cast<int>(g.l_.size()) > max_nodes) {
      throw Error(Errc::numeric, "OdeStall", "barrier ODE produced too many nodes");
    }
  }

  g.phi_plus_of_l_ = Pchip(g.l_, g.up_);
  g.phi_minus_of_l_ = Pchip(g.l_, g.dn_);
  g.gamma_of_l_ = Pchip(g.l_, g.gamma_);
  g.l_max_ = g.l_.back();
  return g;
}

AsymmetricDensity as_full_line(const MarginalPtr& m) {
  AsymmetricDensity a;
  a.density = [m](double x) { return m->density(std::abs(x)); };
  a.tail = [m](double x) {
    return x >= 0.0 ? m->tail(x) : 1.0 - m->tail(-x);
  };
  a.x_lo = -m->x_max();
  a.x_hi = m->x_max();
  return a;
}

}  // namespace vallois
