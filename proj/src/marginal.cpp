#include "marginal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace vallois {

namespace {

constexpr double kTruncationTail = 1e-13;  // doubling search stops below this

// Smallest power-of-two endpoint whose tail mass is below the truncation
// tolerance; exponential-type tails make this terminate quickly.
double find_x_max(const std::function<double(double)>& tail) {
  double x = 1.0;
  for (int i = 0; i < 60; ++i) {
    if (tail(x) < kTruncationTail) return x;
    x *= 2.0;
  }
  throw Error(Errc::numeric, "TailTooHeavy",
              "could not locate a truncation point with tail < 1e-13");
}

double quad_abs_moment(const std::function<double(double)>& density, double x_max) {
  return 2.0 * integrate([&](double x) { return x * density(x); }, 0.0, x_max);
}

}  // namespace

struct MarginalBuilder {
  static std::shared_ptr<SymmetricMarginal> make() {
    return std::shared_ptr<SymmetricMarginal>(new SymmetricMarginal());
  }
};

MarginalPtr SymmetricMarginal::sym_exp() {
  auto m = MarginalBuilder::make();
  m->density_ = [](double x) { return std::exp(-2.0 * x); };
  m->tail_ = [](double x) { return 0.5 * std::exp(-2.0 * x); };
  m->x_max_ = find_x_max(m->tail_);
  m->abs_moment_ = 0.5;
  m->spec_.kind = DensitySpec::Kind::builtin;
  m->spec_.name = "sym_exp";
  m->label_ = "sym_exp";
  return m;
}

MarginalPtr SymmetricMarginal::mu2_example() {
  // Body on [0,1]: (5/2) x^3 exp(-5x^4/4). The tail branch glues an
  // exponential onto a power decay whose exponent alpha makes up exactly the
  // missing mass, i.e. delta(1) = alpha * delta_tail(1) with
  // delta = mu2 - sym_exp.
  const double delta_at_1 = 2.5 * std::exp(-1.25) - std::exp(-2.0);
  const double mass_01 =
      integrate([](double x) { return 2.5 * x * x * x * std::exp(-1.25 * x * x * x * x); },
                0.0, 1.0, 1e-13, 1e-16);
  const double tail2_at_1 = 0.5 - mass_01;
  const double tail1_at_1 =
      integrate([](double x) { return std::exp(-2.0 * x); }, 1.0, 32.0, 1e-13, 1e-16);
  const double delta_tail_at_1 = tail2_at_1 - tail1_at_1;
  const double alpha = brent_root(
      [&](double a) { return delta_at_1 - a * delta_tail_at_1; }, 2.0, 50.0, 1e-10);

  auto m = MarginalBuilder::make();
  const double d1 = delta_at_1;
  m->density_ = [alpha, d1](double x) {
    if (x <= 1.0) return 2.5 * x * x * x * std::exp(-1.25 * x * x * x * x);
    const double decay =
        std::exp(-alpha * (std::pow(x, alpha - 1.0) - 1.0) / (alpha - 1.0));
    return std::exp(-2.0 * x) + d1 * std::pow(x, alpha - 2.0) * decay;
  };
  m->tail_ = [alpha, d1](double x) {
    if (x <= 1.0) return 0.5 * std::exp(-1.25 * x * x * x * x);
    const double decay =
        std::exp(-alpha * (std::pow(x, alpha - 1.0) - 1.0) / (alpha - 1.0));
    return 0.5 * std::exp(-2.0 * x) + d1 / alpha * decay;
  };
  m->x_max_ = find_x_max(m->tail_);
  m->abs_moment_ = quad_abs_moment(m->density_, m->x_max_);
  m->mu2_alpha_ = alpha;
  m->spec_.kind = DensitySpec::Kind::builtin;
  m->spec_.name = "mu2";
  m->label_ = "mu2";
  return m;
}

MarginalPtr SymmetricMarginal::gaussian(double t) {
  if (!(t > 0.0)) {
    throw Error(Errc::invalid_argument, "BadParameter",
                "gaussian variance must be positive");
  }
  auto m = MarginalBuilder::make();
  const double inv_norm = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * t);
  m->density_ = [t, inv_norm](double x) {
    return inv_norm * std::exp(-x * x / (2.0 * t));
  };
  m->tail_ = [t](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0 * t)); };
  m->x_max_ = find_x_max(m->tail_);
  m->abs_moment_ = std::sqrt(2.0 * t / 3.14159265358979323846);
  m->spec_.kind = DensitySpec::Kind::builtin;
  m->spec_.name = "gaussian";
  m->spec_.param = t;
  std::ostringstream label;
  label << "gaussian(t=" << t << ")";
  m->label_ = label.str();
  return m;
}

MarginalPtr SymmetricMarginal::tabulated(std::vector<std::pair<double, double>> points) {
  if (points.size() < 4) {
    throw Error(Errc::invalid_argument, "BadGrid",
                "tabulated spec needs at least four points");
  }
  std::vector<double> xs, ds;
  xs.reserve(points.size());
  ds.reserve(points.size());
  for (const auto& [x, d] : points) {
    if (!xs.empty() && !(x > xs.back())) {
      throw Error(Errc::invalid_argument, "BadGrid",
                  "tabulated grid must be strictly increasing in x");
    }
    xs.push_back(x);
    ds.push_back(d);
  }
  if (xs.front() > 0.0) {
    xs.insert(xs.begin(), 0.0);
    ds.insert(ds.begin(), ds.front());
  }

  auto m = MarginalBuilder::make();
  const bool all_positive = std::all_of(ds.begin(), ds.end(), [](double d) { return d > 0.0; });
  if (all_positive) {
    // Interpolate in log-density; preserves positivity on the support.
    std::vector<double> logs(ds.size());
    std::transform(ds.begin(), ds.end(), logs.begin(), [](double d) { return std::log(d); });
    auto interp = std::make_shared<Pchip>(xs, std::move(logs));
    const double x_hi = xs.back();
    m->density_ = [interp, x_hi](double x) {
      if (x < 0.0 || x > x_hi) return 0.0;
      return std::exp((*interp)(x));
    };
  } else {
    auto interp = std::make_shared<Pchip>(xs, ds);
    const double x_hi = xs.back();
    m->density_ = [interp, x_hi](double x) {
      if (x < 0.0 || x > x_hi) return 0.0;
      return (*interp)(x);
    };
  }

  // Accumulated tail on the table knots, interpolated in between.
  std::vector<double> tail_vals(xs.size(), 0.0);
  for (std::size_t i = xs.size() - 1; i > 0; --i) {
    tail_vals[i - 1] = tail_vals[i] + integrate(m->density_, xs[i - 1], xs[i]);
  }
  auto tail_interp = std::make_shared<Pchip>(xs, tail_vals);
  const double x_hi = xs.back();
  m->tail_ = [tail_interp, x_hi](double x) {
    if (x >= x_hi) return 0.0;
    if (x <= 0.0) return (*tail_interp)(0.0);
    return (*tail_interp)(x);
  };
  m->x_max_ = x_hi;
  m->abs_moment_ = quad_abs_moment(m->density_, m->x_max_);
  m->spec_.kind = DensitySpec::Kind::tabulated;
  m->spec_.points = std::move(points);
  std::ostringstream label;
  label << "tabulated(n=" << m->spec_.points.size() << ")";
  m->label_ = label.str();
  return m;
}

MarginalPtr SymmetricMarginal::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(Errc::parse, "BadJson", e.what());
  }
  const std::string kind = j.value("kind", "");
  if (kind == "builtin") {
    const std::string name = j.value("name", "");
    if (name == "sym_exp") return sym_exp();
    if (name == "mu2") return mu2_example();
    if (name == "gaussian") {
      double t = 1.0;
      if (j.contains("params") && j["params"].contains("t")) t = j["params"]["t"].get<double>();
      return gaussian(t);
    }
    throw Error(Errc::parse, "UnknownBuiltin", "no builtin named '" + name + "'");
  }
  if (kind == "tabulated") {
    if (!j.contains("points") || !j["points"].is_array()) {
      throw Error(Errc::parse, "BadJson", "tabulated spec needs a 'points' array");
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j["points"]) {
      if (!p.is_array() || p.size() != 2) {
        throw Error(Errc::parse, "BadJson", "each point must be [x, density]");
      }
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return tabulated(std::move(pts));
  }
  throw Error(Errc::parse, "BadJson", "kind must be 'builtin' or 'tabulated'");
}

MarginalPtr SymmetricMarginal::from_name(const std::string& name) {
  std::string base = name;
  double t = 1.0;
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    base = name.substr(0, colon);
    const std::string args = name.substr(colon + 1);
    const auto eq = args.find('=');
    if (eq == std::string::npos || args.substr(0, eq) != "t") {
      throw Error(Errc::parse, "BadMarginalName",
                  "expected '<name>' or 'gaussian:t=<value>', got '" + name + "'");
    }
    try {
      t = std::stod(args.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(Errc::parse, "BadMarginalName", "could not parse t in '" + name + "'");
    }
  }
  if (base == "sym_exp") return sym_exp();
  if (base == "mu2") return mu2_example();
  if (base == "gaussian") return gaussian(t);
  throw Error(Errc::parse, "BadMarginalName", "no marginal named '" + base + "'");
}

double tail_mass(const SymmetricMarginal& m, double x) {
  if (x < 0.0) {
    throw Error(Errc::invalid_argument, "BadArgument", "tail_mass needs x >= 0");
  }
  if (x >= m.x_max()) return 0.0;
  return integrate([&m](double y) { return m.density(y); }, x, m.x_max());
}

ValidationReport validate_marginal(const SymmetricMarginal& m) {
  ValidationReport report;

  auto add = [&report](std::string name, bool pass, double value, std::string msg) {
    report.checks.push_back({std::move(name), pass, value, std::move(msg)});
  };

  double mass = std::numeric_limits<double>::quiet_NaN();
  try {
    mass = 2.0 * integrate([&m](double x) { return m.density(x); }, 0.0, m.x_max());
    add("unit_mass", std::abs(mass - 1.0) < 1e-6, mass,
        "2 * integral of the half-line density");
  } catch (const Error& e) {
    add("unit_mass", false, mass, e.what());
  }

  // Positivity on the interior of the support, probed on a mixed log/linear
  // grid. A zero at the origin itself is fine (the mu2 example has one).
  double min_density = std::numeric_limits<double>::infinity();
  double worst_x = 0.0;
  bool finite = true;
  const int n_probe = 2048;
  for (int i = 1; i <= n_probe; ++i) {
    const double u = static_cast<double>(i) / n_probe;
    for (double x : {u * m.x_max(), m.x_max() * std::pow(1e-8, 1.0 - u)}) {
      const double d = m.density(x);
      if (!std::isfinite(d)) finite = false;
      if (d < min_density) {
        min_density = d;
        worst_x = x;
      }
    }
  }
  std::ostringstream pos_msg;
  pos_msg << "minimum density " << min_density << " at x = " << worst_x;
  add("positivity", finite && min_density > 0.0, min_density, pos_msg.str());

  double first_moment = std::numeric_limits<double>::quiet_NaN();
  try {
    first_moment = 2.0 * integrate([&m](double x) { return x * m.density(x); }, 0.0, m.x_max());
    add("finite_abs_moment", std::isfinite(first_moment), first_moment, "E|X|");
  } catch (const Error& e) {
    add("finite_abs_moment", false, first_moment, e.what());
  }

  return report;
}

namespace {

// Call price E[(X - K)^+] under the even extension of the half-line density.
double call_price(const SymmetricMarginal& m, double strike) {
  const double x_max = m.x_max();
  double price = 0.0;
  if (strike < x_max) {
    const double lo = std::max(strike, 0.0);
    price += integrate([&m, strike](double x) { return (x - strike) * m.density(x); },
                       lo, x_max);
  }
  if (strike < 0.0) {
    // Contribution of the negative half-line: (-x - K)^+ for x in [0, -K].
    const double hi = std::min(-strike, x_max);
    price += integrate([&m, strike](double x) { return (-x - strike) * m.density(x); },
                       0.0, hi);
  }
  return price;
}

}  // namespace

ConvexOrderReport convex_order_check(const DeltaMu& pair,
                                     const std::vector<double>& strikes,
                                     double tolerance) {
  if (strikes.empty()) {
    throw Error(Errc::invalid_argument, "BadArgument",
                "convex_order_check needs a nonempty strike grid");
  }
  ConvexOrderReport report;
  report.min_call_spread = std::numeric_limits<double>::infinity();
  for (double strike : strikes) {
    const double spread = call_price(*pair.mu2, strike) - call_price(*pair.mu1, strike);
    if (spread < report.min_call_spread) {
      report.min_call_spread = spread;
      report.worst_strike = strike;
    }
  }
  report.pass = report.min_call_spread >= -tolerance;
  return report;
}

}  // namespace vallois
