#include "hedging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vallois {

// ---------------------------------------------------------------------------
// ConvexPayoff

double ConvexPayoff::value(double l) const {
  double v = f0 + slope0 * l;
  for (const auto& a : atoms) {
    if (l > a.k) v += a.w * (l - a.k);
  }
  return v;
}

double ConvexPayoff::right_derivative(double l) const {
  double d = slope0;
  for (const auto& a : atoms) {
    if (l >= a.k) d += a.w;
  }
  return d;
}

double ConvexPayoff::slope_inf() const {
  double d = slope0;
  for (const auto& a : atoms) d += a.w;
  return d;
}

double ConvexPayoff::lipschitz() const {
  return std::max(std::abs(slope0), std::abs(slope_inf()));
}

void ConvexPayoff::check() const {
  double prev = -1.0;
  for (const auto& a : atoms) {
    if (!(a.w > 0.0)) {
      throw Error(Errc::invalid_argument, "BadPayoff", "atom weights must be positive");
    }
    if (!(a.k > prev) || !(a.k >= 0.0)) {
      throw Error(Errc::invalid_argument, "BadPayoff",
                  "atom positions must be nonnegative and strictly increasing");
    }
    prev = a.k;
  }
}

ConvexPayoff ConvexPayoff::parse(const std::string& text) {
  ConvexPayoff p;
  if (text == "linear") {
    p.slope0 = 1.0;
    return p;
  }
  auto starts_with = [&text](const char* prefix) {
    return text.rfind(prefix, 0) == 0;
  };
  if (starts_with("const:c=")) {
    try {
      p.f0 = std::stod(text.substr(8));
    } catch (const std::exception&) {
      throw Error(Errc::parse, "BadPayoff", "could not parse '" + text + "'");
    }
    return p;
  }
  if (starts_with("call_on_L:K=")) {
    double k;
    try {
      k = std::stod(text.substr(12));
    } catch (const std::exception&) {
      throw Error(Errc::parse, "BadPayoff", "could not parse '" + text + "'");
    }
    p.atoms.push_back({k, 1.0});
    p.check();
    return p;
  }
  if (starts_with("pwl:[")) {
    std::string body = text.substr(5);
    if (body.empty() || body.back() != ']') {
      throw Error(Errc::parse, "BadPayoff", "pwl payoff must end with ']'");
    }
    body.pop_back();
    std::size_t pos = 0;
    while (pos < body.size()) {
      if (body[pos] == ',') {
        ++pos;
        continue;
      }
      double k, w;
      int used = 0;
      if (std::sscanf(body.c_str() + pos, "(%lf,%lf)%n", &k, &w, &used) != 2) {
        throw Error(Errc::parse, "BadPayoff", "bad pwl atom near '" + body.substr(pos) + "'");
      }
      p.atoms.push_back({k, w});
      pos += static_cast<std::size_t>(used);
    }
    if (p.atoms.empty()) {
      throw Error(Errc::parse, "BadPayoff", "pwl payoff needs at least one atom");
    }
    p.check();
    return p;
  }
  throw Error(Errc::parse, "BadPayoff",
              "expected linear | const:c= | call_on_L:K= | pwl:[...], got '" + text + "'");
}

std::string ConvexPayoff::describe() const {
  std::ostringstream out;
  out << "{\"f0\":" << f0 << ",\"slope0\":" << slope0 << ",\"atoms\":[";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out << (i ? "," : "") << "[" << atoms[i].k << "," << atoms[i].w << "]";
  }
  out << "]}";
  return out.str();
}

// ---------------------------------------------------------------------------
// HedgePlan evaluation

double HedgePlan::gamma(double l) const {
  if (general_) return gen_->gamma(l);
  return fwd_ ? fwd_->gamma(l) : rev_->gamma(l);
}

double HedgePlan::l_domain() const {
  if (general_) return gen_->l_max();
  return fwd_ ? fwd_->l_max() : rev_->l_top();
}

double HedgePlan::a_plus(double l) const {
  if (general_) return a_plus_of_l_(std::max(l, 0.0));
  // A_+(l) = F'(0) + sum_i w_i exp(gamma(l ^ k_i) - gamma(k_i)); the min is
  // taken in gamma so every exponent stays nonpositive.
  double a = payoff_.slope0;
  if (!atom_k_.empty()) {
    const double g = gamma(l);
    for (std::size_t i = 0; i < atom_k_.size(); ++i) {
      a += atom_w_[i] * std::exp(std::min(g, atom_g_[i]) - atom_g_[i]);
    }
  }
  return a;
}

double HedgePlan::a_minus(double l) const {
  if (general_) return a_minus_of_l_(std::max(l, 0.0));
  return -a_plus(l);
}

double HedgePlan::h(double x) const {
  if (general_) return x >= 0.0 ? h_pos_(x) : h_neg_(-x);
  return h_of_absx_(std::abs(x));
}

double HedgePlan::delta(double x, double l) const {
  return x > 0.0 ? a_plus(l) : -a_minus(l);
}

double HedgePlan::phi_plus(double l) const {
  if (general_) return gen_->phi_plus(l);
  return fwd_ ? fwd_->phi(l) : rev_->phi(l);
}

double HedgePlan::phi_minus(double l) const {
  if (general_) return gen_->phi_minus(l);
  return fwd_ ? -fwd_->phi(l) : -rev_->phi(l);
}

const StoppingBarrier& HedgePlan::barrier() const {
  if (general_) return *gen_;
  if (fwd_) return *fwd_;
  return *rev_;
}

double HedgePlan::u(double x, double l) const {
  // The sub side may have linearized F past the reachable local time; u uses
  // the payoff the plan actually charges.
  double f_eff = payoff_.f0 + payoff_.slope0 * l;
  for (std::size_t i = 0; i < atom_k_.size(); ++i) {
    if (l > atom_k_[i]) f_eff += atom_w_[i] * (l - atom_k_[i]);
  }
  const double ap = a_plus(l);
  const double am = a_minus(l);
  const double pp = phi_plus(l);
  const double xp = x > 0.0 ? x : 0.0;
  const double xm = x < 0.0 ? -x : 0.0;
  return -ap * xp + am * xm + ap * pp - h(pp) + f_eff;
}

double HedgePlan::discretization_tolerance(double dt) const {
  return 5.0 * (a_norm_ + h_prime_norm_) * std::sqrt(dt);
}

double eval_delta(const HedgePlan& plan, double x, double l) {
  return plan.delta(x, l);
}

double eval_u(const HedgePlan& plan, double x, double l) {
  return plan.u(x, l);
}

// ---------------------------------------------------------------------------
// Builders

namespace {

// Sorted union of a grid and the atom images phi(k_i); H' has a kink at each
// image, so they must be interpolation knots.
std::vector<double> h_knots(const std::vector<double>& grid,
                            const std::vector<double>& images) {
  std::vector<double> knots = grid;
  knots.insert(knots.end(), images.begin(), images.end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              knots.end());
  return knots;
}

Pchip accumulate_h(const std::vector<double>& knots, double h0,
                   const std::function<double(double)>& h_prime) {
  std::vector<double> values(knots.size(), h0);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    values[i] = values[i - 1] + integrate(h_prime, knots[i - 1], knots[i]);
  }
  return Pchip(knots, values);
}

// mu(H) for an even H against a symmetric marginal, split at the kinks.
double price_against(const SymmetricMarginal& m, const Pchip& h_of_absx,
                     std::vector<double> split_points, double x_max) {
  split_points.push_back(0.0);
  split_points.push_back(x_max);
  std::sort(split_points.begin(), split_points.end());
  double price = 0.0;
  for (std::size_t i = 1; i < split_points.size(); ++i) {
    if (split_points[i] <= split_points[i - 1]) continue;
    price += 2.0 * integrate([&](double x) { return h_of_absx(x) * m.density(x); },
                             split_points[i - 1], split_points[i]);
  }
  return price;
}

}  // namespace

HedgePlan build_super_hedge(const ConvexPayoff& payoff, const EmbeddingMap& map) {
  payoff.check();
  HedgePlan plan;
  plan.side_ = HedgeSide::super;
  plan.payoff_ = payoff;
  plan.fwd_ = std::make_shared<const EmbeddingMap>(map);

  std::vector<double> images;
  for (const auto& a : payoff.atoms) {
    if (a.k > map.l_max()) {
      throw Error(Errc::domain, "DomainExceeded",
                  "payoff atom beyond the embedding's local-time range");
    }
    plan.atom_k_.push_back(a.k);
    plan.atom_w_.push_back(a.w);
    plan.atom_g_.push_back(map.gamma(a.k));
    images.push_back(map.phi(a.k));
  }

  // H'(y) = A_+(psi(y)); gamma(psi(y) ^ k_i) = min(gamma_at_x(y), gamma(k_i))
  // by monotonicity of gamma.
  auto h_prime = [&map, &payoff, &plan](double y) {
    double a = payoff.slope0;
    const double g = map.gamma_at_x(y);
    for (std::size_t i = 0; i < plan.atom_k_.size(); ++i) {
      a += plan.atom_w_[i] * std::exp(std::min(g, plan.atom_g_[i]) - plan.atom_g_[i]);
    }
    return a;
  };
  plan.h_of_absx_ = accumulate_h(h_knots(map.grid(), images), payoff.f0, h_prime);
  plan.price_ = price_against(*map.marginal(), plan.h_of_absx_, images, map.x_max());

  // A_+ is monotone in l, so its sup sits at an endpoint.
  plan.a_norm_ = std::max(std::abs(plan.a_plus(0.0)), std::abs(plan.a_plus(map.l_max())));
  plan.h_prime_norm_ = plan.a_norm_;
  return plan;
}

HedgePlan build_sub_hedge(const ConvexPayoff& payoff, const ReversedEmbedding& map) {
  payoff.check();
  HedgePlan plan;
  plan.side_ = HedgeSide::sub;
  plan.payoff_ = payoff;
  plan.rev_ = std::make_shared<const ReversedEmbedding>(map);

  // The stopped local time never exceeds l_top = psi(0+), so atoms at or
  // beyond l_top are never charged. Dropping them replaces F by its
  // linearization past l_top, which agrees with F on the reachable set
  // (the psi_+(0) = psi_-(0) convention when the barrier reaches zero).
  std::vector<double> images;
  for (const auto& a : payoff.atoms) {
    if (a.k >= map.l_top()) continue;
    plan.atom_k_.push_back(a.k);
    plan.atom_w_.push_back(a.w);
    plan.atom_g_.push_back(map.gamma(a.k));
    images.push_back(map.phi(a.k));
  }

  // H(0) = F(0) - sum_i w_i int_0^{k_i} exp(gamma(z) - gamma(k_i)) dz.
  double h0 = payoff.f0;
  for (std::size_t i = 0; i < plan.atom_k_.size(); ++i) {
    const double gi = plan.atom_g_[i];
    h0 -= plan.atom_w_[i] *
          integrate([&map, gi](double z) { return std::exp(map.gamma(z) - gi); }, 0.0,
                    plan.atom_k_[i]);
  }

  auto h_prime = [&map, &payoff, &plan](double y) {
    double a = payoff.slope0;
    const double g = map.gamma(map.psi(y));
    for (std::size_t i = 0; i < plan.atom_k_.size(); ++i) {
      a += plan.atom_w_[i] * std::exp(std::min(g, plan.atom_g_[i]) - plan.atom_g_[i]);
    }
    return a;
  };
  // Uniform grid with log refinement near zero, where psi varies fastest.
  std::vector<double> grid;
  grid.reserve(1300);
  for (int i = 0; i <= 1024; ++i) {
    grid.push_back(map.x_max() * i / 1024.0);
  }
  const double fine_hi = map.x_max() / 1024.0;
  for (int i = 0; i < 256; ++i) {
    grid.push_back(fine_hi * 1e-4 * std::pow(1e4, i / 255.0));
  }
  plan.h_of_absx_ = accumulate_h(h_knots(grid, images), h0, h_prime);
  plan.price_ = price_against(*map.marginal(), plan.h_of_absx_, images, map.x_max());

  plan.a_norm_ = std::max(std::abs(plan.a_plus(0.0)), std::abs(plan.a_plus(map.l_top())));
  plan.h_prime_norm_ = plan.a_norm_;
  return plan;
}

HedgePlan build_super_hedge(const ConvexPayoff& payoff, const GeneralEmbedding& map) {
  payoff.check();
  HedgePlan plan;
  plan.side_ = HedgeSide::super;
  plan.payoff_ = payoff;
  plan.general_ = true;
  plan.gen_ = std::make_shared<const GeneralEmbedding>(map);

  for (const auto& a : payoff.atoms) {
    if (a.k > map.l_max()) {
      throw Error(Errc::domain, "DomainExceeded",
                  "payoff atom beyond the embedding's local-time range");
    }
    plan.atom_k_.push_back(a.k);
    plan.atom_w_.push_back(a.w);
    plan.atom_g_.push_back(map.gamma(a.k));
  }

  // Inner integral I(z) = sum_{k_i >= z} w_i exp(-gamma(k_i)), constant
  // between atoms; the atoms are knots of the l-grid so I is smooth on every
  // integration segment.
  auto inner = [&plan](double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < plan.atom_k_.size(); ++i) {
      if (plan.atom_k_[i] >= z) s += plan.atom_w_[i] * std::exp(-plan.atom_g_[i]);
    }
    return s;
  };
  const double a_plus_0 = payoff.slope0 + inner(0.0);

  std::vector<double> lg;
  lg.push_back(0.0);
  const double l_lo = 1e-8 * std::max(map.l_max(), 1e-8);
  for (int i = 0; i < 1024; ++i) {
    lg.push_back(l_lo * std::pow(map.l_max() / l_lo, i / 1023.0));
  }
  for (double k : plan.atom_k_) lg.push_back(k);
  std::sort(lg.begin(), lg.end());
  lg.erase(std::unique(lg.begin(), lg.end()), lg.end());

  // First segment [0, l_lo] by the square-root startup asymptotics of the
  // barrier: int_0^l e^gamma / phi_+ ~ 2 sqrt(mu(0+) l).
  const double mu_up = map.source().density(1e-9);
  const double mu_dn = map.source().density(-1e-9);
  std::vector<double> ap(lg.size()), am(lg.size());
  ap[0] = a_plus_0;
  am[0] = -a_plus_0;
  ap[1] = ap[0] + inner(0.0) * 2.0 * std::sqrt(mu_up * lg[1]);
  am[1] = am[0] + inner(0.0) * -2.0 * std::sqrt(mu_dn * lg[1]);
  for (std::size_t i = 2; i < lg.size(); ++i) {
    ap[i] = ap[i - 1] +
            integrate([&](double z) { return inner(z) * std::exp(map.gamma(z)) / map.phi_plus(z); },
                      lg[i - 1], lg[i]);
    am[i] = am[i - 1] +
            integrate([&](double z) { return inner(z) * std::exp(map.gamma(z)) / map.phi_minus(z); },
                      lg[i - 1], lg[i]);
  }
  plan.a_plus_of_l_ = Pchip(lg, ap);
  plan.a_minus_of_l_ = Pchip(lg, am);

  const double x_hi = map.phi_plus(map.l_max());
  const double x_lo = -map.phi_minus(map.l_max());
  auto side_knots = [](double hi, const std::vector<double>& images) {
    std::vector<double> g;
    g.push_back(0.0);
    for (int i = 0; i < 1024; ++i) {
      g.push_back(hi * 1e-6 * std::pow(1e6, i / 1023.0));
    }
    return h_knots(g, images);
  };
  std::vector<double> img_pos, img_neg;
  for (double k : plan.atom_k_) {
    img_pos.push_back(map.phi_plus(k));
    img_neg.push_back(-map.phi_minus(k));
  }
  plan.h_pos_ = accumulate_h(side_knots(x_hi, img_pos), payoff.f0, [&](double y) {
    return plan.a_plus_of_l_(map.psi_plus(y));
  });
  plan.h_neg_ = accumulate_h(side_knots(x_lo, img_neg), payoff.f0, [&](double y) {
    return -plan.a_minus_of_l_(map.psi_minus(-y));
  });

  auto segment_price = [](const Pchip& h, const std::function<double(double)>& dens,
                          std::vector<double> cuts, double hi) {
    cuts.push_back(0.0);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double p = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      if (cuts[i] <= cuts[i - 1]) continue;
      p += integrate([&](double y) { return h(y) * dens(y); }, cuts[i - 1], cuts[i]);
    }
    return p;
  };
  const auto& src = map.source();
  plan.price_ =
      segment_price(plan.h_pos_, [&src](double y) { return src.density(y); }, img_pos, x_hi) +
      segment_price(plan.h_neg_, [&src](double y) { return src.density(-y); }, img_neg, x_lo);

  for (std::size_t i = 0; i < lg.size(); ++i) {
    plan.a_norm_ = std::max({plan.a_norm_, std::abs(ap[i]), std::abs(am[i])});
  }
  plan.h_prime_norm_ = plan.a_norm_;
  return plan;
}

RelationsReport check_relations(const HedgePlan& plan) {
  RelationsReport report;
  const double l_hi = 0.98 * plan.l_domain();
  for (int i = 1; i <= 512; ++i) {
    const double l = l_hi * i / 512.0;

    // (1/2)(A_+ - A_-) = F'(l) + e^{gamma(l)} int_l^inf e^{-gamma} F''(dm),
    // for the payoff the plan charges.
    const double lhs = 0.5 * (plan.a_plus(l) - plan.a_minus(l));
    double rhs = plan.payoff_.slope0;
    for (std::size_t j = 0; j < plan.atom_k_.size(); ++j) {
      if (plan.atom_k_[j] <= l) {
        rhs += plan.atom_w_[j];
      } else {
        rhs += plan.atom_w_[j] * std::exp(plan.gamma(l) - plan.atom_g_[j]);
      }
    }
    report.max_r1 = std::max(report.max_r1, std::abs(lhs - rhs));

    // H(phi_+) - A_+ phi_+ = H(phi_-) - A_- phi_-.
    const double pp = plan.phi_plus(l);
    const double pm = plan.phi_minus(l);
    const double lhs2 = plan.h(pp) - plan.a_plus(l) * pp;
    const double rhs2 = plan.h(pm) - plan.a_minus(l) * pm;
    report.max_r2 = std::max(report.max_r2, std::abs(lhs2 - rhs2));
  }
  return report;
}

double analytic_price(const ConvexPayoff& payoff, const EmbeddingMap& map) {
  payoff.check();
  double price = payoff.f0;
  auto tail = [&map](double l) { return map.local_time_tail(l); };
  if (payoff.slope0 != 0.0) {
    price += payoff.slope0 * integrate(tail, 0.0, map.l_max());
  }
  for (const auto& a : payoff.atoms) {
    if (a.k > map.l_max()) {
      throw Error(Errc::domain, "DomainExceeded",
                  "payoff atom beyond the embedding's local-time range");
    }
    price += a.w * integrate(tail, a.k, map.l_max());
  }
  return price;
}

}  // namespace vallois
