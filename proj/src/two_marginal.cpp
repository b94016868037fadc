#include "two_marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vallois {

namespace {

constexpr int kScanPoints = 8192;
constexpr double kCrossTol = 1e-9;     // bisection tolerance for breakpoints
constexpr double kTangency = 1e-6;     // crossings closer than this are rejected
constexpr double kDeltaFloor = 1e-60;  // below this the delta tail is exhausted

std::vector<double> make_scan_grid(double x_max) {
  std::vector<double> x;
  x.reserve(kScanPoints + 1);
  x.push_back(0.0);
  const double x_min = 1e-6 * x_max;
  const double step = std::log(x_max / x_min) / (kScanPoints - 1);
  for (int i = 0; i < kScanPoints; ++i) x.push_back(x_min * std::exp(step * i));
  x.back() = x_max;
  return x;
}

// Assumption (i): delta mu <= 0 and not identically zero on a neighborhood
// of zero. Probed on a log grid below x_probe.
bool delta_negative_near_zero(const DeltaMu& pair, double x_probe, std::string* detail) {
  bool some_negative = false;
  for (int i = 0; i <= 256; ++i) {
    const double x = x_probe * std::pow(1e-6, 1.0 - i / 256.0);
    const double d = pair.delta_density(x);
    if (d > 1e-12) {
      std::ostringstream msg;
      msg << "delta mu = " << d << " > 0 at x = " << x << " near zero";
      *detail = msg.str();
      return false;
    }
    if (d < -1e-12) some_negative = true;
  }
  if (!some_negative) {
    *detail = "delta mu vanishes identically near zero";
    return false;
  }
  return true;
}

std::vector<double> default_strikes(double x_max) {
  std::vector<double> strikes{0.0};
  for (int i = 0; i < 48; ++i) {
    strikes.push_back(0.75 * x_max * std::pow(1e-3, 1.0 - i / 47.0));
  }
  return strikes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

TwoMarginalEmbedding build_psi2(const DeltaMu& pair) {
  if (!pair.mu1 || !pair.mu2) {
    throw Error(Errc::invalid_argument, "BadArgument", "pair needs both marginals");
  }
  TwoMarginalEmbedding t;
  t.pair_ = pair;
  t.x_max_ = pair.x_max();

  std::string detail;
  if (!delta_negative_near_zero(pair, 0.05 * t.x_max_, &detail)) {
    throw Error(Errc::validation, "AssumptionViolated", detail);
  }

  t.psi1_ = build_psi(pair.mu1, t.x_max_);

  const auto& mu2 = *pair.mu2;
  bool frozen = false;
  double frozen_hazard = 0.0;

  // Hazard of the active regime: psi_2'(y) = y * hazard(y).
  auto hazard = [&](double y, Psi2Regime regime) -> double {
    if (regime == Psi2Regime::mu2) return mu2.density(y) / mu2.tail(y);
    if (frozen) return frozen_hazard;
    const double dtail = pair.delta_tail(y);
    if (dtail <= -1e-12) {
      throw Error(Errc::validation, "DeltaTailVanishes",
                  "delta mu tail is nonpositive inside a delta regime at x = " +
                      std::to_string(y));
    }
    const double dd = pair.delta_density(y);
    if (dd <= 0.0) {
      throw Error(Errc::validation, "NonIncreasingPsi2",
                  "delta mu <= 0 inside a delta regime at x = " + std::to_string(y));
    }
    return dd / std::max(dtail, kDeltaFloor * 1e-6);
  };

  auto psi_slope = [&](double y, Psi2Regime r) { return y * hazard(y, r); };

  const auto scan = make_scan_grid(t.x_max_);
  t.xs_.push_back(0.0);
  t.psi2_vals_.push_back(0.0);
  t.gamma2_vals_.push_back(0.0);
  t.s_coefficients_.push_back(1.0);  // l_0 = 0 term of the alternating sum

  Psi2Regime regime = Psi2Regime::mu2;
  for (std::size_t i = 1; i < scan.size(); ++i) {
    double a = t.xs_.back();
    double b = scan[i];
    if (b <= a) continue;

    // In a delta regime, check for exhaustion of the delta tail before
    // integrating; past that point the hazard is held at its last value
    // (no measurable local-time mass remains there).
    if (regime == Psi2Regime::delta && !frozen) {
      const double dtail_b = pair.delta_tail(b);
      if (dtail_b >= -1e-12 && dtail_b < kDeltaFloor) {
        frozen = true;
        frozen_hazard = hazard(a, Psi2Regime::delta);
      }
    }

    double psi2_b =
        t.psi2_vals_.back() + integrate([&](double y) { return psi_slope(y, regime); }, a, b);
    const double diff_b = psi2_b - t.psi1_->psi(b);
    const double cross_scale = 1e-12 * (1.0 + t.psi1_->psi(b));
    const bool crossed = (regime == Psi2Regime::mu2) ? (diff_b > cross_scale)
                                                     : (diff_b < -cross_scale);
    if (crossed && !frozen) {
      // Refine the crossing by bisection on psi_2 - psi_1 within [a, b].
      const double psi2_a = t.psi2_vals_.back();
      auto diff_at = [&](double x) {
        return psi2_a + integrate([&](double y) { return psi_slope(y, regime); }, a, x) -
               t.psi1_->psi(x);
      };
      double lo = a, hi = b;
      while (hi - lo > kCrossTol) {
        const double mid = 0.5 * (lo + hi);
        const double d = diff_at(mid);
        const bool above = d > 0.0;
        if ((regime == Psi2Regime::mu2) == above) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const double x_b = 0.5 * (lo + hi);
      const double prev = t.breakpoints_.empty() ? 0.0 : t.breakpoints_.back();
      if (x_b - prev < kTangency) {
        throw Error(Errc::numeric, "TangentCrossing",
                    "crossing at x = " + std::to_string(x_b) +
                        " is too close to the previous breakpoint; the "
                        "alternation is numerically ambiguous");
      }
      // Snap psi_2 to psi_1 at the crossing.
      const double level = t.psi1_->psi(x_b);
      const double gamma2_b =
          t.gamma2_vals_.back() +
          integrate([&](double y) { return hazard(y, regime); }, a, x_b);
      t.xs_.push_back(x_b);
      t.psi2_vals_.push_back(level);
      t.gamma2_vals_.push_back(gamma2_b);
      t.breakpoints_.push_back(x_b);
      t.break_levels_.push_back(level);
      const double g1 = t.psi1_->gamma_at_x(x_b);
      const double term = std::exp(gamma2_b - g1);
      const double sign = (t.breakpoints_.size() % 2 == 1) ? -1.0 : 1.0;
      t.s_coefficients_.push_back(t.s_coefficients_.back() + sign * term);
      regime = regime == Psi2Regime::mu2 ? Psi2Regime::delta : Psi2Regime::mu2;

      // Finish the remainder of the scan segment under the new regime.
      a = x_b;
      psi2_b = t.psi2_vals_.back() +
               integrate([&](double y) { return psi_slope(y, regime); }, a, b);
    }

    const double gamma2_inc = integrate([&](double y) { return hazard(y, regime); }, a, b);
    if (!(psi2_b > t.psi2_vals_.back())) {
      throw Error(Errc::validation, "NonIncreasingPsi2",
                  "psi_2 failed to increase across [" + std::to_string(a) + ", " +
                      std::to_string(b) + "]");
    }
    t.xs_.push_back(b);
    t.psi2_vals_.push_back(psi2_b);
    t.gamma2_vals_.push_back(t.gamma2_vals_.back() + gamma2_inc);
  }

  t.psi2_of_x_ = Pchip(t.xs_, t.psi2_vals_);
  t.gamma2_of_x_ = Pchip(t.xs_, t.gamma2_vals_);
  t.gamma2_of_l_ = Pchip(t.psi2_vals_, t.gamma2_vals_);

  // Assumption (iii), finite-probe: the last regime stayed one-sided all the
  // way to x_max.
  t.certified_infinite_ = true;
  t.report_.neg_near_zero = true;
  t.report_.positive_in_delta = true;
  t.report_.terminates = true;
  t.report_.certification = "finite-probe";
  t.report_.final_margin = std::abs(t.psi2_vals_.back() - t.psi1_->psi(t.x_max_));
  t.report_.convex_order = convex_order_check(pair, default_strikes(t.x_max_));
  if (!t.report_.convex_order.pass) {
    std::ostringstream msg;
    msg << "convex order fails: min call spread " << t.report_.convex_order.min_call_spread
        << " at K = " << t.report_.convex_order.worst_strike;
    t.report_.detail = msg.str();
  }
  return t;
}

TwoMarginalEmbedding TwoMarginalEmbedding::single(const MarginalPtr& mu2) {
  TwoMarginalEmbedding t;
  t.pair_.mu2 = mu2;
  t.x_max_ = mu2->x_max();
  EmbeddingMap map = build_psi(mu2);
  t.xs_ = map.grid();
  t.psi2_vals_ = map.psi_values();
  t.gamma2_vals_ = map.gamma_values();
  t.psi2_of_x_ = Pchip(t.xs_, t.psi2_vals_);
  t.gamma2_of_x_ = Pchip(t.xs_, t.gamma2_vals_);
  t.gamma2_of_l_ = Pchip(t.psi2_vals_, t.gamma2_vals_);
  t.s_coefficients_.push_back(1.0);
  t.certified_infinite_ = true;
  t.report_.neg_near_zero = true;
  t.report_.positive_in_delta = true;
  t.report_.terminates = true;
  t.report_.certification = "degenerate-single";
  return t;
}

AssumptionsReport check_assumptions(const DeltaMu& pair) {
  AssumptionsReport report;
  std::string detail;
  report.neg_near_zero = delta_negative_near_zero(pair, 0.05 * pair.x_max(), &detail);
  report.detail = detail;
  report.convex_order = convex_order_check(pair, default_strikes(pair.x_max()));
  if (!report.neg_near_zero) return report;
  try {
    TwoMarginalEmbedding t = build_psi2(pair);
    report = t.report();
  } catch (const Error& e) {
    if (e.name() == "NonIncreasingPsi2" || e.name() == "DeltaTailVanishes") {
      report.positive_in_delta = false;
      report.detail = e.what();
    } else {
      report.detail = e.what();
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

double TwoMarginalEmbedding::psi1(double x) const {
  if (!psi1_) return std::numeric_limits<double>::infinity();
  return psi1_->psi(x);
}

double TwoMarginalEmbedding::phi2(double l) const {
  if (l <= 0.0) return 0.0;
  if (l >= psi2_vals_.back()) return x_max_;
  return psi2_of_x_.invert(l, 0.0, x_max_);
}

std::size_t TwoMarginalEmbedding::breakpoints_before(double x) const {
  return static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
      breakpoints_.begin());
}

Psi2Regime TwoMarginalEmbedding::regime(double x) const {
  return breakpoints_before(x) % 2 == 0 ? Psi2Regime::mu2 : Psi2Regime::delta;
}

double TwoMarginalEmbedding::psi2_prime(double x) const {
  if (regime(x) == Psi2Regime::mu2) {
    return x * pair_.mu2->density(x) / pair_.mu2->tail(x);
  }
  const double dtail = pair_.delta_tail(x);
  if (dtail < kDeltaFloor) {
    // Exhausted delta tail: fall back to the interpolant's slope.
    return psi2_of_x_.derivative(x);
  }
  return x * pair_.delta_density(x) / dtail;
}

double TwoMarginalEmbedding::s_value(double x) const {
  const std::size_t j = breakpoints_before(x);
  return 0.5 * std::exp(-gamma2_at_x(x)) * s_coefficients_[j];
}

double TwoMarginalEmbedding::implied_density(double x) const {
  if (!(x > 0.0) || x >= x_max_) {
    throw Error(Errc::invalid_argument, "BadArgument",
                "implied_density needs x in (0, x_max)");
  }
  const double s = s_value(x);
  if (psi1(x) > psi2(x)) {
    // mu2 regime: nu = psi_2'/(2x) (S + e^{-gamma_1(psi_2)}), and the
    // alternating-sum S_{2i} absorbs the exponential term as
    // S_{2i} = (S + e^{-gamma_1 o psi_2})/2.
    return psi2_prime(x) / x * s;
  }
  const double psi1_term =
      psi1_->psi(x) > 0.0
          ? (x * pair_.mu1->density(x) / pair_.mu1->tail(x)) / (2.0 * x) *
                std::exp(-psi1_->gamma_at_x(x))
          : 0.0;
  return psi1_term + psi2_prime(x) / x * s;
}

double implied_density(const TwoMarginalEmbedding& t, double x) {
  return t.implied_density(x);
}

}  // namespace vallois
