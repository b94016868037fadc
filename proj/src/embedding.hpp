#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marginal.hpp"
#include "numerics.hpp"

namespace vallois {

// Exit test shared by every barrier the path engine can stop at.
class StoppingBarrier {
 public:
  virtual ~StoppingBarrier() = default;
  // True when b lies outside the open interval ]phi_-(l), phi_+(l)[.
  virtual bool exited(double b, double l) const = 0;
  virtual double phi_plus(double l) const = 0;
  virtual double phi_minus(double l) const = 0;
};

// The Vallois map for a symmetric marginal: psi(x) = int_0^x y mu(y)/mu([y,oo)) dy,
// phi its inverse, gamma(l) = int_0^l dm/phi(m). Stopping at |B| >= phi(L)
// embeds the marginal; P(L_tau > l) = exp(-gamma(l)).
class EmbeddingMap : public StoppingBarrier {
 public:
  double psi(double x) const { return psi_of_x_(x); }
  double phi(double l) const;
  double gamma(double l) const;
  // gamma(psi(x)) without the round trip through l.
  double gamma_at_x(double x) const { return gamma_of_x_(x); }
  double local_time_tail(double l) const;

  double x_max() const { return x_max_; }
  double l_max() const { return l_max_; }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& psi_values() const { return psi_; }
  const std::vector<double>& gamma_values() const { return gamma_; }
  const MarginalPtr& marginal() const { return marginal_; }

  bool exited(double b, double l) const override {
    const double ab = b < 0.0 ? -b : b;
    return ab >= x_max_ || psi_of_x_(ab) >= l;
  }
  double phi_plus(double l) const override { return phi(l); }
  double phi_minus(double l) const override { return -phi(l); }

  void export_csv(const std::string& path) const;
  static EmbeddingMap import_csv(const std::string& path);

 private:
  friend EmbeddingMap build_psi(const MarginalPtr&, double);
  friend class PeacockFamily;
  EmbeddingMap() = default;
  void finalize();

  MarginalPtr marginal_;  // absent for imported maps
  std::vector<double> x_, psi_, gamma_;
  Pchip psi_of_x_, gamma_of_x_, gamma_of_l_;
  double x_max_ = 0.0, l_max_ = 0.0;
};

// Reversed Vallois map: phi positive nonincreasing, so large local time means
// a tight barrier. The construction is derived (not reproduced from a
// reference) and is validated against the Monte-Carlo oracle; the flag below
// records that provenance.
class ReversedEmbedding : public StoppingBarrier {
 public:
  double psi(double x) const { return psi_of_x_(x); }
  double phi(double l) const;
  double gamma(double l) const;
  double local_time_tail(double l) const;

  double x_max() const { return x_max_; }
  // Local time is capped at l_top = psi(0+): the barrier has shrunk to zero.
  double l_top() const { return l_top_; }
  const MarginalPtr& marginal() const { return marginal_; }
  bool derived_construction() const { return true; }

  bool exited(double b, double l) const override {
    const double ab = b < 0.0 ? -b : b;
    return ab >= x_max_ || psi_of_x_(ab) <= l;
  }
  double phi_plus(double l) const override { return phi(l); }
  double phi_minus(double l) const override { return -phi(l); }

  void export_csv(const std::string& path) const;

 private:
  friend ReversedEmbedding build_reversed_psi(const MarginalPtr&);
  ReversedEmbedding() = default;

  MarginalPtr marginal_;
  std::vector<double> x_, psi_, gamma_;
  Pchip psi_of_x_, gamma_of_l_;
  double x_max_ = 0.0, l_top_ = 0.0;
};

// A centered density on the full line, possibly asymmetric; tail(x) = mu([x,oo)).
struct AsymmetricDensity {
  std::function<double(double)> density;
  std::function<double(double)> tail;
  double x_lo = 0.0;  // truncated support bounds, x_lo < 0 < x_hi
  double x_hi = 0.0;
};

// General (asymmetric) Vallois barrier pair obtained by integrating
// phi'_\pm = (1 - mu([phi_-, phi_+])) / (2 phi_\pm mu(phi_\pm)) from 0.
class GeneralEmbedding : public StoppingBarrier {
 public:
  double phi_plus(double l) const override;
  double phi_minus(double l) const override;
  double psi_plus(double y) const;
  double psi_minus(double y) const;
  double gamma(double l) const;
  double local_time_tail(double l) const;
  double l_max() const { return l_max_; }
  const AsymmetricDensity& source() const { return source_; }

  bool exited(double b, double l) const override {
    return b >= phi_plus(l) || b <= phi_minus(l);
  }

 private:
  friend GeneralEmbedding build_phi_general(const AsymmetricDensity&);
  GeneralEmbedding() = default;

  AsymmetricDensity source_;
  std::vector<double> l_, up_, dn_, gamma_;
  Pchip phi_plus_of_l_, phi_minus_of_l_, gamma_of_l_;
  double l_max_ = 0.0;
};

// Builds the Vallois map for a validated symmetric marginal. x_max_override
// extends the grid (used when two marginals must share a domain); 0 keeps the
// marginal's own truncation point.
EmbeddingMap build_psi(const MarginalPtr& m, double x_max_override = 0.0);

ReversedEmbedding build_reversed_psi(const MarginalPtr& m);

GeneralEmbedding build_phi_general(const AsymmetricDensity& source);

// P(L_tau > l) = exp(-gamma(l)).
double local_time_tail(const EmbeddingMap& e, double l);

// Wraps a symmetric marginal as a full-line density for build_phi_general.
AsymmetricDensity as_full_line(const MarginalPtr& m);

}  // namespace vallois
