#pragma once

#include <string>
#include <vector>

#include "operadkit/rational.hpp"

namespace operadkit {

/// Exact polynomial differential form p(t) + q(t) dt on the interval.
class PolyForm {
 public:
  PolyForm() = default;
  static PolyForm zero() { return {}; }
  static PolyForm one() { return monomial(0, false); }
  static PolyForm t() { return monomial(1, false); }
  static PolyForm dt() { return monomial(0, true); }
  static PolyForm monomial(int tpow, bool dt, Rat coeff = Rat(1));

  bool is_zero() const;
  /// -1 for inhomogeneous forms, else 0 or 1.
  int degree() const;

  PolyForm operator+(const PolyForm& o) const;
  PolyForm operator-(const PolyForm& o) const;
  PolyForm operator*(const PolyForm& o) const;  // graded-commutative, dt^2 = 0
  friend PolyForm operator*(const Rat& c, const PolyForm& f);

  /// de Rham differential: p + q dt -> p' dt.
  PolyForm d() const;
  Rat ev0() const;  // evaluation at t = 0 (kills dt)
  Rat ev1() const;  // evaluation at t = 1 (kills dt)
  /// p - t * p(1): the projection onto forms vanishing at t = 1.
  PolyForm prim_projection() const;

  /// Coproduct dual to (s,t) -> 1-(1-s)(1-t): the multiplicative chain-map
  /// extension of m*(t) = t(x)1 + 1(x)t - t(x)t. Returns the tensor expansion.
  static std::vector<std::pair<std::pair<PolyForm, PolyForm>, Rat>> mstar(const PolyForm& f);

  const std::vector<Rat>& p() const { return p_; }
  const std::vector<Rat>& q() const { return q_; }
  Rat p_coeff(int k) const { return k < static_cast<int>(p_.size()) ? p_[k] : Rat(0); }
  Rat q_coeff(int k) const { return k < static_cast<int>(q_.size()) ? q_[k] : Rat(0); }

  std::string str() const;  // "p(t) + (q(t)) dt" with exact fractions
  bool operator==(const PolyForm&) const = default;

 private:
  std::vector<Rat> p_;  // coefficient of t^k
  std::vector<Rat> q_;  // coefficient of t^k dt
  void trim();
};

}  // namespace operadkit
