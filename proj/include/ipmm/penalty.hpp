#pragma once

#include <string_view>

#include "ipmm/core.hpp"

namespace ipmm {

// The concave penalty family used as a sparsity-promoting data fidelity.
// Every member is concave and nondecreasing on [0, inf) with theta(0) = 0,
// so the separable lift vartheta(Z) = sum_ij theta(Z_ij) admits the linear
// upper bound vartheta(Z) <= <grad_vartheta(Z0), Z> + C for any anchor Z0,
// which is what the outer majorization builds on.
enum class PenaltyKind {
  Abs,       // theta(t) = t
  Log,       // theta(t) = ln(t + eps) - ln(eps)
  Rational,  // theta(t) = t / (t + eps)
  Exp,       // theta(t) = (1 - exp(-eps t)) / (1 - exp(-eps))
  Power,     // theta(t) = (t + eps)^q - eps^q,  q in (0,1)
  Atan,      // theta(t) = 2/sqrt(3) atan((1+2 eps t)/sqrt(3)) - pi/(3 sqrt(3))
};

class Penalty {
 public:
  Penalty(PenaltyKind kind, double eps, double q = 0.5);

  // Accepts "abs", "log", "rational", "exp", "power", "atan" (case-insensitive).
  static Penalty from_name(std::string_view name, double eps, double q = 0.5);

  double theta(double t) const;
  double theta_prime(double t) const;

  // Separable lift over a nonnegative matrix and its entrywise gradient.
  double vartheta(const Grid& Z) const;
  Grid grad_vartheta(const Grid& Z) const;

  PenaltyKind kind() const { return kind_; }
  double eps() const { return eps_; }
  double q() const { return q_; }
  const char* name() const;

 private:
  PenaltyKind kind_;
  double eps_;
  double q_;
};

}  // namespace ipmm
