#pragma once

#include <optional>
#include <utility>

#include "ipmm/core.hpp"

namespace ipmm {

// Entrywise box constraint l <= x <= u, scalar bounds by default with an
// optional per-entry override.
class BoxSet {
 public:
  BoxSet(double lo, double hi);
  BoxSet(Grid lo, Grid hi);

  Grid project(const Grid& x) const;
  // Squared Euclidean distance to the box (the indicator's Moreau envelope
  // at parameter 1 is half of this value).
  double squared_distance(const Grid& x) const;
  bool contains(const Grid& x, double tol = 0.0) const;

  double scalar_lo() const { return lo_; }
  double scalar_hi() const { return hi_; }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::optional<Grid> L_, U_;
};

// Every prox returns the minimizer of  g(z) + (1/(2t)) ||z - v||^2  together
// with the attained minimum (the Moreau envelope e_t g evaluated at v).  The
// envelope is always computed from the prox point through that defining
// identity so dual objective values stay consistent with the points used.
struct ProxResult {
  Grid point;
  double envelope = 0.0;
};

// g(z) = ||w o z||_1 entrywise: soft threshold at t*w, ties map to zero.
ProxResult prox_weighted_l1(const Grid& v, const Grid& w, double t);

// g(a,b) = sqrt(a^2+b^2) on a single pixel pair: group shrinkage.
struct PairProx {
  double a, b;
  double envelope;
};
PairProx prox_iso_pair(double a, double b, double t);

// g(M) = sum_j ||M col j||_2: per-column group shrinkage.
struct MatrixProxResult {
  Eigen::MatrixXd point;
  double envelope = 0.0;
};
MatrixProxResult prox_l21_columns(const Eigen::MatrixXd& M, double t);

enum class TvKind { Isotropic, Anisotropic };

// Prox of the stacked function f(z) = ||omega o y||_1 + psi(wh, wv), where
// psi couples (wh, wv) pixelwise for the isotropic kind and is a plain
// unit-weight l1 for the anisotropic kind.  The blocks are separable, so the
// envelope is the sum of the blockwise envelopes.
struct StackedProxResult {
  StackedField point;
  double envelope = 0.0;
};
StackedProxResult prox_stacked_f(const StackedField& z, const Grid& omega_fid,
                                 TvKind kind, double t);

// Value of the stacked function itself (used by majorant evaluation).
double stacked_f_value(const StackedField& z, const Grid& omega_fid, TvKind kind);

// Isotropic / anisotropic TV of a difference field.
double tv_value(const Grid& gh, const Grid& gv, TvKind kind);

}  // namespace ipmm
