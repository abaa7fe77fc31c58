#pragma once

/*
 * Box-constrained TV deblurring under impulse noise:
 *
 *   minimize over x in Lambda   Theta(x) = vartheta(|A x - b|) + nu psi(D x)
 *
 * with A a circular blur, D the forward-difference pair, psi the (default
 * isotropic) TV coupling, vartheta a concave penalty lift, and Lambda an
 * entrywise box.  Each outer step freezes the penalty slope at the anchor and
 * minimizes the strongly convex surrogate
 *
 *   Theta_kj(x) = <omega, |A x - b|> + nu psi(D x) + (gamma/2)||x - xk||^2
 *               + (alpha/2)||C (x - xk)||^2 + Ck          (x in Lambda)
 *
 * through its Fenchel dual: Phi below is the concave dual function, a
 * certified lower bound on Theta_kj everywhere, maximized by L-BFGS on its
 * negative.  The value/gradient pair comes from the Lagrangian of the
 * constraint C x - bbar = z, so weak duality holds by construction.
 */

#include "ipmm/core.hpp"
#include "ipmm/linops.hpp"
#include "ipmm/penalty.hpp"
#include "ipmm/prox.hpp"

namespace ipmm {

struct DeblurContext {
  Grid anchor;        // xk
  double gamma = 0.0; // proximal weight gamma_kj
  double alpha = 0.0; // quadratic weight alpha_k
  double Ck = 0.0;    // vartheta(|F|) - <grad vartheta(|F|), |F|> at the anchor
  Grid omega;         // fidelity weights grad vartheta(|F(xk)|)
  StackedField c;     // (F(xk); nu T(xk))
  StackedField bbar;  // (b; 0; 0)
};

class DeblurProblem {
 public:
  using Point = Grid;
  using Context = DeblurContext;

  DeblurProblem(Kernel kernel, Grid observed, Penalty penalty, double nu,
                BoxSet box, TvKind tv = TvKind::Isotropic);

  double objective(const Grid& x) const;
  Context build_context(const Grid& xk, double gamma, double alpha) const;
  double majorant(const Context& ctx, const Grid& x) const;

  // Concave dual function of the surrogate and its gradient; dual_value(xi)
  // <= majorant(ctx, x) for every xi and every feasible x.
  double dual_value(const Context& ctx, const StackedField& xi) const;
  double dual_value_grad(const Context& ctx, const StackedField& xi,
                         StackedField& grad) const;
  Grid primal_from_dual(const Context& ctx, const StackedField& xi) const;

  double data_norm() const { return observed_.matrix().norm(); }
  Eigen::Index rows() const { return observed_.rows(); }
  Eigen::Index cols() const { return observed_.cols(); }
  const Grid& observed() const { return observed_; }
  const BoxSet& box() const { return box_; }
  const DeblurOperator& op() const { return op_; }
  const Penalty& penalty() const { return penalty_; }
  TvKind tv_kind() const { return tv_; }
  double nu() const { return nu_; }

 private:
  DeblurOperator op_;
  Grid observed_;
  Penalty penalty_;
  double nu_;
  BoxSet box_;
  TvKind tv_;
};

}  // namespace ipmm
