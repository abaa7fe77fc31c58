#pragma once

/*
 * Low-rank factored inpainting of one image channel under impulse noise:
 *
 *   minimize over (U,V)   Theta(U,V) = vartheta(|P_Omega(U V^T) - b|)
 *                                    + nu psi(D(U V^T))
 *                                    + lambda (||U||_{2,1} + ||V||_{2,1})
 *
 * with P_Omega the observation mask, psi the (default anisotropic) TV
 * coupling and the column-wise 2,1-norms promoting low rank of U V^T.  The
 * residual F and TV argument T are bilinear in (U,V), so each outer step
 * linearizes them at the anchor through the Jacobian pair and minimizes
 *
 *   Theta_kj(x) = <omega, |l_F(x)|> + nu psi(l_T(x)) + lambda h(x)
 *               + (gamma/2)||x - xk||^2 + (alpha/2)||C_k (x - xk)||^2 + Ck,
 *
 * where l_F, l_T are the affine Jacobian models.  Phi below is the concave
 * Lagrangian dual of that surrogate (a certified lower bound).
 */

#include "ipmm/core.hpp"
#include "ipmm/linops.hpp"
#include "ipmm/penalty.hpp"
#include "ipmm/prox.hpp"

namespace ipmm {

struct InpaintContext {
  FactorPair anchor;    // xk = (Uk, Vk)
  double gamma = 0.0;
  double alpha = 0.0;
  double Ck = 0.0;
  Grid omega;           // fidelity weights at the anchor
  StackedField c;       // (F(xk); nu T(xk))
  StackedField bk;      // C_k xk - c   (so C_k x - bk = (l_F(x); nu l_T(x)))
  FactorJacobian jac;   // C_k

  InpaintContext(FactorPair a, FactorJacobian j)
      : anchor(std::move(a)), jac(std::move(j)) {}
};

class InpaintProblem {
 public:
  using Point = FactorPair;
  using Context = InpaintContext;

  InpaintProblem(MaskSet mask, Grid observed, Penalty penalty, double nu,
                 double lambda, TvKind tv = TvKind::Anisotropic);

  double objective(const FactorPair& x) const;
  Context build_context(const FactorPair& xk, double gamma, double alpha) const;
  double majorant(const Context& ctx, const FactorPair& x) const;

  double dual_value(const Context& ctx, const StackedField& xi) const;
  double dual_value_grad(const Context& ctx, const StackedField& xi,
                         StackedField& grad) const;
  FactorPair primal_from_dual(const Context& ctx, const StackedField& xi) const;

  double data_norm() const { return observed_.matrix().norm(); }
  Eigen::Index rows() const { return observed_.rows(); }
  Eigen::Index cols() const { return observed_.cols(); }
  const Grid& observed() const { return observed_; }
  const MaskSet& mask() const { return mask_; }
  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  TvKind tv_kind() const { return tv_; }
  const Penalty& penalty() const { return penalty_; }

 private:
  MaskSet mask_;
  Grid observed_;
  Penalty penalty_;
  double nu_;
  double lambda_;
  TvKind tv_;
};

// Truncated-SVD starting point for one channel: with P Sigma Q^T the SVD of
// the zero-filled masked observation, U0 = P_r Sigma_r^{1/2} and
// V0 = Q_r Sigma_r^{1/2}, so U0 V0^T is the best rank-r approximation.
FactorPair inpaint_init(const Grid& observed, const MaskSet& mask, int r);

}  // namespace ipmm
