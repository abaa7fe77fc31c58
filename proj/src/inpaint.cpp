#include "ipmm/inpaint.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ipmm {

InpaintProblem::InpaintProblem(MaskSet mask, Grid observed, Penalty penalty,
                               double nu, double lambda, TvKind tv)
    : mask_(std::move(mask)),
      observed_(std::move(observed)),
      penalty_(std::move(penalty)),
      nu_(nu),
      lambda_(lambda),
      tv_(tv) {
  if (mask_.rows() != observed_.rows() || mask_.cols() != observed_.cols())
    throw std::invalid_argument("InpaintProblem: mask and observation shapes differ");
  if (nu_ < 0.0) throw std::invalid_argument("InpaintProblem: nu must be nonnegative");
  if (!(lambda_ > 0.0))
    throw std::invalid_argument("InpaintProblem: lambda must be positive");
}

namespace {

double l21_columns(const Eigen::MatrixXd& M) {
  return M.colwise().norm().sum();
}

}  // namespace

double InpaintProblem::objective(const FactorPair& x) const {
  const Grid X = x.product();
  const Grid residual = mask_.apply(X) - observed_;
  Grid gh, gv;
  diff(X, gh, gv);
  return penalty_.vartheta(residual.abs()) + nu_ * tv_value(gh, gv, tv_) +
         lambda_ * (l21_columns(x.U) + l21_columns(x.V));
}

InpaintContext InpaintProblem::build_context(const FactorPair& xk, double gamma,
                                             double alpha) const {
  if (!(gamma > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("build_context: gamma and alpha must be positive");
  if (xk.U.rows() != observed_.rows() || xk.V.rows() != observed_.cols())
    throw std::invalid_argument("build_context: factor shapes do not match the image");
  InpaintContext ctx(xk, FactorJacobian(mask_, nu_, xk.U, xk.V));
  ctx.gamma = gamma;
  ctx.alpha = alpha;
  const Grid X = xk.product();
  const Grid F = mask_.apply(X) - observed_;
  const Grid absF = F.abs();
  ctx.omega = penalty_.grad_vartheta(absF);
  ctx.Ck = penalty_.vartheta(absF) - (ctx.omega * absF).sum();
  Grid gh, gv;
  diff(X, gh, gv);
  ctx.c = StackedField(F, nu_ * gh, nu_ * gv);
  // The Jacobian at the anchor doubles the bilinear term, so the affine model
  // of the residual is  C_k x - bk  with  bk = C_k xk - c.
  ctx.bk = ctx.jac.apply(xk);
  ctx.bk -= ctx.c;
  return ctx;
}

double InpaintProblem::majorant(const InpaintContext& ctx, const FactorPair& x) const {
  const FactorPair d = x - ctx.anchor;
  const StackedField cd = ctx.jac.apply(d);
  const StackedField z = cd + ctx.c;  // (l_F(x) ; nu l_T(x))
  return stacked_f_value(z, ctx.omega, tv_) +
         lambda_ * (l21_columns(x.U) + l21_columns(x.V)) +
         0.5 * ctx.gamma * d.squaredNorm() + 0.5 * ctx.alpha * cd.squaredNorm() +
         ctx.Ck;
}

double InpaintProblem::dual_value(const InpaintContext& ctx,
                                  const StackedField& xi) const {
  StackedField unused;
  return dual_value_grad(ctx, xi, unused);
}

double InpaintProblem::dual_value_grad(const InpaintContext& ctx,
                                       const StackedField& xi,
                                       StackedField& grad) const {
  const double a = ctx.alpha, g = ctx.gamma;
  // z-block: Moreau envelope of f at c + xi/alpha with parameter 1/alpha.
  StackedField u = ctx.c;
  u += (1.0 / a) * xi;
  StackedProxResult fz = prox_stacked_f(u, ctx.omega, tv_, 1.0 / a);
  // x-block: column shrinkage of the shifted anchor in factor space.
  const FactorPair cstar_xi = ctx.jac.adjoint(xi);
  const FactorPair w = ctx.anchor - (1.0 / g) * cstar_xi;
  MatrixProxResult pu = prox_l21_columns(w.U, lambda_ / g);
  MatrixProxResult pv = prox_l21_columns(w.V, lambda_ / g);
  const double value = fz.envelope - xi.squaredNorm() / (2.0 * a) -
                       cstar_xi.squaredNorm() / (2.0 * g) +
                       lambda_ * (pu.envelope + pv.envelope) + ctx.Ck;
  // grad Phi = C_k shrink(w) - bk - prox_f(u)
  grad = ctx.jac.apply(FactorPair(std::move(pu.point), std::move(pv.point)));
  grad -= ctx.bk;
  grad -= fz.point;
  return value;
}

FactorPair InpaintProblem::primal_from_dual(const InpaintContext& ctx,
                                            const StackedField& xi) const {
  const FactorPair w = ctx.anchor - (1.0 / ctx.gamma) * ctx.jac.adjoint(xi);
  return FactorPair(prox_l21_columns(w.U, lambda_ / ctx.gamma).point,
                    prox_l21_columns(w.V, lambda_ / ctx.gamma).point);
}

FactorPair inpaint_init(const Grid& observed, const MaskSet& mask, int r) {
  if (observed.rows() != mask.rows() || observed.cols() != mask.cols())
    throw std::invalid_argument("inpaint_init: mask and observation shapes differ");
  const Eigen::Index full = std::min(observed.rows(), observed.cols());
  if (r < 1 || r > full)
    throw std::invalid_argument("inpaint_init: rank out of range");
  const Eigen::MatrixXd filled = mask.apply(observed).matrix();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(filled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd roots = svd.singularValues().head(r).array().sqrt();
  return FactorPair(svd.matrixU().leftCols(r) * roots.asDiagonal(),
                    svd.matrixV().leftCols(r) * roots.asDiagonal());
}

}  // namespace ipmm
