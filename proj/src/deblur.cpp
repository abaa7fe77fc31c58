#include "ipmm/deblur.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ipmm {

DeblurProblem::DeblurProblem(Kernel kernel, Grid observed, Penalty penalty,
                             double nu, BoxSet box, TvKind tv)
    : op_(std::move(kernel), nu),
      observed_(std::move(observed)),
      penalty_(std::move(penalty)),
      nu_(nu),
      box_(std::move(box)),
      tv_(tv) {
  if (nu_ < 0.0) throw std::invalid_argument("DeblurProblem: nu must be nonnegative");
}

double DeblurProblem::objective(const Grid& x) const {
  if (!box_.contains(x, 1e-12)) return std::numeric_limits<double>::infinity();
  const Grid residual = op_.kernel().apply(x) - observed_;
  Grid gh, gv;
  diff(x, gh, gv);
  return penalty_.vartheta(residual.abs()) + nu_ * tv_value(gh, gv, tv_);
}

DeblurContext DeblurProblem::build_context(const Grid& xk, double gamma,
                                           double alpha) const {
  if (!(gamma > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("build_context: gamma and alpha must be positive");
  DeblurContext ctx;
  ctx.anchor = xk;
  ctx.gamma = gamma;
  ctx.alpha = alpha;
  const Grid F = op_.kernel().apply(xk) - observed_;
  const Grid absF = F.abs();
  ctx.omega = penalty_.grad_vartheta(absF);
  ctx.Ck = penalty_.vartheta(absF) - (ctx.omega * absF).sum();
  Grid gh, gv;
  diff(xk, gh, gv);
  ctx.c = StackedField(F, nu_ * gh, nu_ * gv);
  ctx.bbar = StackedField(observed_, Grid::Zero(xk.rows(), xk.cols()),
                          Grid::Zero(xk.rows(), xk.cols()));
  return ctx;
}

double DeblurProblem::majorant(const DeblurContext& ctx, const Grid& x) const {
  if (!box_.contains(x, 1e-12)) return std::numeric_limits<double>::infinity();
  const Grid residual = op_.kernel().apply(x) - observed_;
  Grid gh, gv;
  diff(x, gh, gv);
  const Grid dx = x - ctx.anchor;
  const StackedField cdx = op_.apply(dx);
  return (ctx.omega * residual.abs()).sum() + nu_ * tv_value(gh, gv, tv_) +
         0.5 * ctx.gamma * dx.matrix().squaredNorm() +
         0.5 * ctx.alpha * cdx.squaredNorm() + ctx.Ck;
}

double DeblurProblem::dual_value(const DeblurContext& ctx,
                                 const StackedField& xi) const {
  StackedField unused;
  return dual_value_grad(ctx, xi, unused);
}

double DeblurProblem::dual_value_grad(const DeblurContext& ctx,
                                      const StackedField& xi,
                                      StackedField& grad) const {
  const double a = ctx.alpha, g = ctx.gamma;
  // z-block: Moreau envelope of f at c + xi/alpha with parameter 1/alpha.
  StackedField u = ctx.c;
  u += (1.0 / a) * xi;
  StackedProxResult fz = prox_stacked_f(u, ctx.omega, tv_, 1.0 / a);
  // x-block: projection of the shifted anchor onto the box.
  const Grid cstar_xi = op_.adjoint(xi);
  const Grid w = ctx.anchor - (1.0 / g) * cstar_xi;
  const Grid px = box_.project(w);
  const double dist2 = (w - px).matrix().squaredNorm();
  const double value = fz.envelope - xi.squaredNorm() / (2.0 * a) -
                       cstar_xi.matrix().squaredNorm() / (2.0 * g) +
                       0.5 * g * dist2 + ctx.Ck;
  // grad Phi = C proj(w) - bbar - prox_f(u)
  grad = op_.apply(px);
  grad -= ctx.bbar;
  grad -= fz.point;
  return value;
}

Grid DeblurProblem::primal_from_dual(const DeblurContext& ctx,
                                     const StackedField& xi) const {
  const Grid w = ctx.anchor - (1.0 / ctx.gamma) * op_.adjoint(xi);
  return box_.project(w);
}

}  // namespace ipmm
