#include "ipmm/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace ipmm {

BoxSet::BoxSet(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo <= hi)) throw std::invalid_argument("BoxSet: lower bound exceeds upper bound");
}

BoxSet::BoxSet(Grid lo, Grid hi) : L_(std::move(lo)), U_(std::move(hi)) {
  if (L_->rows() != U_->rows() || L_->cols() != U_->cols())
    throw std::invalid_argument("BoxSet: bound shapes differ");
  if ((*L_ > *U_).any())
    throw std::invalid_argument("BoxSet: lower bound exceeds upper bound");
}

Grid BoxSet::project(const Grid& x) const {
  if (L_) {
    if (x.rows() != L_->rows() || x.cols() != L_->cols())
      throw std::invalid_argument("BoxSet::project: shape mismatch");
    return x.max(*L_).min(*U_);
  }
  return x.max(lo_).min(hi_);
}

double BoxSet::squared_distance(const Grid& x) const {
  Grid p = project(x);
  return (x - p).matrix().squaredNorm();
}

bool BoxSet::contains(const Grid& x, double tol) const {
  if (L_) return ((x >= *L_ - tol) && (x <= *U_ + tol)).all();
  return ((x >= lo_ - tol) && (x <= hi_ + tol)).all();
}

ProxResult prox_weighted_l1(const Grid& v, const Grid& w, double t) {
  if (v.rows() != w.rows() || v.cols() != w.cols())
    throw std::invalid_argument("prox_weighted_l1: shape mismatch");
  if ((w < 0.0).any()) throw std::invalid_argument("prox_weighted_l1: negative weight");
  if (!(t > 0.0)) throw std::invalid_argument("prox_weighted_l1: t must be positive");
  ProxResult r;
  const Grid thr = t * w;
  r.point = v.sign() * (v.abs() - thr).max(0.0);
  r.envelope = (w * r.point.abs()).sum() +
               (r.point - v).matrix().squaredNorm() / (2.0 * t);
  return r;
}

PairProx prox_iso_pair(double a, double b, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("prox_iso_pair: t must be positive");
  const double n = std::hypot(a, b);
  PairProx r{0.0, 0.0, 0.0};
  if (n > t) {
    const double s = 1.0 - t / n;
    r.a = s * a;
    r.b = s * b;
  }
  const double da = r.a - a, db = r.b - b;
  r.envelope = std::hypot(r.a, r.b) + (da * da + db * db) / (2.0 * t);
  return r;
}

MatrixProxResult prox_l21_columns(const Eigen::MatrixXd& M, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("prox_l21_columns: t must be positive");
  MatrixProxResult r;
  r.point = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  double g = 0.0, quad = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double n = M.col(j).norm();
    if (n > t) {
      const double s = 1.0 - t / n;
      r.point.col(j) = s * M.col(j);
      g += s * n;
      quad += t * t;  // ||shrunk - original|| = t per active column
    } else {
      quad += n * n;
    }
  }
  r.envelope = g + quad / (2.0 * t);
  return r;
}

StackedProxResult prox_stacked_f(const StackedField& z, const Grid& omega_fid,
                                 TvKind kind, double t) {
  if (z.y.rows() != omega_fid.rows() || z.y.cols() != omega_fid.cols())
    throw std::invalid_argument("prox_stacked_f: weight shape mismatch");
  StackedProxResult r;
  ProxResult fid = prox_weighted_l1(z.y, omega_fid, t);
  r.point.y = std::move(fid.point);
  r.envelope = fid.envelope;
  if (kind == TvKind::Anisotropic) {
    auto shrink = [t](const Grid& v, Grid& out) {
      out = v.sign() * (v.abs() - t).max(0.0);
      return out.abs().sum() + (out - v).matrix().squaredNorm() / (2.0 * t);
    };
    r.envelope += shrink(z.wh, r.point.wh) + shrink(z.wv, r.point.wv);
  } else {
    const Grid n2 = z.wh * z.wh + z.wv * z.wv;
    const Grid n = n2.sqrt();
    // Pairwise shrink: scale hits 0 exactly when the pair norm is within t.
    const Grid scale = (1.0 - t / n.max(t)).max(0.0);
    r.point.wh = scale * z.wh;
    r.point.wv = scale * z.wv;
    // Active pairs move by exactly t, contributing (n - t) + t/2; inactive
    // pairs collapse to zero, contributing n^2 / (2t).
    r.envelope += (n > t).select(n - 0.5 * t, n2 / (2.0 * t)).sum();
  }
  return r;
}

double tv_value(const Grid& gh, const Grid& gv, TvKind kind) {
  if (kind == TvKind::Anisotropic) return gh.abs().sum() + gv.abs().sum();
  return (gh * gh + gv * gv).sqrt().sum();
}

double stacked_f_value(const StackedField& z, const Grid& omega_fid, TvKind kind) {
  return (omega_fid * z.y.abs()).sum() + tv_value(z.wh, z.wv, kind);
}

}  // namespace ipmm
