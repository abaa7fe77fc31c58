#include "ipmm/linops.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace ipmm {

Kernel::Kernel(Grid taps) : taps_(std::move(taps)) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(taps_.matrix(),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() > 0 && (sv.size() == 1 || sv(1) <= 1e-14 * sv(0))) {
    const double root = std::sqrt(sv(0));
    col_taps_ = root * svd.matrixU().col(0);
    row_taps_ = root * svd.matrixV().col(0);
    separable_ =
        (taps_.matrix() - col_taps_ * row_taps_.transpose()).cwiseAbs().maxCoeff() <=
        1e-14 * std::max(1.0, taps_.abs().maxCoeff());
  }
}

Kernel Kernel::average(int size) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("Kernel::average: size must be odd and positive");
  return Kernel(Grid::Constant(size, size, 1.0 / (static_cast<double>(size) * size)));
}

Kernel Kernel::gaussian(int size, double sigma) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("Kernel::gaussian: size must be odd and positive");
  if (!(sigma > 0.0))
    throw std::invalid_argument("Kernel::gaussian: sigma must be positive");
  Grid taps(size, size);
  const int c = size / 2;
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) {
      const double di = i - c, dj = j - c;
      taps(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  taps /= taps.sum();
  return Kernel(std::move(taps));
}

namespace {

// out(i,j) += w * x(i, (j + b) mod n): one circularly shifted column-block add.
void add_col_shift(Grid& out, const Grid& x, double w, Eigen::Index b) {
  const Eigen::Index m = out.rows(), n = out.cols();
  out.block(0, 0, m, n - b) += w * x.block(0, b, m, n - b);
  if (b > 0) out.block(0, n - b, m, b) += w * x.block(0, 0, m, b);
}

// out(i,j) += w * x((i + a) mod m, j): the row-direction counterpart.
void add_row_shift(Grid& out, const Grid& x, double w, Eigen::Index a) {
  const Eigen::Index m = out.rows(), n = out.cols();
  out.block(0, 0, m - a, n) += w * x.block(a, 0, m - a, n);
  if (a > 0) out.block(m - a, 0, a, n) += w * x.block(0, 0, a, n);
}

}  // namespace

Grid Kernel::apply(const Grid& x, bool adjoint) const {
  const Eigen::Index m = x.rows(), n = x.cols();
  const int kh = rows(), kw = cols();
  const int ch = kh / 2, cw = kw / 2;
  Grid out = Grid::Zero(m, n);
  // y(i,j) = sum_{p,q} K(p,q) x(i - (p-ch), j - (q-cw))  (indices mod m, n);
  // the adjoint flips the sign of the offsets, i.e. convolves with the
  // 180-degree rotation of K.  Each tap is a circular shift of x, done as
  // block accumulations instead of per-pixel wrapped indexing.
  if (separable_) {
    // K = col * row^T: convolve columns with row_taps_, then rows of the
    // intermediate with col_taps_.
    Grid tmp = Grid::Zero(m, n);
    for (int q = 0; q < kw; ++q) {
      const double k = row_taps_(q);
      if (k == 0.0) continue;
      const int oj = adjoint ? (q - cw) : -(q - cw);
      add_col_shift(tmp, x, k, ((oj % n) + n) % n);
    }
    for (int p = 0; p < kh; ++p) {
      const double k = col_taps_(p);
      if (k == 0.0) continue;
      const int oi = adjoint ? (p - ch) : -(p - ch);
      add_row_shift(out, tmp, k, ((oi % m) + m) % m);
    }
    return out;
  }
  for (int q = 0; q < kw; ++q) {
    for (int p = 0; p < kh; ++p) {
      const double k = taps_(p, q);
      if (k == 0.0) continue;
      const int oi = adjoint ? (p - ch) : -(p - ch);
      const int oj = adjoint ? (q - cw) : -(q - cw);
      const Eigen::Index a = ((oi % m) + m) % m;  // out(i,j) += k x(i+a, j+b)
      const Eigen::Index b = ((oj % n) + n) % n;
      out.block(0, 0, m - a, n - b) += k * x.block(a, b, m - a, n - b);
      if (a > 0) out.block(m - a, 0, a, n - b) += k * x.block(0, b, a, n - b);
      if (b > 0) out.block(0, n - b, m - a, b) += k * x.block(a, 0, m - a, b);
      if (a > 0 && b > 0) out.block(m - a, n - b, a, b) += k * x.block(0, 0, a, b);
    }
  }
  return out;
}

void diff(const Grid& x, Grid& gh, Grid& gv) {
  const Eigen::Index m = x.rows(), n = x.cols();
  gh = Grid::Zero(m, n);
  gv = Grid::Zero(m, n);
  if (n > 1)
    gh.leftCols(n - 1) = x.rightCols(n - 1) - x.leftCols(n - 1);
  if (m > 1)
    gv.topRows(m - 1) = x.bottomRows(m - 1) - x.topRows(m - 1);
}

Grid diff_adjoint(const Grid& gh, const Grid& gv) {
  if (gh.rows() != gv.rows() || gh.cols() != gv.cols())
    throw std::invalid_argument("diff_adjoint: block shapes differ");
  const Eigen::Index m = gh.rows(), n = gh.cols();
  Grid out = Grid::Zero(m, n);
  // <gh, Dh x> pairs gh(i,j) with x(i,j+1) - x(i,j) for j < n-1, so the
  // transpose scatters gh(i,j) into column j+1 and subtracts it from column j;
  // the last columns/rows of the input never enter the pairing.
  if (n > 1) {
    out.rightCols(n - 1) += gh.leftCols(n - 1);
    out.leftCols(n - 1) -= gh.leftCols(n - 1);
  }
  if (m > 1) {
    out.bottomRows(m - 1) += gv.topRows(m - 1);
    out.topRows(m - 1) -= gv.topRows(m - 1);
  }
  return out;
}

Grid MaskSet::apply(const Grid& x) const {
  if (x.rows() != omega.rows() || x.cols() != omega.cols())
    throw std::invalid_argument("MaskSet::apply: shape mismatch");
  return omega.select(x, Grid::Zero(x.rows(), x.cols()));
}

StackedField DeblurOperator::apply(const Grid& x) const {
  StackedField z;
  z.y = kernel_.apply(x, /*adjoint=*/false);
  diff(x, z.wh, z.wv);
  z.wh *= nu_;
  z.wv *= nu_;
  return z;
}

Grid DeblurOperator::adjoint(const StackedField& z) const {
  Grid out = kernel_.apply(z.y, /*adjoint=*/true);
  out += nu_ * diff_adjoint(z.wh, z.wv);
  return out;
}

FactorJacobian::FactorJacobian(const MaskSet& mask, double nu,
                               Eigen::MatrixXd Uk, Eigen::MatrixXd Vk)
    : mask_(&mask), nu_(nu), Uk_(std::move(Uk)), Vk_(std::move(Vk)) {
  if (Uk_.cols() != Vk_.cols())
    throw std::invalid_argument("FactorJacobian: rank mismatch between factors");
  if (mask_->rows() != Uk_.rows() || mask_->cols() != Vk_.rows())
    throw std::invalid_argument("FactorJacobian: mask shape mismatch");
}

StackedField FactorJacobian::apply(const FactorPair& d) const {
  if (d.U.rows() != Uk_.rows() || d.V.rows() != Vk_.rows() || d.rank() != rank())
    throw std::invalid_argument("FactorJacobian::apply: shape mismatch");
  const Grid inner = (d.U * Vk_.transpose() + Uk_ * d.V.transpose()).array();
  StackedField z;
  z.y = mask_->apply(inner);
  diff(inner, z.wh, z.wv);
  z.wh *= nu_;
  z.wv *= nu_;
  return z;
}

FactorPair FactorJacobian::adjoint(const StackedField& z) const {
  if (z.rows() != mask_->rows() || z.cols() != mask_->cols())
    throw std::invalid_argument("FactorJacobian::adjoint: shape mismatch");
  // Pull the stacked field back to image space, then through the bilinear map.
  Grid img = mask_->apply(z.y);
  img += nu_ * diff_adjoint(z.wh, z.wv);
  FactorPair out;
  out.U = img.matrix() * Vk_;
  out.V = img.matrix().transpose() * Uk_;
  return out;
}

double op_norm_estimate(const std::function<Grid(const Grid&)>& apply,
                        const std::function<Grid(const Grid&)>& adjoint,
                        Eigen::Index m, Eigen::Index n, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("op_norm_estimate: iters must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Grid v(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) v(i, j) = unif(rng);
  double nv = v.matrix().norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    Grid w = adjoint(apply(v));
    const double nw = w.matrix().norm();
    if (nw == 0.0) return 0.0;
    sigma = std::sqrt(nw);
    v = w / nw;
  }
  return sigma;
}

}  // namespace ipmm
