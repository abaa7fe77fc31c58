#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace ipmm {

// An image-shaped array of doubles, m rows by n columns.
using Grid = Eigen::ArrayXXd;

// A point in the stacked residual space: one fidelity block plus the two
// finite-difference blocks, all of the same m-by-n shape.  Together they
// play the role of a single 3m-by-n matrix.
struct StackedField {
  Grid y;   // fidelity block
  Grid wh;  // horizontal-difference block
  Grid wv;  // vertical-difference block

  StackedField() = default;
  StackedField(Grid y_, Grid wh_, Grid wv_)
      : y(std::move(y_)), wh(std::move(wh_)), wv(std::move(wv_)) {}

  static StackedField zeros(Eigen::Index m, Eigen::Index n) {
    return {Grid::Zero(m, n), Grid::Zero(m, n), Grid::Zero(m, n)};
  }

  Eigen::Index rows() const { return y.rows(); }
  Eigen::Index cols() const { return y.cols(); }

  double squaredNorm() const {
    return y.matrix().squaredNorm() + wh.matrix().squaredNorm() +
           wv.matrix().squaredNorm();
  }
  double norm() const { return std::sqrt(squaredNorm()); }

  double dot(const StackedField& o) const {
    return (y * o.y).sum() + (wh * o.wh).sum() + (wv * o.wv).sum();
  }

  StackedField& operator+=(const StackedField& o) {
    y += o.y; wh += o.wh; wv += o.wv;
    return *this;
  }
  StackedField& operator-=(const StackedField& o) {
    y -= o.y; wh -= o.wh; wv -= o.wv;
    return *this;
  }
  StackedField& operator*=(double s) {
    y *= s; wh *= s; wv *= s;
    return *this;
  }

  friend StackedField operator+(StackedField a, const StackedField& b) { return a += b; }
  friend StackedField operator-(StackedField a, const StackedField& b) { return a -= b; }
  friend StackedField operator*(double s, StackedField a) { return a *= s; }
};

// The factored variable of the low-rank completion model: the represented
// image is U * V^T with U m-by-r and V n-by-r.
struct FactorPair {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;

  FactorPair() = default;
  FactorPair(Eigen::MatrixXd U_, Eigen::MatrixXd V_)
      : U(std::move(U_)), V(std::move(V_)) {
    if (U.cols() != V.cols())
      throw std::invalid_argument("FactorPair: U and V must share the rank dimension");
  }

  static FactorPair zeros(Eigen::Index m, Eigen::Index n, Eigen::Index r) {
    return {Eigen::MatrixXd::Zero(m, r), Eigen::MatrixXd::Zero(n, r)};
  }

  Eigen::Index rank() const { return U.cols(); }

  Grid product() const { return (U * V.transpose()).array(); }

  double squaredNorm() const { return U.squaredNorm() + V.squaredNorm(); }
  double norm() const { return std::sqrt(squaredNorm()); }
  double dot(const FactorPair& o) const {
    return U.cwiseProduct(o.U).sum() + V.cwiseProduct(o.V).sum();
  }

  FactorPair& operator+=(const FactorPair& o) { U += o.U; V += o.V; return *this; }
  FactorPair& operator-=(const FactorPair& o) { U -= o.U; V -= o.V; return *this; }
  FactorPair& operator*=(double s) { U *= s; V *= s; return *this; }
  friend FactorPair operator+(FactorPair a, const FactorPair& b) { return a += b; }
  friend FactorPair operator-(FactorPair a, const FactorPair& b) { return a -= b; }
  friend FactorPair operator*(double s, FactorPair a) { return a *= s; }
};

}  // namespace ipmm
