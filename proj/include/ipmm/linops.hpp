#pragma once

#include <cstdint>
#include <functional>

#include "ipmm/core.hpp"

namespace ipmm {

// Odd-sized convolution kernel.  Average kernels have constant entries
// 1/(size*size); Gaussian kernels are exp(-(i^2+j^2)/(2 sigma^2)) on the
// centered grid, normalized to sum to one.
class Kernel {
 public:
  static Kernel average(int size);
  static Kernel gaussian(int size, double sigma);
  static Kernel identity() { return average(1); }

  const Grid& taps() const { return taps_; }
  int rows() const { return static_cast<int>(taps_.rows()); }
  int cols() const { return static_cast<int>(taps_.cols()); }

  // Circular (periodic) 2-D convolution; the adjoint is convolution with the
  // kernel rotated by 180 degrees.
  Grid apply(const Grid& x, bool adjoint = false) const;

 private:
  explicit Kernel(Grid taps);
  Grid taps_;
  // Rank-1 factorization taps = col * row^T when one exists (it does for all
  // built-in kernels), enabling two 1-D passes instead of a 2-D sweep.
  bool separable_ = false;
  Eigen::VectorXd col_taps_, row_taps_;
};

// Forward finite differences with replicate (Neumann) boundary: the last
// column of gh and the last row of gv are identically zero.
void diff(const Grid& x, Grid& gh, Grid& gv);
// Exact transpose of diff as a map into the full difference space (the last
// column/row of the input field is ignored, matching diff's range).
Grid diff_adjoint(const Grid& gh, const Grid& gv);

// Observation mask: true entries are observed.  Application zeroes the
// unobserved entries, which makes the operator idempotent and self-adjoint.
struct MaskSet {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> omega;

  MaskSet() = default;
  explicit MaskSet(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> o)
      : omega(std::move(o)) {}
  static MaskSet all_observed(Eigen::Index m, Eigen::Index n) {
    return MaskSet(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, n, true));
  }

  Eigen::Index rows() const { return omega.rows(); }
  Eigen::Index cols() const { return omega.cols(); }
  Eigen::Index observed_count() const { return omega.count(); }

  Grid apply(const Grid& x) const;
};

// The stacked deblurring operator C : x -> (A x ; nu Dh x ; nu Dv x), where A
// is the blur and nu scales the difference blocks only.
class DeblurOperator {
 public:
  DeblurOperator(Kernel kernel, double nu) : kernel_(std::move(kernel)), nu_(nu) {}

  StackedField apply(const Grid& x) const;
  Grid adjoint(const StackedField& z) const;

  const Kernel& kernel() const { return kernel_; }
  double nu() const { return nu_; }

 private:
  Kernel kernel_;
  double nu_;
};

// Derivative of the factored completion residual at an anchor (U^k, V^k):
//   forward (G,H) -> ( P_Omega(G V^kT + U^k H^T) ; nu D(G V^kT + U^k H^T) ),
// with the exact adjoint mapping a stacked field back to factor space.
class FactorJacobian {
 public:
  FactorJacobian(const MaskSet& mask, double nu, Eigen::MatrixXd Uk, Eigen::MatrixXd Vk);

  StackedField apply(const FactorPair& d) const;
  FactorPair adjoint(const StackedField& z) const;

  Eigen::Index rows() const { return Uk_.rows(); }
  Eigen::Index cols() const { return Vk_.rows(); }
  Eigen::Index rank() const { return Uk_.cols(); }

 private:
  const MaskSet* mask_;
  double nu_;
  Eigen::MatrixXd Uk_, Vk_;
};

// Largest-singular-value estimate of a linear operator given as an
// (apply, adjoint) closure pair over Grid, by power iteration on L*L.
// Deterministic for a fixed seed; returns 0 for the zero operator.
double op_norm_estimate(const std::function<Grid(const Grid&)>& apply,
                        const std::function<Grid(const Grid&)>& adjoint,
                        Eigen::Index m, Eigen::Index n, int iters, std::uint64_t seed);

}  // namespace ipmm
