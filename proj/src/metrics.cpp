#include "ipmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipmm {

namespace {

constexpr double kPsnrCap = 100.0;
constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2
constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2

void check_shapes(const Grid& x, const Grid& ref, const char* who) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols())
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
  if (x.size() == 0) throw std::invalid_argument(std::string(who) + ": empty image");
}

double psnr_from_sums(double squared_error, double count) {
  const double mse = squared_error / count;
  if (mse <= 0.0) return kPsnrCap;
  return std::min(10.0 * std::log10(1.0 / mse), kPsnrCap);
}

Grid ssim_window() {
  Grid w(kWindow, kWindow);
  const int c = kWindow / 2;
  for (int i = 0; i < kWindow; ++i)
    for (int j = 0; j < kWindow; ++j) {
      const double di = i - c, dj = j - c;
      w(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * kWindowSigma * kWindowSigma));
    }
  return w / w.sum();
}

}  // namespace

double psnr(const Grid& x, const Grid& ref) {
  check_shapes(x, ref, "psnr");
  return psnr_from_sums((x - ref).square().sum(), static_cast<double>(x.size()));
}

double psnr(const std::vector<Grid>& x, const std::vector<Grid>& ref) {
  if (x.empty() || x.size() != ref.size())
    throw std::invalid_argument("psnr: channel counts differ");
  double err = 0.0, count = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    check_shapes(x[c], ref[c], "psnr");
    err += (x[c] - ref[c]).square().sum();
    count += static_cast<double>(x[c].size());
  }
  return psnr_from_sums(err, count);
}

double ssim(const Grid& x, const Grid& ref) {
  check_shapes(x, ref, "ssim");
  if (x.rows() < kWindow || x.cols() < kWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  static const Grid w = ssim_window();
  double total = 0.0;
  long positions = 0;
  for (Eigen::Index i = 0; i + kWindow <= x.rows(); ++i) {
    for (Eigen::Index j = 0; j + kWindow <= x.cols(); ++j) {
      const auto px = x.block(i, j, kWindow, kWindow);
      const auto pr = ref.block(i, j, kWindow, kWindow);
      const double mx = (w * px).sum();
      const double mr = (w * pr).sum();
      const double vx = (w * px.square()).sum() - mx * mx;
      const double vr = (w * pr.square()).sum() - mr * mr;
      const double cov = (w * px * pr).sum() - mx * mr;
      total += ((2.0 * mx * mr + kC1) * (2.0 * cov + kC2)) /
               ((mx * mx + mr * mr + kC1) * (vx + vr + kC2));
      ++positions;
    }
  }
  return total / static_cast<double>(positions);
}

double ssim(const std::vector<Grid>& x, const std::vector<Grid>& ref) {
  if (x.empty() || x.size() != ref.size())
    throw std::invalid_argument("ssim: channel counts differ");
  double total = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) total += ssim(x[c], ref[c]);
  return total / static_cast<double>(x.size());
}

}  // namespace ipmm
