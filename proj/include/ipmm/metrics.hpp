#pragma once

#include <vector>

#include "ipmm/core.hpp"

namespace ipmm {

// Peak signal-to-noise ratio for unit dynamic range, 10 log10(1 / MSE),
// capped at 100 dB (identical inputs would be infinite).  The multi-channel
// overload pools the squared error over all channels.
double psnr(const Grid& x, const Grid& ref);
double psnr(const std::vector<Grid>& x, const std::vector<Grid>& ref);

// Single-scale structural similarity: 11x11 Gaussian window with sigma 1.5,
// K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over the positions where
// the window fits entirely inside the image (no padding).  Images smaller
// than the window are rejected.  The multi-channel overload averages the
// per-channel scores.
double ssim(const Grid& x, const Grid& ref);
double ssim(const std::vector<Grid>& x, const std::vector<Grid>& ref);

}  // namespace ipmm
