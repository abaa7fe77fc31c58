#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipmm/core.hpp"
#include "ipmm/linops.hpp"

namespace ipmm {

// Binary PGM (P5, one channel) / PPM (P6, three channels), 8-bit only.
// Loading divides by 255; saving rounds to nearest byte with clamping.
std::vector<Grid> load_image(const std::string& path);
void save_image(const std::string& path, const std::vector<Grid>& channels);

// Sets floor(level * m * n) distinct, uniformly chosen pixels to 0 or 1 with
// equal probability; the rest of the image is untouched.  Deterministic for a
// fixed seed (own bounded-draw sampling on top of std::mt19937_64, so the
// byte stream does not depend on the standard library's distributions).
Grid add_salt_pepper(const Grid& x, double level, std::uint64_t seed);

struct BlockSpec {
  Eigen::Index row = 0;  // top-left corner
  Eigen::Index col = 0;
};

// Three block corners on the image diagonal: block centers at (m/4, n/4),
// (m/2, n/2), (3m/4, 3n/4), each corner shifted up-left by block/2.
std::vector<BlockSpec> default_block_corners(Eigen::Index m, Eigen::Index n, int block);

// Marks one `block` x `block` square unobserved per corner.
MaskSet make_block_mask(Eigen::Index m, Eigen::Index n, int block,
                        const std::vector<BlockSpec>& corners);

// Bitmap mask: pixels of the (gray) image at `path` strictly below
// `threshold` are unobserved.  This is how text masks are supplied.
MaskSet load_text_mask(const std::string& path, double threshold = 0.5);

// Marks floor(frac * m * n) distinct random pixels unobserved.
MaskSet make_random_mask(Eigen::Index m, Eigen::Index n, double frac, std::uint64_t seed);

// Saves a mask as a PGM (255 = observed, 0 = unobserved).
void save_mask(const std::string& path, const MaskSet& mask);

struct DegradeSpec {
  std::optional<Kernel> blur;
  double noise_level = 0.0;
  std::optional<MaskSet> mask;
  std::uint64_t seed = 0;
};

// Degrades one channel: blur first, then impulse noise, then zero-fill of the
// unobserved entries.
Grid degrade_channel(const Grid& x, const DegradeSpec& spec);

// Applies degrade_channel to each channel with per-channel seeds
// spec.seed + channel index.  Returns the degraded channels; `corrupted`,
// when given, receives the total number of noise-corrupted positions.
std::vector<Grid> degrade(const std::vector<Grid>& channels, const DegradeSpec& spec,
                          std::int64_t* corrupted = nullptr);

}  // namespace ipmm
