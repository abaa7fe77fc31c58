#include "ipmm/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ipmm {

namespace {

// Skips whitespace and '#' comment lines between PNM header tokens.
void skip_pnm_separators(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      in.get();
    } else {
      return;
    }
  }
}

long read_pnm_int(std::istream& in, const std::string& path) {
  skip_pnm_separators(in);
  long v = 0;
  if (!(in >> v) || v < 0)
    throw std::runtime_error(path + ": malformed PNM header");
  return v;
}

// Unbiased draw from {0, ..., n-1} by rejection on the raw 64-bit stream.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= reject_below) return r % n;
  }
}

// First `count` entries of a seeded uniform shuffle of {0, ..., total-1}.
std::vector<std::uint64_t> sample_positions(std::uint64_t total, std::uint64_t count,
                                            std::mt19937_64& rng) {
  std::vector<std::uint64_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::uint64_t i = 0; i < count; ++i)
    std::swap(idx[i], idx[i + bounded_draw(rng, total - i)]);
  idx.resize(count);
  return idx;
}

}  // namespace

std::vector<Grid> load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  char p = 0, kind = 0;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6'))
    throw std::runtime_error(path + ": not a binary PGM/PPM file");
  const long w = read_pnm_int(in, path);
  const long h = read_pnm_int(in, path);
  const long maxval = read_pnm_int(in, path);
  if (w <= 0 || h <= 0) throw std::runtime_error(path + ": empty image");
  if (maxval != 255) throw std::runtime_error(path + ": only 8-bit depth is supported");
  in.get();  // single separator byte after the header
  const int nch = (kind == '5') ? 1 : 3;
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * nch);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error(path + ": truncated pixel data");
  std::vector<Grid> channels(nch, Grid(h, w));
  std::size_t pos = 0;
  for (long i = 0; i < h; ++i)
    for (long j = 0; j < w; ++j)
      for (int c = 0; c < nch; ++c) channels[c](i, j) = bytes[pos++] / 255.0;
  return channels;
}

void save_image(const std::string& path, const std::vector<Grid>& channels) {
  if (channels.size() != 1 && channels.size() != 3)
    throw std::invalid_argument(path + ": images have one or three channels");
  const Eigen::Index h = channels[0].rows(), w = channels[0].cols();
  for (const Grid& c : channels)
    if (c.rows() != h || c.cols() != w)
      throw std::invalid_argument(path + ": channel shapes differ");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << (channels.size() == 1 ? "P5" : "P6") << '\n' << w << ' ' << h << "\n255\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(h) * w * channels.size());
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      for (const Grid& c : channels) {
        const double v = std::min(std::max(c(i, j), 0.0), 1.0);
        bytes.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

Grid add_salt_pepper(const Grid& x, double level, std::uint64_t seed) {
  if (!(level >= 0.0 && level < 1.0))
    throw std::invalid_argument("add_salt_pepper: level must be in [0, 1)");
  Grid out = x;
  const auto total = static_cast<std::uint64_t>(x.size());
  const auto count = static_cast<std::uint64_t>(level * static_cast<double>(total));
  if (count == 0) return out;
  std::mt19937_64 rng(seed);
  const std::vector<std::uint64_t> hits = sample_positions(total, count, rng);
  const auto n = static_cast<std::uint64_t>(x.cols());
  for (const std::uint64_t p : hits) {
    const auto i = static_cast<Eigen::Index>(p / n);
    const auto j = static_cast<Eigen::Index>(p % n);
    out(i, j) = (rng() & 1u) ? 1.0 : 0.0;
  }
  return out;
}

std::vector<BlockSpec> default_block_corners(Eigen::Index m, Eigen::Index n, int block) {
  const Eigen::Index half = block / 2;
  return {{m / 4 - half, n / 4 - half},
          {m / 2 - half, n / 2 - half},
          {3 * m / 4 - half, 3 * n / 4 - half}};
}

MaskSet make_block_mask(Eigen::Index m, Eigen::Index n, int block,
                        const std::vector<BlockSpec>& corners) {
  if (block <= 0) throw std::invalid_argument("make_block_mask: block size must be positive");
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> obs =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, n, true);
  for (const BlockSpec& c : corners) {
    if (c.row < 0 || c.col < 0 || c.row + block > m || c.col + block > n)
      throw std::invalid_argument("make_block_mask: block out of bounds");
    obs.block(c.row, c.col, block, block).setConstant(false);
  }
  return MaskSet(std::move(obs));
}

MaskSet load_text_mask(const std::string& path, double threshold) {
  const std::vector<Grid> channels = load_image(path);
  Grid gray = channels[0];
  for (std::size_t c = 1; c < channels.size(); ++c) gray += channels[c];
  gray /= static_cast<double>(channels.size());
  return MaskSet((gray >= threshold).eval());
}

MaskSet make_random_mask(Eigen::Index m, Eigen::Index n, double frac, std::uint64_t seed) {
  if (!(frac >= 0.0 && frac < 1.0))
    throw std::invalid_argument("make_random_mask: fraction must be in [0, 1)");
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> obs =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, n, true);
  const auto total = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
  const auto count = static_cast<std::uint64_t>(frac * static_cast<double>(total));
  std::mt19937_64 rng(seed);
  for (const std::uint64_t p : sample_positions(total, count, rng)) {
    const auto i = static_cast<Eigen::Index>(p / static_cast<std::uint64_t>(n));
    const auto j = static_cast<Eigen::Index>(p % static_cast<std::uint64_t>(n));
    obs(i, j) = false;
  }
  return MaskSet(std::move(obs));
}

void save_mask(const std::string& path, const MaskSet& mask) {
  Grid img(mask.rows(), mask.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      img(i, j) = mask.omega(i, j) ? 1.0 : 0.0;
  save_image(path, {img});
}

Grid degrade_channel(const Grid& x, const DegradeSpec& spec) {
  Grid out = spec.blur ? spec.blur->apply(x) : x;
  out = add_salt_pepper(out, spec.noise_level, spec.seed);
  if (spec.mask) {
    if (spec.mask->rows() != out.rows() || spec.mask->cols() != out.cols())
      throw std::invalid_argument("degrade_channel: mask shape mismatch");
    out = spec.mask->apply(out);
  }
  return out;
}

std::vector<Grid> degrade(const std::vector<Grid>& channels, const DegradeSpec& spec,
                          std::int64_t* corrupted) {
  std::vector<Grid> out;
  out.reserve(channels.size());
  std::int64_t hit = 0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    DegradeSpec per = spec;
    per.seed = spec.seed + c;
    out.push_back(degrade_channel(channels[c], per));
    hit += static_cast<std::int64_t>(spec.noise_level *
                                     static_cast<double>(channels[c].size()));
  }
  if (corrupted) *corrupted = hit;
  return out;
}

}  // namespace ipmm
