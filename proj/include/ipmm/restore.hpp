#pragma once

#include <map>
#include <string>
#include <vector>

#include "ipmm/config.hpp"
#include "ipmm/deblur.hpp"
#include "ipmm/inpaint.hpp"
#include "ipmm/ipmm.hpp"
#include "ipmm/trace.hpp"

namespace ipmm {

struct RestoreOutcome {
  std::vector<Grid> restored;  // one channel per input channel
  std::vector<Trace> traces;   // per-channel solver traces
  IpmmConfig solver;           // the effective solver settings
  bool converged = false;      // true iff every channel stopped by tolerance
};

// Deblurs one gray channel: box [0,1], isotropic TV, start point b, solver
// settings derived from (nu, noise level, kernel kind, starting objective)
// and then patched by the textual overrides.
RestoreOutcome run_deblur(const Grid& observed, const Kernel& kernel,
                          const Penalty& penalty, double nu, double noise_level,
                          bool gaussian_blur,
                          const std::map<std::string, std::string>& overrides = {});

// Inpaints one or more channels sharing a mask: anisotropic TV, factored
// rank-r variable initialized from the truncated SVD of each channel.
// Channels run concurrently; results are deterministic regardless.
RestoreOutcome run_inpaint(const std::vector<Grid>& observed, const MaskSet& mask,
                           const Penalty& penalty, double nu, double lambda, int rank,
                           const std::map<std::string, std::string>& overrides = {});

}  // namespace ipmm
