#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ipmm/ipmm.hpp"
#include "ipmm/linops.hpp"
#include "ipmm/penalty.hpp"

namespace ipmm {

enum class Task { Degrade, Deblur, Inpaint, Metrics, VerifyTrace };

Task task_from_name(const std::string& name);
const char* task_name(Task t);

// Everything a command-line (or API) invocation specifies.  Negative numeric
// fields mean "not set, use the task default".
struct RunConfig {
  Task task = Task::Deblur;
  std::string input_path;
  std::string ref_path;
  std::string out_dir = ".";
  std::string mask_spec;    // "block" | "block:r1,c1,r2,c2,r3,c3" | "random:frac" | file path
  std::string trace_path;   // empty -> out_dir/trace.csv + trace.json
  std::string penalty_name; // empty -> task default
  double eps = -1.0;        // penalty epsilon; < 0 -> task default
  double q = 0.5;           // exponent of the power penalty
  double nu = -1.0;         // TV weight; < 0 -> task default
  double lambda = 0.5;      // factor-norm weight (inpainting)
  double noise = 0.3;       // impulse noise level
  std::string blur_kind = "average";  // average | gaussian | none
  int kernel_size = -1;     // < 0 -> 7 (average) / 9 (gaussian)
  double sigma = 2.0;       // gaussian kernel deviation
  int rank = -1;            // factor rank; < 0 -> min(m, n)
  std::uint64_t seed = 1;
  std::map<std::string, std::string> overrides;  // solver-field overrides

  Penalty make_penalty() const;
  Kernel make_kernel() const;  // identity kernel when blur_kind is "none"
  double resolved_nu() const;  // 0.15 deblurring / 0.6 inpainting default
};

// One key=value pair per line; blank lines and '#' comments are skipped.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> load_kv_file(const std::string& path);

// Applies textual overrides to solver settings.  Unknown keys or malformed
// numbers throw std::invalid_argument naming the offending key.
void apply_solver_overrides(IpmmConfig& cfg, const std::map<std::string, std::string>& kv);

// Applies run-level keys (the same names as the CLI flags) from a config
// file; unknown keys are routed into cfg.overrides for the solver.
void apply_run_keys(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// rho_nu for the deblurring alpha0 rule at the nearest of the studied noise
// levels 30/50/70/90% (ties resolve to the lower level).
double deblur_rho_nu(double noise_level, bool gaussian_blur);

// Solver settings reproducing the reference deblurring setup: alpha0 =
// min(rho_nu/nu, 50), gamma_lo = alpha0, tau0 = min(gamma_lo, 10), and
// rho_tau/eps_star switched on whether the starting objective exceeds 1e5.
IpmmConfig deblur_solver_defaults(double nu, double noise_level, bool gaussian_blur,
                                  double theta_x0);

// Solver settings reproducing the reference inpainting setup: gamma_lo = 100,
// alpha0 = 10, tau0 = 1, rho_tau = 1.2, eps_star = 1e-6/gamma_lo.
IpmmConfig inpaint_solver_defaults();

// Serialized effective configuration (run + solver), echoed next to outputs.
std::string effective_config_text(const RunConfig& run, const IpmmConfig& solver);

}  // namespace ipmm
