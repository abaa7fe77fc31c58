#include "ipmm/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ipmm {

namespace {

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for '" + key + "': " + value);
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad number for '" + key + "': " + value);
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw std::invalid_argument("config: '" + key + "' wants an integer, got " + value);
  return static_cast<int>(v);
}

// Seeds are full 64-bit values; going through double would round them.
std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad seed for '" + key + "': " + value);
  return v;
}

}  // namespace

Task task_from_name(const std::string& name) {
  if (name == "degrade") return Task::Degrade;
  if (name == "deblur") return Task::Deblur;
  if (name == "inpaint") return Task::Inpaint;
  if (name == "metrics") return Task::Metrics;
  if (name == "verify-trace") return Task::VerifyTrace;
  throw std::invalid_argument("config: unknown task '" + name + "'");
}

const char* task_name(Task t) {
  switch (t) {
    case Task::Degrade: return "degrade";
    case Task::Deblur: return "deblur";
    case Task::Inpaint: return "inpaint";
    case Task::Metrics: return "metrics";
    case Task::VerifyTrace: return "verify-trace";
  }
  return "?";
}

Penalty RunConfig::make_penalty() const {
  std::string name = penalty_name;
  double e = eps;
  if (name.empty()) name = (task == Task::Inpaint) ? "power" : "exp";
  if (e < 0.0) e = (task == Task::Inpaint) ? 1e-5 : 90.0;
  return Penalty::from_name(name, e, q);
}

Kernel RunConfig::make_kernel() const {
  if (blur_kind == "none") return Kernel::identity();
  if (blur_kind == "average") return Kernel::average(kernel_size < 0 ? 7 : kernel_size);
  if (blur_kind == "gaussian")
    return Kernel::gaussian(kernel_size < 0 ? 9 : kernel_size, sigma);
  throw std::invalid_argument("config: unknown blur kind '" + blur_kind + "'");
}

double RunConfig::resolved_nu() const {
  if (nu >= 0.0) return nu;
  return (task == Task::Inpaint) ? 0.6 : 0.15;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value: " + t);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

void apply_solver_overrides(IpmmConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "varrho") cfg.varrho = parse_double(key, value);
    else if (key == "gamma_lo") cfg.gamma_lo = parse_double(key, value);
    else if (key == "gamma_hi") cfg.gamma_hi = parse_double(key, value);
    else if (key == "mu_bar") cfg.mu_bar = parse_double(key, value);
    else if (key == "alpha0") cfg.alpha0 = parse_double(key, value);
    else if (key == "tau0") cfg.tau0 = parse_double(key, value);
    else if (key == "rho_tau") cfg.rho_tau = parse_double(key, value);
    else if (key == "eps_star") cfg.eps_star = parse_double(key, value);
    else if (key == "stall_window") cfg.stall_window = parse_int(key, value);
    else if (key == "stall_tol") cfg.stall_tol = parse_double(key, value);
    else if (key == "max_outer") cfg.max_outer = parse_int(key, value);
    else if (key == "max_backtracks") cfg.max_backtracks = parse_int(key, value);
    else if (key == "deep_dual_iters") cfg.deep_dual_iters = parse_int(key, value);
    else if (key == "lbfgs_memory") cfg.lbfgs.memory = parse_int(key, value);
    else if (key == "lbfgs_max_iters") cfg.lbfgs.max_iters = parse_int(key, value);
    else throw std::invalid_argument("config: unknown solver field '" + key + "'");
  }
}

void apply_run_keys(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "task") cfg.task = task_from_name(value);
    else if (key == "in") cfg.input_path = value;
    else if (key == "ref") cfg.ref_path = value;
    else if (key == "out") cfg.out_dir = value;
    else if (key == "mask") cfg.mask_spec = value;
    else if (key == "trace") cfg.trace_path = value;
    else if (key == "penalty") cfg.penalty_name = value;
    else if (key == "eps") cfg.eps = parse_double(key, value);
    else if (key == "q") cfg.q = parse_double(key, value);
    else if (key == "nu") cfg.nu = parse_double(key, value);
    else if (key == "lambda") cfg.lambda = parse_double(key, value);
    else if (key == "noise") cfg.noise = parse_double(key, value);
    else if (key == "blur") cfg.blur_kind = value;
    else if (key == "kernel_size") cfg.kernel_size = parse_int(key, value);
    else if (key == "sigma") cfg.sigma = parse_double(key, value);
    else if (key == "rank") cfg.rank = parse_int(key, value);
    else if (key == "seed") cfg.seed = parse_seed(key, value);
    else cfg.overrides[key] = value;  // solver field, validated later
  }
}

double deblur_rho_nu(double noise_level, bool gaussian_blur) {
  const double levels[] = {0.3, 0.5, 0.7, 0.9};
  const double values[] = {5.0, 2.5, 2.0 / 3.0, gaussian_blur ? 0.5 : 0.1};
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (std::abs(noise_level - levels[i]) < std::abs(noise_level - levels[best])) best = i;
  return values[best];
}

IpmmConfig deblur_solver_defaults(double nu, double noise_level, bool gaussian_blur,
                                  double theta_x0) {
  if (!(nu > 0.0)) throw std::invalid_argument("deblur defaults: nu must be positive");
  IpmmConfig cfg;
  cfg.alpha0 = std::min(deblur_rho_nu(noise_level, gaussian_blur) / nu, 50.0);
  cfg.gamma_lo = cfg.alpha0;
  cfg.gamma_hi = 1e6;
  cfg.tau0 = std::min(cfg.gamma_lo, 10.0);
  const bool big = theta_x0 > 1e5;
  cfg.rho_tau = big ? 1.2 : 1.15;
  cfg.eps_star = std::min(big ? 1e-6 : 1e-8, 1e-6 / cfg.gamma_lo);
  return cfg;
}

IpmmConfig inpaint_solver_defaults() {
  IpmmConfig cfg;
  cfg.gamma_lo = 100.0;
  cfg.alpha0 = 0.1 * cfg.gamma_lo;
  cfg.gamma_hi = 1e6;
  cfg.tau0 = 1.0;
  cfg.rho_tau = 1.2;
  cfg.eps_star = 1e-6 / cfg.gamma_lo;
  return cfg;
}

std::string effective_config_text(const RunConfig& run, const IpmmConfig& solver) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "task = " << task_name(run.task) << '\n';
  if (!run.input_path.empty()) os << "in = " << run.input_path << '\n';
  if (!run.ref_path.empty()) os << "ref = " << run.ref_path << '\n';
  os << "out = " << run.out_dir << '\n';
  if (!run.mask_spec.empty()) os << "mask = " << run.mask_spec << '\n';
  if (!run.trace_path.empty()) os << "trace = " << run.trace_path << '\n';
  os << "penalty = " << run.make_penalty().name() << '\n';
  os << "eps = " << (run.eps < 0.0 ? (run.task == Task::Inpaint ? 1e-5 : 90.0) : run.eps)
     << '\n';
  os << "q = " << run.q << '\n';
  os << "nu = " << run.resolved_nu() << '\n';
  os << "lambda = " << run.lambda << '\n';
  os << "noise = " << run.noise << '\n';
  os << "blur = " << run.blur_kind << '\n';
  if (run.blur_kind != "none") {
    os << "kernel_size = " << (run.kernel_size < 0 ? (run.blur_kind == "gaussian" ? 9 : 7)
                                                   : run.kernel_size)
       << '\n';
    if (run.blur_kind == "gaussian") os << "sigma = " << run.sigma << '\n';
  }
  if (run.rank > 0) os << "rank = " << run.rank << '\n';
  os << "seed = " << run.seed << '\n';
  os << "varrho = " << solver.varrho << '\n';
  os << "gamma_lo = " << solver.gamma_lo << '\n';
  os << "gamma_hi = " << solver.gamma_hi << '\n';
  os << "mu_bar = " << solver.mu_bar << '\n';
  os << "alpha0 = " << solver.alpha0 << '\n';
  os << "tau0 = " << solver.tau0 << '\n';
  os << "rho_tau = " << solver.rho_tau << '\n';
  os << "eps_star = " << solver.eps_star << '\n';
  os << "stall_window = " << solver.stall_window << '\n';
  os << "stall_tol = " << solver.stall_tol << '\n';
  os << "max_outer = " << solver.max_outer << '\n';
  os << "max_backtracks = " << solver.max_backtracks << '\n';
  os << "deep_dual_iters = " << solver.deep_dual_iters << '\n';
  os << "lbfgs_memory = " << solver.lbfgs.memory << '\n';
  os << "lbfgs_max_iters = " << solver.lbfgs.max_iters << '\n';
  return os.str();
}

}  // namespace ipmm
