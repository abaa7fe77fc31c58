#include "ipmm/restore.hpp"

#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>

namespace ipmm {

RestoreOutcome run_deblur(const Grid& observed, const Kernel& kernel,
                          const Penalty& penalty, double nu, double noise_level,
                          bool gaussian_blur,
                          const std::map<std::string, std::string>& overrides) {
  DeblurProblem problem(kernel, observed, penalty, nu, BoxSet(0.0, 1.0),
                        TvKind::Isotropic);
  const Grid x0 = problem.box().project(observed);
  IpmmConfig solver =
      deblur_solver_defaults(nu, noise_level, gaussian_blur, problem.objective(x0));
  apply_solver_overrides(solver, overrides);
  RunResult<DeblurProblem> result = run(problem, x0, solver);

  RestoreOutcome out;
  out.restored.push_back(std::move(result.point));
  out.converged = result.trace.converged;
  out.traces.push_back(std::move(result.trace));
  out.solver = solver;
  return out;
}

RestoreOutcome run_inpaint(const std::vector<Grid>& observed, const MaskSet& mask,
                           const Penalty& penalty, double nu, double lambda, int rank,
                           const std::map<std::string, std::string>& overrides) {
  if (observed.empty()) throw std::invalid_argument("run_inpaint: no channels");
  IpmmConfig solver = inpaint_solver_defaults();
  apply_solver_overrides(solver, overrides);

  const int r = rank > 0
                    ? rank
                    : static_cast<int>(std::min(observed[0].rows(), observed[0].cols()));

  const std::size_t nch = observed.size();
  std::vector<Grid> restored(nch);
  std::vector<Trace> traces(nch);
  std::vector<std::exception_ptr> errors(nch);

  auto solve_channel = [&](std::size_t c) {
    try {
      InpaintProblem problem(mask, observed[c], penalty, nu, lambda,
                             TvKind::Anisotropic);
      FactorPair x0 = inpaint_init(observed[c], mask, r);
      RunResult<InpaintProblem> result = run(problem, std::move(x0), solver);
      restored[c] = result.point.product();
      traces[c] = std::move(result.trace);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (nch == 1) {
    solve_channel(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(nch);
    for (std::size_t c = 0; c < nch; ++c) workers.emplace_back(solve_channel, c);
    for (std::thread& w : workers) w.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  RestoreOutcome out;
  out.restored = std::move(restored);
  out.converged = true;
  for (const Trace& t : traces) out.converged = out.converged && t.converged;
  out.traces = std::move(traces);
  out.solver = solver;
  return out;
}

}  // namespace ipmm
