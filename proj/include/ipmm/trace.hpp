#pragma once

#include <string>
#include <vector>

namespace ipmm {

// One outer iteration of the solver.  `theta` is the objective at the start
// of the iteration; the objective reached by the step is the next row's
// `theta` (or the trace's `final_theta` for the last row).  `gap` is the
// certified duality gap of the accepted subproblem solution and `majorant`
// its surrogate value, which together replay the acceptance test.
struct TraceRow {
  int k = 0;
  double theta = 0.0;
  int jk = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  int lbfgs_iters = 0;
  double gap = 0.0;
  double step_norm = 0.0;
  double majorant = 0.0;  // surrogate value at the accepted point
  bool forced = false;    // accepted without the full inexactness certificate
};

struct Trace {
  std::vector<TraceRow> rows;
  double final_theta = 0.0;  // objective at the returned iterate
  double data_norm = 0.0;    // ||b||_F, for the relative step criterion
  bool converged = false;    // stopped by tolerance rather than the outer cap
  double varrho = 2.0;       // backtracking factor, for bound replay
  double gamma_hi = 1e6;     // curvature ceiling, for bound replay

  std::string to_csv() const;
  std::string to_json() const;
  static Trace from_json(const std::string& text);
};

// Replays the solver invariants on a logged trace: monotone objective
// decrease, the two-clause acceptance certificate on non-forced rows,
// nonnegative gaps, backtracking counts <= 40, and accepted curvatures within
// [0, gamma_hi * varrho].  Returns human-readable violations, empty if clean.
std::vector<std::string> verify_trace(const Trace& trace);

}  // namespace ipmm
