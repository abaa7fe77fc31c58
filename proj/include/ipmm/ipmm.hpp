#pragma once

/*
 * The outer solver: proximal majorization-minimization with inexact,
 * dual-certified subproblem solves.
 *
 * Each outer iteration k builds the strongly convex surrogate of the
 * objective at the anchor x^k (problem.build_context), then minimizes the
 * tau-regularized negative dual with L-BFGS.  A candidate x^{k,j} recovered
 * from the current dual point is accepted as soon as both
 *
 *   (1)  Theta_kj(x^{k,j}) < Theta(x^k)                       (real progress)
 *   (2)  Theta_kj(x^{k,j}) - Phi(xi) <= (mu_k/2) (Theta(x^k) - Theta_kj(x^{k,j}))
 *
 * hold; weak duality (Phi is a lower bound on the subproblem optimum) turns
 * (2) into a verifiable certificate of inexactness.  If the surrogate fails
 * to majorize at the candidate (possible only when the residual map is
 * nonlinear), the curvature gamma is multiplied by varrho and the subproblem
 * is retried.  Schedules for alpha, mu, tau and the gamma warm start advance
 * once per outer iteration.
 *
 * Anchors that fit the observations exactly (for instance a full-rank
 * factorization start) make the quick regularized solves useless: the
 * fidelity weights are at their steepest, the descent margin of the
 * surrogate is a fraction of a percent, and no curvature on the ladder
 * certifies within a few dozen dual iterations.  When the whole ladder is
 * exhausted the loop therefore re-climbs it once in a "deep" mode — nearly
 * unregularized dual solves with a much larger iteration budget — which
 * recovers a certified strictly-decreasing step whenever one exists.  Only
 * if that fails too is a zero step recorded, letting the step-norm stopping
 * rule end the run.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ipmm/core.hpp"
#include "ipmm/lbfgs.hpp"
#include "ipmm/trace.hpp"

namespace ipmm {

struct IpmmConfig {
  double varrho = 2.0;     // curvature backtracking factor
  double gamma_lo = 10.0;  // curvature floor (also the first gamma)
  double gamma_hi = 1e6;   // curvature ceiling for warm starts
  double mu_bar = 1e10;    // inexactness budget scale, mu_k = mu_bar/k^2.1
  double alpha0 = 10.0;    // initial quadratic weight on the residual map
  double tau0 = 1.0;       // initial dual regularization
  double rho_tau = 1.2;    // tau decay factor
  double eps_star = 1e-8;  // stopping tolerance
  int stall_window = 9;    // objective history length for the stall test
  double stall_tol = 1e-5;
  int max_outer = 500;
  int max_backtracks = 40;
  // Dual iteration budget for the deep re-climb of the curvature ladder
  // (0 disables it and a failed ladder forces a zero step directly).
  int deep_dual_iters = 4000;
  LbfgsConfig lbfgs;

  void validate() const {
    if (!(varrho > 1.0)) throw std::invalid_argument("IpmmConfig: varrho must exceed 1");
    if (!(gamma_lo > 0.0) || !(gamma_lo < gamma_hi))
      throw std::invalid_argument("IpmmConfig: need 0 < gamma_lo < gamma_hi");
    if (!(mu_bar > 0.0)) throw std::invalid_argument("IpmmConfig: mu_bar must be positive");
    if (!(alpha0 > 0.0)) throw std::invalid_argument("IpmmConfig: alpha0 must be positive");
    if (!(tau0 > 0.0) || !(rho_tau > 1.0))
      throw std::invalid_argument("IpmmConfig: need tau0 > 0 and rho_tau > 1");
    if (!(eps_star > 0.0) || !(stall_tol > 0.0))
      throw std::invalid_argument("IpmmConfig: tolerances must be positive");
    if (stall_window < 1 || max_outer < 1 || max_backtracks < 1)
      throw std::invalid_argument("IpmmConfig: counters must be positive");
    if (deep_dual_iters < 0)
      throw std::invalid_argument("IpmmConfig: deep_dual_iters must be nonnegative");
  }
};

// ------------------------------------------------------------- dual flattening

inline Eigen::VectorXd flatten(const StackedField& f) {
  const Eigen::Index mn = f.rows() * f.cols();
  Eigen::VectorXd v(3 * mn);
  v.segment(0, mn) = Eigen::Map<const Eigen::VectorXd>(f.y.data(), mn);
  v.segment(mn, mn) = Eigen::Map<const Eigen::VectorXd>(f.wh.data(), mn);
  v.segment(2 * mn, mn) = Eigen::Map<const Eigen::VectorXd>(f.wv.data(), mn);
  return v;
}

inline StackedField unflatten(const Eigen::VectorXd& v, Eigen::Index m, Eigen::Index n) {
  const Eigen::Index mn = m * n;
  if (v.size() != 3 * mn) throw std::invalid_argument("unflatten: size mismatch");
  StackedField f;
  f.y = Eigen::Map<const Grid>(v.data(), m, n);
  f.wh = Eigen::Map<const Grid>(v.data() + mn, m, n);
  f.wv = Eigen::Map<const Grid>(v.data() + 2 * mn, m, n);
  return f;
}

inline double point_step_norm(const Grid& a, const Grid& b) {
  return (a - b).matrix().norm();
}
inline double point_step_norm(const FactorPair& a, const FactorPair& b) {
  return (a - b).norm();
}

// ------------------------------------------------------------------- schedules

struct ScheduleState {
  double alpha = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double gamma_start = 0.0;
};

// Advances all four schedules after outer iteration k was accepted at
// curvature accepted_gamma: alpha decays by 1.05 every third iteration with
// floor 1e-3, mu follows mu_bar/(k+1)^2.1, tau decays geometrically with
// floor eps_star, and the next gamma warm start halves the accepted value
// (clamped to [gamma_lo, gamma_hi]).
inline ScheduleState advance_schedules(int k, ScheduleState s, double accepted_gamma,
                                       const IpmmConfig& cfg) {
  if (k % 3 == 0) s.alpha = std::max(s.alpha / 1.05, 1e-3);
  s.mu = cfg.mu_bar / std::pow(static_cast<double>(k) + 1.0, 2.1);
  s.tau = std::max(s.tau / cfg.rho_tau, cfg.eps_star);
  s.gamma_start = std::clamp(accepted_gamma / cfg.varrho, cfg.gamma_lo, cfg.gamma_hi);
  return s;
}

// --------------------------------------------------------------- stopping rule

// True when the last step was relatively tiny, or when tau has bottomed out
// and the objective has stalled against the previous stall_window iterates.
// The stall clause needs at least stall_window + 1 recorded iterations.
inline bool stopping_check(const Trace& trace, const IpmmConfig& cfg) {
  if (trace.rows.empty()) return false;
  const TraceRow& last = trace.rows.back();
  if (last.step_norm / (1.0 + trace.data_norm) <= cfg.eps_star) return true;
  const int K = static_cast<int>(trace.rows.size());
  if (K < cfg.stall_window + 1) return false;
  if (!(last.tau <= cfg.eps_star)) return false;
  double recent = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= cfg.stall_window; ++j)
    recent = std::max(recent, trace.rows[static_cast<std::size_t>(K - j)].theta);
  const double cur = trace.final_theta;
  return std::abs(cur - recent) / std::max(1.0, cur) <= cfg.stall_tol;
}

// ------------------------------------------------------- inexact inner solves

template <class Point>
struct SubproblemOutcome {
  Point candidate;
  Eigen::VectorXd xi;        // dual iterate behind the candidate
  Eigen::VectorXd xi_final;  // where the dual solve stopped, for warm starts
  double gap = 0.0;       // majorant - dual lower bound at the candidate
  double majorant = 0.0;  // surrogate value at the candidate
  double dual = 0.0;      // certified lower bound on the subproblem optimum
  int lbfgs_iters = 0;
  bool fired = false;  // true iff both acceptance clauses were certified
};

// Minimizes Psi(xi) = -Phi(xi) + (tau/2)||xi - xi_init||^2 by L-BFGS, probing
// the recovered primal candidate after every accepted step.  Fires on the
// two-clause certificate; on a cap without firing, restarts once with fresh
// memory, then returns the best candidate seen flagged as not fired.
//
// The warm start itself is never accepted outright: a solve must either take
// at least one dual step or prove the dual is already stationary (gradient
// tolerance), otherwise a carried-over dual point that happens to satisfy the
// certificate would be re-accepted forever and the outer loop would crawl.
template <class Problem>
SubproblemOutcome<typename Problem::Point> solve_subproblem_inexact(
    const Problem& problem, const typename Problem::Context& ctx,
    const Eigen::VectorXd& xi_init, double mu, double tau, double theta_anchor,
    const LbfgsConfig& lbfgs_cfg) {
  using Point = typename Problem::Point;
  if (!(mu > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("solve_subproblem_inexact: mu and tau must be positive");
  const Eigen::Index m = problem.rows(), n = problem.cols();

  SubproblemOutcome<Point> out;
  out.majorant = std::numeric_limits<double>::infinity();

  LbfgsObjective psi = [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
    StackedField gphi;
    const double phi = problem.dual_value_grad(ctx, unflatten(v, m, n), gphi);
    grad = tau * (v - xi_init) - flatten(gphi);
    return 0.5 * tau * (v - xi_init).squaredNorm() - phi;
  };

  bool have_best = false;
  bool hopeless = false;  // dual value (nearly) reached the anchor objective
  // Declaring hopelessness slightly below the anchor value costs at most a
  // relatively negligible descent, and spares long dual solves at anchors
  // that already minimize their own surrogate.
  const double hopeless_bar =
      theta_anchor - 1e-9 * std::max(1.0, std::abs(theta_anchor));
  auto assess = [&](const Eigen::VectorXd& v, double psi_val,
                    bool may_fire) -> bool {
    // Recover Phi(v) from Psi(v) instead of re-evaluating the dual oracle.
    const double phi = 0.5 * tau * (v - xi_init).squaredNorm() - psi_val;
    if (phi >= hopeless_bar) {
      // Weak duality: the exact subproblem minimum is >= phi, so no candidate
      // can meaningfully satisfy the descent clause at this gamma.  Stop the
      // solve; the caller escalates gamma right away.
      hopeless = true;
      return true;
    }
    Point cand = problem.primal_from_dual(ctx, unflatten(v, m, n));
    const double maj = problem.majorant(ctx, cand);
    const bool decreased = maj < theta_anchor;
    const bool certified = (maj - phi) <= 0.5 * mu * (theta_anchor - maj);
    const bool fire = may_fire && decreased && certified;
    if (fire || !have_best || maj < out.majorant) {
      have_best = true;
      out.candidate = std::move(cand);
      out.majorant = maj;
      out.dual = phi;
      out.gap = maj - phi;
      out.xi = v;
    }
    if (fire) out.fired = true;
    return fire;
  };
  bool at_start = true;
  LbfgsStopCallback probe = [&](const Eigen::VectorXd& v, double psi_val) -> bool {
    const bool may_fire = !at_start;
    at_start = false;
    return assess(v, psi_val, may_fire);
  };

  auto [x1, rep1] = lbfgs_minimize(psi, xi_init, lbfgs_cfg, probe);
  out.lbfgs_iters = rep1.iterations;
  if (out.fired || hopeless) {
    out.xi_final = std::move(x1);
    return out;
  }
  if (rep1.reason == LbfgsStop::GradTol) {
    // The dual is stationary (e.g. a carried-over near-optimal warm start);
    // no further dual progress is possible, so the certificate may be tested
    // on the stopping point itself.
    assess(x1, rep1.final_value, true);
    out.xi_final = std::move(x1);
    return out;
  }
  // One restart with cleared curvature memory from where the first run ended.
  auto [x2, rep2] = lbfgs_minimize(psi, std::move(x1), lbfgs_cfg, probe);
  out.lbfgs_iters += rep2.iterations;
  if (!out.fired && !hopeless) assess(x2, rep2.final_value, true);
  out.xi_final = std::move(x2);
  return out;
}

// ------------------------------------------------------------------ outer loop

template <class Problem>
struct RunResult {
  typename Problem::Point point;
  Trace trace;
};

template <class Problem>
RunResult<Problem> run(const Problem& problem, typename Problem::Point x0,
                       const IpmmConfig& cfg) {
  cfg.validate();
  using Point = typename Problem::Point;
  const Eigen::Index m = problem.rows(), n = problem.cols();

  Trace trace;
  trace.varrho = cfg.varrho;
  trace.gamma_hi = cfg.gamma_hi;
  trace.data_norm = problem.data_norm();

  Point x = std::move(x0);
  double theta = problem.objective(x);
  if (!std::isfinite(theta))
    throw std::domain_error("ipmm: objective is not finite at the start point");
  trace.final_theta = theta;

  ScheduleState sched{cfg.alpha0, cfg.mu_bar, cfg.tau0, cfg.gamma_lo};
  Eigen::VectorXd xi_warm = Eigen::VectorXd::Zero(3 * m * n);
  const double gamma_cap = cfg.gamma_hi * cfg.varrho * (1.0 + 1e-12);

  for (int k = 0; k < cfg.max_outer; ++k) {
    TraceRow row;
    row.k = k;
    row.theta = theta;
    row.alpha = sched.alpha;
    row.mu = sched.mu;
    row.tau = sched.tau;

    double gamma = sched.gamma_start;
    int j = 0;
    bool deep = false;  // true on the second climb of the curvature ladder
    Point x_next;
    double theta_next = theta;
    double last_gap = 0.0;
    while (true) {
      LbfgsConfig inner = cfg.lbfgs;
      double tau_eff = sched.tau;
      if (deep) {
        inner.max_iters = cfg.deep_dual_iters;
        tau_eff = cfg.eps_star;
      }
      auto ctx = problem.build_context(x, gamma, sched.alpha);
      auto sub = solve_subproblem_inexact(problem, ctx, xi_warm, sched.mu,
                                          tau_eff, theta, inner);
      row.lbfgs_iters += sub.lbfgs_iters;
      last_gap = std::max(sub.gap, 0.0);
      xi_warm = std::move(sub.xi_final);  // dual progress survives rejections
      // A solve can end without any candidate when weak duality proves the
      // descent clause unsatisfiable at this gamma; treat it as a rejection.
      const double theta_cand = std::isfinite(sub.majorant)
                                    ? problem.objective(sub.candidate)
                                    : std::numeric_limits<double>::infinity();
      const double slack = 1e-12 * std::max(1.0, std::abs(sub.majorant));
      const bool majorizes = theta_cand <= sub.majorant + slack;
      const bool decreased = sub.majorant < theta;
      if (std::isfinite(theta_cand) && majorizes && (sub.fired || decreased)) {
        x_next = std::move(sub.candidate);
        theta_next = theta_cand;
        row.jk = j;
        row.gamma = gamma;
        row.gap = sub.gap;
        row.majorant = sub.majorant;
        row.forced = !sub.fired;
        break;
      }
      ++j;
      if (j >= cfg.max_backtracks || gamma * cfg.varrho > gamma_cap) {
        if (!deep && cfg.deep_dual_iters > 0 && j < cfg.max_backtracks) {
          // Quick solves certified nothing at any curvature.  Re-climb the
          // ladder with nearly unregularized, high-budget dual solves, which
          // close the duality gap far enough to certify whenever the anchor
          // does not already minimize its own surrogate.
          deep = true;
          gamma = sched.gamma_start;
          continue;
        }
        // The anchor essentially minimizes its own surrogate: take a zero
        // step and let the step-norm stopping condition end the run.
        x_next = x;
        theta_next = theta;
        row.jk = j;
        row.gamma = gamma;
        row.gap = last_gap;
        row.majorant = theta;
        row.forced = true;
        break;
      }
      gamma *= cfg.varrho;
    }

    row.step_norm = point_step_norm(x_next, x);
    trace.rows.push_back(row);
    x = std::move(x_next);
    theta = theta_next;
    trace.final_theta = theta;
    if (!std::isfinite(theta))
      throw std::domain_error("ipmm: objective became non-finite");

    sched = advance_schedules(k, sched, row.gamma, cfg);
    if (stopping_check(trace, cfg)) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(x), std::move(trace)};
}

}  // namespace ipmm
