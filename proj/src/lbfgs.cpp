#include "ipmm/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ipmm {

namespace {

struct Pair {
  Eigen::VectorXd s, y;
  double rho;  // 1 / (s.y)
};

// Evaluation bundle at a trial step length.
struct Probe {
  double alpha;
  double value;
  double deriv;  // directional derivative g . d
  Eigen::VectorXd x, grad;
};

class Search {
 public:
  Search(const LbfgsObjective& f, const Eigen::VectorXd& x0,
         const Eigen::VectorXd& d, double f0, double d0)
      : f_(f), x0_(x0), d_(d), f0_(f0), d0_(d0) {}

  Probe eval(double alpha) {
    Probe p;
    p.alpha = alpha;
    p.x = x0_ + alpha * d_;
    p.grad.resize(x0_.size());
    p.value = f_(p.x, p.grad);
    p.deriv = p.grad.dot(d_);
    return p;
  }

  double f0() const { return f0_; }
  double d0() const { return d0_; }

 private:
  const LbfgsObjective& f_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& d_;
  double f0_, d0_;
};

// Strong-Wolfe zoom on a bracket known to contain an acceptable step.
bool zoom(Search& s, Probe lo, Probe hi, double c1, double c2, int budget, Probe& out) {
  for (int i = 0; i < budget; ++i) {
    // Quadratic interpolation using lo's value/derivative and hi's value,
    // safeguarded towards bisection.
    double a = 0.5 * (lo.alpha + hi.alpha);
    const double denom = lo.value - hi.value + lo.deriv * (hi.alpha - lo.alpha);
    if (std::fabs(denom) > 1e-300) {
      const double cand =
          lo.alpha + 0.5 * lo.deriv * (hi.alpha - lo.alpha) * (hi.alpha - lo.alpha) / denom;
      const double lo_a = std::min(lo.alpha, hi.alpha), hi_a = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (hi_a - lo_a);
      if (std::isfinite(cand) && cand > lo_a + margin && cand < hi_a - margin) a = cand;
    }
    Probe p = s.eval(a);
    if (!std::isfinite(p.value) || p.value > s.f0() + c1 * a * s.d0() || p.value >= lo.value) {
      hi = std::move(p);
    } else {
      if (std::fabs(p.deriv) <= -c2 * s.d0()) {
        out = std::move(p);
        return true;
      }
      if (p.deriv * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(p);
    }
    if (std::fabs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::fabs(lo.alpha))) break;
  }
  out = lo;  // best sufficient-decrease point seen
  return lo.alpha > 0.0 && lo.value < s.f0();
}

// Line search enforcing the strong Wolfe conditions (bracket + zoom).
bool line_search(Search& s, double alpha1, double c1, double c2, int budget, Probe& out) {
  Probe prev;
  prev.alpha = 0.0;
  prev.value = s.f0();
  prev.deriv = s.d0();
  double alpha = alpha1;
  const double alpha_max = 1e10;
  for (int i = 0; i < budget; ++i) {
    Probe p = s.eval(alpha);
    if (!std::isfinite(p.value)) {  // stepped too far; shrink into a bracket
      Probe lo = prev;
      Probe hi = std::move(p);
      hi.value = std::numeric_limits<double>::infinity();
      return zoom(s, std::move(lo), std::move(hi), c1, c2, budget, out);
    }
    if (p.value > s.f0() + c1 * alpha * s.d0() || (i > 0 && p.value >= prev.value))
      return zoom(s, std::move(prev), std::move(p), c1, c2, budget, out);
    if (std::fabs(p.deriv) <= -c2 * s.d0()) {
      out = std::move(p);
      return true;
    }
    if (p.deriv >= 0.0) return zoom(s, std::move(p), std::move(prev), c1, c2, budget, out);
    prev = std::move(p);
    alpha = std::min(2.0 * alpha, alpha_max);
  }
  if (prev.alpha > 0.0 && prev.value < s.f0()) {
    out = std::move(prev);
    return true;
  }
  return false;
}

}  // namespace

std::pair<Eigen::VectorXd, LbfgsReport> lbfgs_minimize(
    const LbfgsObjective& objective, Eigen::VectorXd x0,
    const LbfgsConfig& config, const LbfgsStopCallback& stop) {
  if (config.memory < 1 || config.max_iters < 1)
    throw std::invalid_argument("lbfgs_minimize: memory and max_iters must be >= 1");
  if (!(config.c1 > 0.0 && config.c1 < config.c2 && config.c2 < 1.0))
    throw std::invalid_argument("lbfgs_minimize: need 0 < c1 < c2 < 1");

  LbfgsReport report;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(x.size());
  double fx = objective(x, g);
  if (!std::isfinite(fx) || !g.allFinite())
    throw std::runtime_error("lbfgs_minimize: non-finite objective or gradient at start");

  if (stop && stop(x, fx)) {
    report.reason = LbfgsStop::Callback;
    report.final_value = fx;
    report.final_grad_norm = g.norm();
    return {std::move(x), report};
  }

  std::deque<Pair> pairs;
  Eigen::VectorXd d(x.size()), q(x.size());

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    // Two-loop recursion with H0 = (s.y / y.y) I from the newest pair.
    q = -g;
    std::vector<double> coef(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
      coef[i] = pairs[i].rho * pairs[i].s.dot(q);
      q -= coef[i] * pairs[i].y;
    }
    if (!pairs.empty()) {
      const Pair& newest = pairs.back();
      q *= newest.s.dot(newest.y) / newest.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = pairs[i].rho * pairs[i].y.dot(q);
      q += (coef[i] - beta) * pairs[i].s;
    }
    d = q;

    double dg = d.dot(g);
    if (!(dg < 0.0)) {  // not a descent direction: restart from steepest descent
      pairs.clear();
      d = -g;
      dg = d.dot(g);
      if (!(dg < 0.0)) {  // zero gradient
        report.reason = LbfgsStop::GradTol;
        break;
      }
    }

    Search search(objective, x, d, fx, dg);
    const double alpha1 = pairs.empty() ? std::min(1.0, 1.0 / std::max(1e-30, g.norm())) : 1.0;
    Probe accepted;
    bool ok = line_search(search, alpha1, config.c1, config.c2,
                          config.max_line_search, accepted);
    if (!ok) {
      // Fall back to a plain backtracking gradient step before giving up.
      pairs.clear();
      const Eigen::VectorXd steepest = -g;
      Search fallback(objective, x, steepest, fx, -g.squaredNorm());
      double a = 1.0 / std::max(1.0, g.norm());
      bool found = false;
      for (int i = 0; i < config.max_line_search; ++i, a *= 0.5) {
        Probe p = fallback.eval(a);
        if (std::isfinite(p.value) && p.value < fx) {
          accepted = std::move(p);
          found = true;
          break;
        }
      }
      if (!found) {
        report.reason = LbfgsStop::LineSearchFail;
        break;
      }
    }

    Eigen::VectorXd s = accepted.x - x;
    Eigen::VectorXd yv = accepted.grad - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      pairs.push_back({std::move(s), std::move(yv), 1.0 / sy});
      if (static_cast<int>(pairs.size()) > config.memory) pairs.pop_front();
    }

    x = std::move(accepted.x);
    g = std::move(accepted.grad);
    fx = accepted.value;
    report.iterations = iter;

    if (stop && stop(x, fx)) {
      report.reason = LbfgsStop::Callback;
      break;
    }
    if (g.norm() <= config.grad_tol * std::max(1.0, x.norm())) {
      report.reason = LbfgsStop::GradTol;
      break;
    }
    if (iter == config.max_iters) report.reason = LbfgsStop::MaxIters;
  }

  report.final_value = fx;
  report.final_grad_norm = g.norm();
  return {std::move(x), report};
}

}  // namespace ipmm
