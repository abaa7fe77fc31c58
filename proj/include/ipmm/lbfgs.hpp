#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

namespace ipmm {

struct LbfgsConfig {
  int memory = 10;
  int max_iters = 50;
  double c1 = 1e-4;          // sufficient-decrease constant
  double c2 = 0.9;           // curvature constant
  int max_line_search = 25;  // trial evaluations per search
  double grad_tol = 1e-12;   // fallback stop on ||grad|| / max(1, ||x||)
};

enum class LbfgsStop { Callback, MaxIters, GradTol, LineSearchFail };

struct LbfgsReport {
  int iterations = 0;
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  LbfgsStop reason = LbfgsStop::MaxIters;
};

// Objective oracle: fills the gradient and returns the value.
using LbfgsObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
// Early-stop probe, invoked on the start point and after every accepted step
// with the current point and its objective value; returning true stops the
// minimization and returns that point immediately.
using LbfgsStopCallback = std::function<bool(const Eigen::VectorXd&, double)>;

std::pair<Eigen::VectorXd, LbfgsReport> lbfgs_minimize(
    const LbfgsObjective& objective, Eigen::VectorXd x0,
    const LbfgsConfig& config = {}, const LbfgsStopCallback& stop = nullptr);

}  // namespace ipmm
