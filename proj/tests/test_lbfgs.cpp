#include <doctest.h>

#include <cmath>
#include <vector>

#include "ipmm/lbfgs.hpp"
#include "oracles.hpp"

using Eigen::VectorXd;
using ipmm::LbfgsConfig;
using ipmm::LbfgsStop;

TEST_CASE("exact quadratic converges in a step or three") {
  const VectorXd a = oracle::rand_vec(1, 20);
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    g = x - a;
    return 0.5 * (x - a).squaredNorm();
  };
  auto [x, rep] = ipmm::lbfgs_minimize(objective, VectorXd::Zero(20));
  CHECK((x - a).norm() <= 1e-10);
  CHECK(rep.iterations <= 3);
}

TEST_CASE("separable huber reaches the coordinatewise minimizer") {
  const VectorXd c = oracle::rand_vec(2, 12) * 3.0;
  const double delta = 0.3;
  auto huber = [&](const VectorXd& x, VectorXd& g) {
    double v = 0.0;
    g.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = x[i] - c[i];
      if (std::abs(z) <= delta) {
        v += 0.5 * z * z;
        g[i] = z;
      } else {
        v += delta * (std::abs(z) - 0.5 * delta);
        g[i] = z > 0 ? delta : -delta;
      }
    }
    return v;
  };
  LbfgsConfig cfg;
  cfg.max_iters = 200;
  cfg.grad_tol = 1e-12;
  auto [x, rep] = ipmm::lbfgs_minimize(huber, VectorXd::Zero(12), cfg);
  CHECK((x - c).norm() <= 1e-8);
}

TEST_CASE("stop callback fires on the start point") {
  const VectorXd x0 = oracle::rand_vec(3, 5);
  auto objective = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  int calls = 0;
  auto [x, rep] = ipmm::lbfgs_minimize(objective, x0, {},
                                       [&](const VectorXd&, double) {
                                         ++calls;
                                         return true;
                                       });
  CHECK(rep.iterations == 0);
  CHECK(rep.reason == LbfgsStop::Callback);
  CHECK(calls == 1);
  CHECK((x - x0).norm() == 0.0);
}

TEST_CASE("values decrease monotonically across accepted steps") {
  const VectorXd c = oracle::rand_vec(4, 10);
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    // Smooth convex, nonquadratic: sum of log-cosh terms.
    double v = 0.0;
    g.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = x[i] - c[i];
      v += std::log(std::cosh(z));
      g[i] = std::tanh(z);
    }
    return v;
  };
  std::vector<double> seen;
  LbfgsConfig cfg;
  cfg.max_iters = 100;
  cfg.grad_tol = 1e-12;
  auto [x, rep] = ipmm::lbfgs_minimize(objective, VectorXd::Zero(10), cfg,
                                       [&](const VectorXd&, double v) {
                                         seen.push_back(v);
                                         return false;
                                       });
  REQUIRE(seen.size() >= 3);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] < seen[i - 1] + 1e-15);
  CHECK((x - c).norm() <= 1e-7);
}

TEST_CASE("a stationary start stops on the gradient tolerance") {
  auto objective = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  auto [x, rep] = ipmm::lbfgs_minimize(objective, VectorXd::Zero(6));
  CHECK(rep.reason == LbfgsStop::GradTol);
  CHECK(rep.iterations == 0);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("iteration cap and memory settings are honored") {
  // Ill-conditioned quadratic so that the cap binds.
  const Eigen::Index n = 30;
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = std::pow(10.0, 3.0 * i / (n - 1));
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    g = d.cwiseProduct(x);
    return 0.5 * x.dot(g);
  };
  LbfgsConfig cfg;
  cfg.max_iters = 5;
  auto [x, rep] = ipmm::lbfgs_minimize(objective, VectorXd::Ones(n), cfg);
  CHECK(rep.iterations == 5);
  CHECK(rep.reason == LbfgsStop::MaxIters);
}

TEST_CASE("identical inputs give identical iterates") {
  const VectorXd c = oracle::rand_vec(6, 15);
  auto objective = [&](const VectorXd& x, VectorXd& g) {
    double v = 0.0;
    g.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = x[i] - c[i];
      v += std::log(std::cosh(z)) + 0.1 * z * z;
      g[i] = std::tanh(z) + 0.2 * z;
    }
    return v;
  };
  auto [x1, r1] = ipmm::lbfgs_minimize(objective, VectorXd::Zero(15));
  auto [x2, r2] = ipmm::lbfgs_minimize(objective, VectorXd::Zero(15));
  CHECK((x1 - x2).norm() == 0.0);
  CHECK(r1.iterations == r2.iterations);
  CHECK(r1.final_value == r2.final_value);
}
