#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ipmm/prox.hpp"
#include "oracles.hpp"

using ipmm::BoxSet;
using ipmm::Grid;
using ipmm::StackedField;
using ipmm::TvKind;

TEST_CASE("box projection") {
  CHECK_THROWS_AS(BoxSet(1.0, 0.0), std::invalid_argument);

  const BoxSet box(0.0, 1.0);
  const Grid inside = oracle::rand_grid01(3, 4, 4);
  CHECK((box.project(inside) - inside).abs().maxCoeff() == 0.0);
  CHECK(box.project(Grid::Constant(1, 1, 1.5))(0, 0) == 1.0);
  CHECK(box.project(Grid::Constant(1, 1, -0.2))(0, 0) == 0.0);

  // The clamp is at least as close as any point of a dense sample of the box.
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Grid x = oracle::rand_grid(50 + s, 2, 2) * 2.0;
    const Grid p = box.project(x);
    CHECK(box.contains(p));
    const double dp = (x - p).matrix().squaredNorm();
    const int N = 40;
    for (int a = 0; a <= N; ++a)
      for (int b = 0; b <= N; ++b)
        for (int c = 0; c <= N; ++c)
          for (int d = 0; d <= N; ++d) {
            Grid g(2, 2);
            g << a, b, c, d;
            g /= N;
            if ((x - g).matrix().squaredNorm() < dp - 1e-12) FAIL("grid beats clamp");
          }
    CHECK(box.squared_distance(x) == doctest::Approx(dp).epsilon(1e-14));
  }

  // Per-entry bounds.
  Grid lo = Grid::Zero(2, 2), hi = Grid::Ones(2, 2);
  hi(0, 0) = 0.25;
  const BoxSet varied(lo, hi);
  CHECK(varied.project(Grid::Ones(2, 2))(0, 0) == 0.25);
  CHECK_THROWS_AS(BoxSet(Grid::Ones(2, 2), Grid::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("weighted l1 prox against a 1-D grid oracle") {
  CHECK_THROWS_AS(ipmm::prox_weighted_l1(Grid::Ones(1, 1), Grid::Constant(1, 1, -1.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ipmm::prox_weighted_l1(Grid::Ones(1, 1), Grid::Ones(1, 1), 0.0),
                  std::invalid_argument);

  auto r = ipmm::prox_weighted_l1(Grid::Constant(1, 1, 3.0), Grid::Ones(1, 1), 1.0);
  CHECK(r.point(0, 0) == 3.0 - 1.0);

  // Zero weight passes entries through unchanged.
  Grid v(1, 2), w(1, 2);
  v << -0.7, 0.9;
  w << 0.0, 2.0;
  auto rz = ipmm::prox_weighted_l1(v, w, 0.5);
  CHECK(rz.point(0, 0) == -0.7);
  CHECK(rz.point(0, 1) == 0.0);

  // Scalar instance vs exhaustive search over z of w|z| + (z-v)^2/(2t).
  const double vv = 1.2, ww = 0.7, tt = 0.5;
  const double zstar = oracle::grid_argmin_1d(
      [&](double z) { return ww * std::abs(z) + (z - vv) * (z - vv) / (2.0 * tt); }, -3.0,
      3.0);
  auto rs = ipmm::prox_weighted_l1(Grid::Constant(1, 1, vv), Grid::Constant(1, 1, ww), tt);
  CHECK(std::abs(rs.point(0, 0) - zstar) <= 1e-4);

  // Envelope identity recomputed from the returned point.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Grid rv = oracle::rand_grid(60 + s, 3, 3) * 2.0;
    const Grid rw = oracle::rand_grid01(70 + s, 3, 3);
    const double t = 0.1 + 0.2 * static_cast<double>(s);
    auto rr = ipmm::prox_weighted_l1(rv, rw, t);
    const double expect =
        (rw * rr.point.abs()).sum() + (rr.point - rv).matrix().squaredNorm() / (2.0 * t);
    CHECK(rr.envelope == doctest::Approx(expect).epsilon(1e-12));
    // The envelope never exceeds the raw function value.
    CHECK(rr.envelope <= (rw * rv.abs()).sum() + 1e-12);
  }
}

TEST_CASE("isotropic pair prox against a 2-D grid oracle") {
  auto tie = ipmm::prox_iso_pair(3.0, 4.0, 5.0);
  CHECK(tie.a == 0.0);  // norm exactly at the threshold collapses to zero
  CHECK(tie.b == 0.0);

  auto p = ipmm::prox_iso_pair(3.0, 4.0, 1.0);
  CHECK(p.a == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(p.b == doctest::Approx(3.2).epsilon(1e-15));

  const double a = 0.3, b = -0.4, t = 0.2;
  auto [za, zb] = oracle::grid_argmin_2d([&](double x, double y) {
    return std::hypot(x, y) +
           ((x - a) * (x - a) + (y - b) * (y - b)) / (2.0 * t);
  }, -1.0, 1.0);
  auto g = ipmm::prox_iso_pair(a, b, t);
  CHECK(std::abs(g.a - za) <= 1e-4);
  CHECK(std::abs(g.b - zb) <= 1e-4);

  // Envelope identity.
  const double expect = std::hypot(g.a, g.b) +
                        ((g.a - a) * (g.a - a) + (g.b - b) * (g.b - b)) / (2.0 * t);
  CHECK(g.envelope == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("column l21 prox") {
  Eigen::MatrixXd M(2, 1);
  M << 3.0, 4.0;
  auto r = ipmm::prox_l21_columns(M, 1.0);
  CHECK(r.point(0, 0) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(r.point(1, 0) == doctest::Approx(3.2).epsilon(1e-15));

  CHECK(ipmm::prox_l21_columns(M, 6.0).point.norm() == 0.0);

  // Each column against a radial grid search (the objective is radial along
  // the column direction, so a 1-D search in the radius is exhaustive).
  const Eigen::MatrixXd R = oracle::rand_matrix(5, 4, 3, -1.0, 1.0);
  const double t = 0.5;
  auto rr = ipmm::prox_l21_columns(R, t);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double nrm = R.col(j).norm();
    const double rho = oracle::grid_argmin_1d(
        [&](double s) { return s + (s - nrm) * (s - nrm) / (2.0 * t); }, 0.0,
        nrm + 1.0);
    const Eigen::VectorXd want = nrm > 0 ? (rho / nrm * R.col(j)).eval()
                                         : Eigen::VectorXd::Zero(4).eval();
    CHECK((rr.point.col(j) - want).norm() <= 1e-4);
  }
  double expect = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) expect += rr.point.col(j).norm();
  expect += (rr.point - R).squaredNorm() / (2.0 * t);
  CHECK(rr.envelope == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stacked prox combines the blockwise pieces") {
  const Eigen::Index m = 4, n = 4;
  const Grid omega = oracle::rand_grid01(8, m, n) * 2.0;

  auto zres = ipmm::prox_stacked_f(StackedField::zeros(m, n), omega, TvKind::Isotropic, 0.3);
  CHECK(zres.point.squaredNorm() == 0.0);
  CHECK(zres.envelope == 0.0);

  StackedField z{oracle::rand_grid(90, m, n), oracle::rand_grid(91, m, n),
                 oracle::rand_grid(92, m, n)};
  const double t = 0.25;

  // Anisotropic: three independent soft-threshold blocks.
  auto aniso = ipmm::prox_stacked_f(z, omega, TvKind::Anisotropic, t);
  auto fy = ipmm::prox_weighted_l1(z.y, omega, t);
  auto fh = ipmm::prox_weighted_l1(z.wh, Grid::Ones(m, n), t);
  auto fv = ipmm::prox_weighted_l1(z.wv, Grid::Ones(m, n), t);
  CHECK((aniso.point.y - fy.point).abs().maxCoeff() == 0.0);
  CHECK((aniso.point.wh - fh.point).abs().maxCoeff() <= 1e-15);
  CHECK((aniso.point.wv - fv.point).abs().maxCoeff() <= 1e-15);
  CHECK(aniso.envelope ==
        doctest::Approx(fy.envelope + fh.envelope + fv.envelope).epsilon(1e-12));

  // Isotropic: difference blocks match the scalar pair prox pixel by pixel.
  auto iso = ipmm::prox_stacked_f(z, omega, TvKind::Isotropic, t);
  double env = fy.envelope;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      auto pp = ipmm::prox_iso_pair(z.wh(i, j), z.wv(i, j), t);
      CHECK(std::abs(iso.point.wh(i, j) - pp.a) <= 1e-14);
      CHECK(std::abs(iso.point.wv(i, j) - pp.b) <= 1e-14);
      env += pp.envelope;
    }
  CHECK(iso.envelope == doctest::Approx(env).epsilon(1e-12));

  // Envelope against a blockwise grid oracle: fidelity entries by 1-D search,
  // difference pairs by 2-D search, summed.
  double oracle_env = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double vy = z.y(i, j), wij = omega(i, j);
      const double zy = oracle::grid_argmin_1d(
          [&](double u) { return wij * std::abs(u) + (u - vy) * (u - vy) / (2.0 * t); },
          -2.5, 2.5);
      oracle_env += wij * std::abs(zy) + (zy - vy) * (zy - vy) / (2.0 * t);
      const double ah = z.wh(i, j), av = z.wv(i, j);
      auto [uh, uv] = oracle::grid_argmin_2d([&](double x, double y) {
        return std::hypot(x, y) +
               ((x - ah) * (x - ah) + (y - av) * (y - av)) / (2.0 * t);
      }, -1.5, 1.5);
      oracle_env += std::hypot(uh, uv) +
                    ((uh - ah) * (uh - ah) + (uv - av) * (uv - av)) / (2.0 * t);
    }
  CHECK(std::abs(iso.envelope - oracle_env) <= 1e-3);

  CHECK(ipmm::stacked_f_value(z, omega, TvKind::Isotropic) ==
        doctest::Approx((omega * z.y.abs()).sum() +
                        (z.wh * z.wh + z.wv * z.wv).sqrt().sum())
            .epsilon(1e-13));
}

TEST_CASE("prox maps are firmly nonexpansive and shrink with t") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Grid v1 = oracle::rand_grid(1000 + s, 3, 3) * 2.0;
    const Grid v2 = oracle::rand_grid(2000 + s, 3, 3) * 2.0;
    const Grid w = oracle::rand_grid01(3000 + s, 3, 3);
    const double t = 0.05 + 0.01 * static_cast<double>(s);
    const auto p1 = ipmm::prox_weighted_l1(v1, w, t);
    const auto p2 = ipmm::prox_weighted_l1(v2, w, t);
    CHECK((p1.point - p2.point).matrix().norm() <= (v1 - v2).matrix().norm() + 1e-12);

    const auto q1 = ipmm::prox_iso_pair(v1(0, 0), v1(1, 1), t);
    const auto q2 = ipmm::prox_iso_pair(v2(0, 0), v2(1, 1), t);
    CHECK(std::hypot(q1.a - q2.a, q1.b - q2.b) <=
          std::hypot(v1(0, 0) - v2(0, 0), v1(1, 1) - v2(1, 1)) + 1e-12);
  }

  // Larger t never grows the shrinkage output.
  const Grid v = oracle::rand_grid(77, 3, 3);
  const Grid w = oracle::rand_grid01(78, 3, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double nrm = ipmm::prox_weighted_l1(v, w, t).point.matrix().norm();
    CHECK(nrm <= prev + 1e-12);
    prev = nrm;
  }
}
