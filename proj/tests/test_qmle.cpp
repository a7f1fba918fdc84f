#include <cmath>

#include "doctest.h"
#include "sarnet/qmle.hpp"
#include "test_util.hpp"

using namespace sarnet;

namespace {

LikelihoodWorkspace make_ws(int n, double rho, std::uint64_t seed,
                            bool use_eigen = true) {
  const auto inst = test_util::make_instance(n, rho, seed);
  return LikelihoodWorkspace(inst.w_dense, inst.y, use_eigen);
}

double grid_argmax(const LikelihoodWorkspace& ws, double lo = -0.999,
                   double hi = 0.999, double step = 1e-4) {
  double best_rho = lo, best = -std::numeric_limits<double>::infinity();
  for (double r = lo; r <= hi; r += step) {
    const double v = ws.loglik(r);
    if (v > best) {
      best = v;
      best_rho = r;
    }
  }
  return best_rho;
}

}  // namespace

TEST_CASE("profile_sigma2 basics") {
  const auto ws = make_ws(20, 0.3, 1);
  CHECK(ws.profile_sigma2(0.0) ==
        doctest::Approx(ws.y1().squaredNorm() / 20.0).epsilon(1e-14));
  // dense oracle at an interior rho
  const double rho = 0.37;
  const Eigen::VectorXd r =
      (Eigen::MatrixXd::Identity(20, 20) - rho * ws.w11()) * ws.y1();
  CHECK(ws.profile_sigma2(rho) == doctest::Approx(r.squaredNorm() / 20.0).epsilon(1e-12));
}

TEST_CASE("profile_sigma2 degenerate data") {
  const auto inst = test_util::make_instance(10, 0.2, 2);
  LikelihoodWorkspace ws(inst.w_dense, Eigen::VectorXd::Zero(10));
  CHECK_THROWS_AS(static_cast<void>(ws.profile_sigma2(0.1)), DegenerateDataError);
  CHECK_THROWS_AS(static_cast<void>(fit(ws)), DegenerateDataError);
}

TEST_CASE("log_det at rho = 0 and on a 2-cycle") {
  const auto ws = make_ws(30, 0.2, 3);
  CHECK(ws.log_det(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  // permutation 2-cycle has eigenvalues +1 and -1
  Eigen::MatrixXd p2(2, 2);
  p2 << 0, 1, 1, 0;
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  LikelihoodWorkspace ws2(p2, y);
  CHECK(ws2.log_det(0.5) ==
        doctest::Approx(std::log(0.5) + std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("log_det matches LU oracle") {
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 60 + 25 * rep;
    const auto ws = make_ws(n, 0.3, 50 + rep);
    for (double rho : {-0.7, -0.2, 0.1, 0.45, 0.8}) {
      const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n) - rho * ws.w11();
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(t);
      double oracle = 0;
      for (int i = 0; i < n; ++i) oracle += std::log(std::abs(lu.matrixLU()(i, i)));
      CHECK(ws.log_det(rho) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("loglik closed form at rho = 0 and scaling shift") {
  const int n = 40;
  const auto inst = test_util::make_instance(n, 0.2, 4);
  LikelihoodWorkspace ws(inst.w_dense, inst.y);
  const double expect = -0.5 * n * (std::log(2 * M_PI) + 1.0) -
                        0.5 * n * std::log(inst.y.squaredNorm() / n);
  CHECK(ws.loglik(0.0) == doctest::Approx(expect).epsilon(1e-12));

  const double c = 3.7;
  LikelihoodWorkspace ws_scaled(inst.w_dense, c * inst.y);
  for (double rho : {-0.5, 0.0, 0.3, 0.6}) {
    CHECK(ws_scaled.loglik(rho) - ws.loglik(rho) ==
          doctest::Approx(-n * std::log(c)).epsilon(1e-10));
  }
}

TEST_CASE("score at rho = 0 for diagonal-free W") {
  const int n = 25;
  const auto inst = test_util::make_instance(n, 0.2, 5);
  LikelihoodWorkspace ws(inst.w_dense, inst.y);
  const double s2 = inst.y.squaredNorm() / n;
  const double expect = inst.y.dot(inst.w_dense.transpose() * inst.y) / s2;
  CHECK(inst.w_dense.trace() == 0.0);
  CHECK(ws.score(0.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("score and hessian match finite differences") {
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 50;
    const double rho_true = 0.15 * (rep % 4);
    const auto ws = make_ws(n, rho_true, 200 + rep);
    const double rho = -0.7 + 1.4 * ((rep * 37) % 97) / 96.0;
    {
      const double h = 1e-6;
      const double fd = (ws.loglik(rho + h) - ws.loglik(rho - h)) / (2 * h);
      const double s = ws.score(rho);
      CHECK(std::abs(s - fd) <= 1e-6 * std::max(1.0, std::abs(s)));
    }
    {
      const double h = 1e-5;
      const double fd = (ws.score(rho + h) - ws.score(rho - h)) / (2 * h);
      const double hess = ws.hessian(rho);
      CHECK(std::abs(hess - fd) <= 1e-5 * std::max(1.0, std::abs(hess)));
    }
  }
}

TEST_CASE("hessian dense evaluation at rho = 0 with unit response") {
  const int n = 15;
  const auto inst = test_util::make_instance(n, 0.0, 6);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
  e1[0] = 1.0;
  LikelihoodWorkspace ws(inst.w_dense, e1);
  const Eigen::MatrixXd& w = inst.w_dense;
  const double s2 = 1.0 / n;
  const double q = e1.dot(w.transpose() * e1);
  const double expect = 2 * q * q / (n * s2 * s2) - (w * e1).squaredNorm() / s2 -
                        (w * w).trace();
  CHECK(ws.hessian(0.0) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("fit agrees with the grid oracle") {
  int checked = 0;
  for (int rep = 0; rep < 12; ++rep) {
    const double rho_true = 0.2 * (rep % 4);
    const auto ws = make_ws(50, rho_true, 400 + rep);
    const auto f = fit(ws);
    REQUIRE(std::isfinite(f.rho_hat));
    const double g = grid_argmax(ws);
    CHECK(std::abs(f.rho_hat - g) <= 2e-4);
    if (f.converged) {
      CHECK(std::abs(ws.score(f.rho_hat)) <= 1e-8 * 50);
      CHECK(ws.hessian(f.rho_hat) < 0.0);
      ++checked;
    }
    CHECK(f.sigma2_hat == doctest::Approx(ws.profile_sigma2(f.rho_hat)));
    // the maximizer beats a coarse grid everywhere
    for (double r = -0.9; r <= 0.9; r += 0.1)
      CHECK(f.loglik >= ws.loglik(r) - 1e-9);
  }
  CHECK(checked >= 10);
}

TEST_CASE("fit scale equivariance") {
  const auto inst = test_util::make_instance(60, 0.4, 7);
  const auto f1 = fit(inst.y, inst.w_dense);
  for (double c : {0.01, 5.0, 300.0}) {
    const auto fc = fit(Eigen::VectorXd(c * inst.y), inst.w_dense);
    CHECK(std::abs(fc.rho_hat - f1.rho_hat) <= 1e-8);
    CHECK(fc.sigma2_hat == doctest::Approx(c * c * f1.sigma2_hat).epsilon(1e-8));
  }
}

TEST_CASE("eigen and LU evaluation paths agree") {
  const auto inst = test_util::make_instance(40, 0.3, 8);
  LikelihoodWorkspace eig(inst.w_dense, inst.y, /*use_eigen=*/true);
  LikelihoodWorkspace lu(inst.w_dense, inst.y, /*use_eigen=*/false);
  for (double rho : {-0.8, -0.3, 0.0, 0.25, 0.6, 0.9}) {
    CHECK(eig.loglik(rho) == doctest::Approx(lu.loglik(rho)).epsilon(1e-10));
    CHECK(eig.score(rho) == doctest::Approx(lu.score(rho)).epsilon(1e-9));
    CHECK(eig.hessian(rho) == doctest::Approx(lu.hessian(rho)).epsilon(1e-9));
  }
  const auto f_eig = fit(eig);
  const auto f_lu = fit(lu);
  CHECK(std::abs(f_eig.rho_hat - f_lu.rho_hat) <= 1e-8);
}

TEST_CASE("fit on an all-zero weight block stays honest") {
  // SRS-style pathological subnetwork: no internal edges at all
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(12, 12);
  const Eigen::VectorXd y = test_util::random_vector(12, 9);
  const auto f = fit(y, w);
  CHECK(!f.converged);  // flat likelihood has no usable curvature
  CHECK(std::isfinite(f.rho_hat));
}

TEST_CASE("fit input validation") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(static_cast<void>(fit(y, w)), std::invalid_argument);
  Eigen::MatrixXd bad(2, 3);
  CHECK_THROWS_AS(LikelihoodWorkspace(bad, Eigen::VectorXd::Ones(2)),
                  std::invalid_argument);
}
