#include <cmath>

#include "doctest.h"
#include "sarnet/dgp.hpp"
#include "sarnet/inference.hpp"
#include "sarnet/netgen.hpp"
#include "sarnet/selection.hpp"
#include "test_util.hpp"

using namespace sarnet;

TEST_CASE("se_ingredients at rho = 0") {
  const auto inst = test_util::make_instance(30, 0.0, 1);
  const auto ing = se_ingredients(0.0, inst.y.squaredNorm() / 30, inst.y, inst.w_dense);
  CHECK((ing.m_s - inst.w_dense).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(ing.tr_m == 0.0);  // diagonal-free W
}

TEST_CASE("se_ingredients traces match brute force") {
  for (int rep = 0; rep < 4; ++rep) {
    const int n = 40 + 20 * rep;
    const auto inst = test_util::make_instance(n, 0.3, 10 + rep);
    const double rho = 0.25;
    const auto ing = se_ingredients(rho, 1.0, inst.y, inst.w_dense);
    const Eigen::MatrixXd m =
        inst.w_dense *
        (Eigen::MatrixXd::Identity(n, n) - rho * inst.w_dense).inverse();
    double tr_m = 0, tr_m2 = 0, tr_mtm = 0, tr_diag2 = 0;
    for (int i = 0; i < n; ++i) {
      tr_m += m(i, i);
      tr_diag2 += m(i, i) * m(i, i);
      for (int j = 0; j < n; ++j) {
        tr_m2 += m(i, j) * m(j, i);
        tr_mtm += m(i, j) * m(i, j);
      }
    }
    CHECK(ing.tr_m == doctest::Approx(tr_m).epsilon(1e-10));
    CHECK(ing.tr_m2 == doctest::Approx(tr_m2).epsilon(1e-10));
    CHECK(ing.tr_mtm == doctest::Approx(tr_mtm).epsilon(1e-10));
    CHECK(ing.tr_diag2 == doctest::Approx(tr_diag2).epsilon(1e-10));
  }
}

TEST_CASE("residual kurtosis recovers the normal value") {
  const int n = 1000;
  const double rho = 0.2;
  const auto w = row_normalize(test_util::make_connected_graph(n, 0.004, 77));
  const auto dense = test_util::dense_of(w);
  auto rng = make_rng(31);
  const auto e = draw_errors(ErrorDist::Norm, n, rng);
  const Eigen::Map<const Eigen::VectorXd> ev(e.data(), n);
  const Eigen::VectorXd y =
      (Eigen::MatrixXd::Identity(n, n) - rho * dense).partialPivLu().solve(ev);
  const double s2 = ((Eigen::MatrixXd::Identity(n, n) - rho * dense) * y).squaredNorm() / n;
  const auto ing = se_ingredients(rho, s2, y, dense);
  CHECK(std::abs(ing.mu4_hat / (s2 * s2) - 3.0) <= 0.3);
}

TEST_CASE("plugin_se kurtosis cancellation for symmetric M with normal errors") {
  // with mu4 = 3 sigma4 the Lemma-2 variance loses its diagonal term and,
  // for symmetric M, sigma1^2 = 2 { tr(M'M)/n - tr^2(M)/n^2 }
  const int n = 12;
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
  m = ((m + m.transpose()) / 2).eval();
  SeIngredients ing;
  ing.m_s = m;
  ing.tr_m = m.trace();
  ing.tr_m2 = m.cwiseProduct(m.transpose()).sum();
  ing.tr_mtm = m.squaredNorm();
  ing.tr_diag2 = m.diagonal().squaredNorm();
  ing.sigma2_hat = 1.7;
  ing.mu4_hat = 3.0 * 1.7 * 1.7;
  const double s1 = 2.0 * (ing.tr_mtm / n - ing.tr_m * ing.tr_m / (n * n));
  const double s2 = std::abs(2.0 * ing.tr_m * ing.tr_m / (n * n) - 2.0 * ing.tr_mtm / n);
  CHECK(plugin_se(ing, n) == doctest::Approx(std::sqrt(s1) / (s2 * std::sqrt(n))));
}

TEST_CASE("lemma2 variance matches a Monte Carlo oracle") {
  // sigma1S^2 should equal var( E' (M - tr M/n I) E ) / (n sigma^4)
  const int n = 30;
  const auto inst = test_util::make_instance(n, 0.4, 21);
  const double rho = 0.4;
  const Eigen::MatrixXd m =
      inst.w_dense * (Eigen::MatrixXd::Identity(n, n) - rho * inst.w_dense).inverse();
  const Eigen::MatrixXd mm =
      m - Eigen::MatrixXd::Identity(n, n) * (m.trace() / n);
  SeIngredients ing;
  ing.m_s = m;
  ing.tr_m = m.trace();
  ing.tr_m2 = m.cwiseProduct(m.transpose()).sum();
  ing.tr_mtm = m.squaredNorm();
  ing.tr_diag2 = m.diagonal().squaredNorm();
  ing.sigma2_hat = 1.0;
  ing.mu4_hat = 9.0;  // exp errors
  const double kurt = 9.0 - 3.0;
  const double dc = ing.tr_diag2 - ing.tr_m * ing.tr_m / n;
  const double sigma1_sq = kurt * dc / n + ing.tr_m2 / n + ing.tr_mtm / n -
                           2.0 * ing.tr_m * ing.tr_m / (n * n);

  auto rng = make_rng(1234);
  const int reps = 200000;
  double sum = 0, sumsq = 0;
  for (int r = 0; r < reps; ++r) {
    const auto e = draw_errors(ErrorDist::Exp, n, rng);
    const Eigen::Map<const Eigen::VectorXd> ev(e.data(), n);
    const double q = ev.dot(mm * ev);
    sum += q;
    sumsq += q * q;
  }
  const double var_mc = (sumsq - sum * sum / reps) / reps;
  // Monte Carlo SE of a variance estimate, roughly var * sqrt(2 + kurt_Q / reps)
  CHECK(std::abs(var_mc / n - sigma1_sq) <= 0.05 * sigma1_sq);
}

TEST_CASE("plugin_se invariance under response rescaling") {
  const auto inst = test_util::make_instance(50, 0.2, 33);
  const auto f = fit(inst.y, inst.w_dense);
  const auto ing = se_ingredients(f.rho_hat, f.sigma2_hat, inst.y, inst.w_dense);
  const double se = plugin_se(ing, 50);
  const Eigen::VectorXd yc = 7.5 * inst.y;
  const auto fc = fit(yc, inst.w_dense);
  const auto ingc = se_ingredients(fc.rho_hat, fc.sigma2_hat, yc, inst.w_dense);
  CHECK(plugin_se(ingc, 50) == doctest::Approx(se).epsilon(1e-7));
}

TEST_CASE("thm1 literal variant evaluates the printed expression") {
  SeIngredients ing;
  const int n = 10;
  ing.m_s = Eigen::MatrixXd::Zero(n, n);
  ing.tr_m = 2.0;
  ing.tr_m2 = 1.5;
  ing.tr_mtm = 3.0;
  ing.tr_diag2 = 0.9;
  ing.sigma2_hat = 1.0;
  ing.mu4_hat = 9.0;
  const double r = 9.0;
  const double s1 = (1 - r) * 4.0 / 100 + 3.0 / 10 + 1.5 / 10 + (r - 3) * 0.9;
  const double s2 = std::abs(2 * 4.0 / 100 - 3.0 / 10 - 1.5 / 10);
  CHECK(plugin_se(ing, n, SeVariant::Thm1Literal) ==
        doctest::Approx(std::sqrt(s1) / (s2 * std::sqrt(n))));
}

TEST_CASE("lemma 1 trace inequalities on random M_S") {
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 20 + rep % 30;
    const auto inst = test_util::make_instance(n, 0.3, 500 + rep, 0.1);
    const double rho = -0.8 + 1.6 * (rep % 17) / 16.0;
    const auto ing = se_ingredients(rho, 1.0, inst.y, inst.w_dense);
    // Lemma 1(a): tr diag^2(M) <= tr(M'M)
    CHECK(ing.tr_diag2 <= ing.tr_mtm + 1e-12);
    // Lemma 1(c): tr(M^2) <= tr(M'M)
    CHECK(ing.tr_m2 <= ing.tr_mtm + 1e-12);
    // Lemma 1(b) for the symmetrized matrix (real spectrum):
    // tr^2(S) <= n tr(S^2)
    const Eigen::MatrixXd s = (ing.m_s + ing.m_s.transpose()) / 2;
    const double tr_s = s.trace();
    CHECK(tr_s * tr_s <= n * s.cwiseProduct(s).sum() + 1e-10);
  }
}

TEST_CASE("confidence_interval") {
  const auto deg = confidence_interval(0.3, 0.0);
  CHECK(deg.ci_lo == 0.3);
  CHECK(deg.ci_hi == 0.3);

  const auto ci = confidence_interval(0.2, 0.1);
  CHECK(ci.ci_lo == doctest::Approx(0.00400).epsilon(1e-4));
  CHECK(ci.ci_hi == doctest::Approx(0.39600).epsilon(1e-4));

  const auto half = confidence_interval(0.0, 1.0, 0.5);
  CHECK(half.ci_hi == doctest::Approx(0.6744897501960817).epsilon(1e-8));

  CHECK_THROWS_AS(static_cast<void>(confidence_interval(0.0, -1.0)),
                  std::invalid_argument);
}

TEST_CASE("normal_quantile accuracy") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-12));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
}

TEST_CASE("bootstrap with a single all-covering cluster is exactly degenerate") {
  const int n = 40;
  const auto a = test_util::make_connected_graph(n, 0.1, 3);
  const auto w = row_normalize(a);
  auto rng = make_rng(9);
  const auto e = draw_errors(ErrorDist::Norm, n, rng);
  DgpConfig dc;
  dc.rho = 0.3;
  const auto y = gen_response(w, dc, e);
  const std::vector<int> labels(n, 1);
  SamplerSpec sp;
  sp.method = SamplerMethod::CS;
  sp.target_n = n;  // the only cluster covers everything
  sp.cluster_labels = labels;
  const auto bt = bootstrap_se(a, w, y.y, sp, 10, 5);
  CHECK(bt.n_success == 10);
  CHECK(bt.se_bt == 0.0);
}

TEST_CASE("bootstrap stabilizes in B") {
  const int n = 2000;
  const auto net = gen_sbm({n, 100, 17});
  const auto w = row_normalize(net.adjacency);
  auto rng = make_rng(18);
  const auto e = draw_errors(ErrorDist::Exp, n, rng);
  DgpConfig dc;
  dc.rho = 0.2;
  dc.error_dist = ErrorDist::Exp;
  const auto y = gen_response(w, dc, e);
  SamplerSpec sp;
  sp.method = SamplerMethod::SNOW;
  sp.target_n = 50;
  sp.n_seeds = 5;
  const auto b500 = bootstrap_se(net.adjacency, w, y.y, sp, 500, 100);
  const auto b1000 = bootstrap_se(net.adjacency, w, y.y, sp, 1000, 200);
  CHECK(std::abs(b500.se_bt - b1000.se_bt) <= 0.05 * std::max(b500.se_bt, b1000.se_bt));
}

TEST_CASE("bootstrap validation") {
  const auto a = test_util::make_er_graph(10, 0.2, 1);
  const auto w = row_normalize(a);
  const std::vector<double> y(10, 1.0);
  SamplerSpec sp;
  sp.method = SamplerMethod::SRS;
  sp.target_n = 5;
  CHECK_THROWS_AS(static_cast<void>(bootstrap_se(a, w, y, sp, 1, 0)),
                  std::invalid_argument);
}
