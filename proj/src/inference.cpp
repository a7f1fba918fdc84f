#include "sarnet/inference.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sarnet/rng.hpp"
#include "sarnet/selection.hpp"

namespace sarnet {

SeIngredients se_ingredients(double rho_hat, double sigma2_hat,
                             const Eigen::VectorXd& y1, const Eigen::MatrixXd& w11) {
  if (std::abs(rho_hat) >= 1.0)
    throw std::invalid_argument("se_ingredients: need |rho_hat| < 1");
  const int n = static_cast<int>(w11.rows());
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n) - rho_hat * w11;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(t);
  if (lu.rcond() < 1e-14)
    throw SingularityError("se_ingredients: I - rho W11 numerically singular");

  SeIngredients ing;
  ing.m_s = w11 * lu.inverse();  // M = W (I - rho W)^{-1}
  ing.tr_m = ing.m_s.trace();
  ing.tr_m2 = ing.m_s.cwiseProduct(ing.m_s.transpose()).sum();
  ing.tr_mtm = ing.m_s.squaredNorm();
  ing.tr_diag2 = ing.m_s.diagonal().squaredNorm();

  const Eigen::VectorXd resid = t * y1;
  ing.mu4_hat = resid.array().pow(4).mean();
  ing.sigma2_hat = sigma2_hat;
  return ing;
}

SeVariant se_variant_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "lemma2") return SeVariant::Lemma2;
  if (s == "thm1_literal" || s == "thm1" || s == "thm1-literal")
    return SeVariant::Thm1Literal;
  throw std::invalid_argument("unknown SE variant: " + name);
}

std::string to_string(SeVariant v) {
  return v == SeVariant::Lemma2 ? "lemma2" : "thm1_literal";
}

double plugin_se(const SeIngredients& ing, int n, SeVariant variant) {
  const double nd = n;
  double s1 = 0, s2 = 0;
  if (variant == SeVariant::Lemma2) {
    // var of E' (M - tr(M) I/n) E / (n sigma^4), via Lemma 2(b)
    const double kurt = ing.mu4_hat / (ing.sigma2_hat * ing.sigma2_hat) - 3.0;
    const double diag_centered = ing.tr_diag2 - ing.tr_m * ing.tr_m / nd;
    s1 = kurt * diag_centered / nd + ing.tr_m2 / nd + ing.tr_mtm / nd -
         2.0 * ing.tr_m * ing.tr_m / (nd * nd);
    s2 = std::abs(ing.tr_mtm / nd + ing.tr_m2 / nd -
                  2.0 * ing.tr_m * ing.tr_m / (nd * nd));
  } else {
    const double r = ing.mu4_hat / ing.sigma2_hat;
    s1 = (1.0 - r) * ing.tr_m * ing.tr_m / (nd * nd) + ing.tr_mtm / nd +
         ing.tr_m2 / nd + (r - 3.0) * ing.tr_diag2;
    s2 = std::abs(2.0 * ing.tr_m * ing.tr_m / (nd * nd) - ing.tr_mtm / nd -
                  ing.tr_m2 / nd);
  }
  if (!(s2 >= 1e-12))
    throw DegenerateCurvatureError("plugin_se: curvature term below 1e-12");
  if (s1 < 0.0) {
    if (variant == SeVariant::Thm1Literal)
      throw DegenerateCurvatureError("plugin_se: literal variance negative");
    s1 = 0.0;  // roundoff guard; the Lemma-2 form is nonnegative in exact arithmetic
  }
  return std::sqrt(s1) / (s2 * std::sqrt(nd));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // one Halley step against the exact CDF
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1 + x * u / 2);
  return x;
}

IntervalResult confidence_interval(double rho_hat, double se, double level) {
  if (se < 0.0) throw std::invalid_argument("confidence_interval: negative se");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence_interval: level must be in (0,1)");
  const double z = normal_quantile(0.5 + level / 2.0);
  return {se, rho_hat - z * se, rho_hat + z * se, level};
}

BootstrapResult bootstrap_se(const AdjacencyMatrix& a, const WeightMatrix& w,
                             std::span<const double> y, const SamplerSpec& spec, int B,
                             std::uint64_t seed) {
  if (B < 2) throw std::invalid_argument("bootstrap_se: need B >= 2");
  BootstrapResult out;
  out.estimates.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    SamplerSpec rep = spec;
    rep.seed = stream_key(seed, {static_cast<std::uint64_t>(b)});
    try {
      const SampleResult s1 = sample(a, rep);
      const SubnetSelection sel = extract_selection(w, s1.nodes);
      Eigen::VectorXd y1(static_cast<Eigen::Index>(sel.nodes.size()));
      for (std::size_t i = 0; i < sel.nodes.size(); ++i) y1[i] = y[sel.nodes[i]];
      const FitResult f = fit(y1, sel.w11);
      if (!std::isfinite(f.rho_hat)) throw FitError("non-finite estimate");
      out.estimates.push_back(f.rho_hat);
    } catch (const std::runtime_error&) {
      ++out.n_dropped;
    }
  }
  out.n_success = static_cast<int>(out.estimates.size());
  if (out.n_success < 2)
    throw std::runtime_error("bootstrap_se: fewer than 2 successful replicates");
  // Welford, so identical replicates give an exact zero
  double mean = 0, m2 = 0;
  int count = 0;
  for (double e : out.estimates) {
    ++count;
    const double d = e - mean;
    mean += d / count;
    m2 += d * (e - mean);
  }
  out.se_bt = std::sqrt(m2 / out.n_success);  // divisor B, as printed
  return out;
}

}  // namespace sarnet
