#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sarnet/graph.hpp"
#include "sarnet/qmle.hpp"
#include "sarnet/sampler.hpp"

namespace sarnet {

struct DegenerateCurvatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ingredients of the plug-in standard error around
// M_S = W11 (I - rho_hat W11)^{-1}: its trace statistics plus
// residual-based moment estimates mu4_hat and sigma2_hat.
struct SeIngredients {
  Eigen::MatrixXd m_s;
  double tr_m = 0;      // tr(M)
  double tr_m2 = 0;     // tr(M^2)
  double tr_mtm = 0;    // tr(M'M)
  double tr_diag2 = 0;  // tr(diag^2(M))
  double mu4_hat = 0;
  double sigma2_hat = 0;
};

SeIngredients se_ingredients(double rho_hat, double sigma2_hat,
                             const Eigen::VectorXd& y1, const Eigen::MatrixXd& w11);

// LEMMA2 assembles the score variance from the centered matrix
// M - tr(M) I / n, which is dimensionally consistent in (mu4, sigma4);
// THM1_LITERAL evaluates the printed theorem expression verbatim (it
// mixes mu4/sigma2 scales and can go negative; kept for fidelity
// experiments).
enum class SeVariant { Lemma2, Thm1Literal };

SeVariant se_variant_from_string(const std::string& name);
std::string to_string(SeVariant v);

double plugin_se(const SeIngredients& ing, int n, SeVariant variant = SeVariant::Lemma2);

struct IntervalResult {
  double se = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double level = 0.95;
};

IntervalResult confidence_interval(double rho_hat, double se, double level = 0.95);

// Standard normal quantile (Acklam's rational approximation polished by
// one Halley step); |error| < 1e-14 on (0,1).
double normal_quantile(double p);

struct BootstrapResult {
  double se_bt = 0;
  int n_success = 0;
  int n_dropped = 0;
  std::vector<double> estimates;
};

// Re-samples the same observed network and the same response B times,
// refits each subnetwork, and reports the divisor-B standard deviation
// of the estimates. Failed replicate fits are dropped (recorded in
// n_dropped); fewer than two successes is an error.
BootstrapResult bootstrap_se(const AdjacencyMatrix& a, const WeightMatrix& w,
                             std::span<const double> y, const SamplerSpec& spec, int B,
                             std::uint64_t seed);

}  // namespace sarnet
