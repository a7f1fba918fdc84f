#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace sarnet {

struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  double newton_tol = 1e-8;        // |step| convergence
  double score_tol_scale = 1e-10;  // |score| <= scale * n convergence
  int max_iterations = 100;
  double newton_box = 0.99;  // Newton iterates clamped to [-box, box]
  double fallback_lo = -0.999;
  double fallback_hi = 0.999;
  double fallback_tol = 1e-10;  // golden-section bracket width
  int max_halvings = 20;
  int eigen_threshold = 4096;  // above this order, use LU per evaluation
};

// Profiled likelihood state for one (W11, Y1) pair. The complex
// spectrum of W11 is computed once, making every rho-evaluation O(n);
// above eigen_threshold the evaluations fall back on an LU
// factorization per rho instead.
class LikelihoodWorkspace {
 public:
  LikelihoodWorkspace(Eigen::MatrixXd w11, Eigen::VectorXd y1, bool use_eigen = true);

  int size() const { return n_; }
  bool eigen_mode() const { return use_eigen_; }

  // n^{-1} || (I - rho W11) Y1 ||^2. Throws DegenerateDataError when
  // the result is not strictly positive (Y1 in the kernel).
  double profile_sigma2(double rho) const;
  // ln |I - rho W11| as sum_i ln|1 - rho lambda_i| (real part; the
  // imaginary parts cancel in conjugate pairs).
  double log_det(double rho) const;
  double loglik(double rho) const;
  double score(double rho) const;
  double hessian(double rho) const;

  const Eigen::MatrixXd& w11() const { return w11_; }
  const Eigen::VectorXd& y1() const { return y1_; }
  const Eigen::VectorXcd& eigenvalues() const { return eigvals_; }

 private:
  struct TraceEval {  // per-rho log-det and trace terms
    double rho = std::numeric_limits<double>::quiet_NaN();
    double logdet = 0, tr_m = 0, tr_m2 = 0;
  };
  const TraceEval& traces(double rho) const;

  int n_ = 0;
  bool use_eigen_ = true;
  Eigen::MatrixXd w11_;
  Eigen::VectorXd y1_;
  Eigen::VectorXcd eigvals_;
  Eigen::VectorXd wy_;  // W11 Y1
  double y1y1_ = 0, wy_y1_ = 0, wywy_ = 0;
  mutable TraceEval cache_;
};

struct FitResult {
  double rho_hat = 0;
  double sigma2_hat = 0;
  double loglik = 0;
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;
};

// Newton-Raphson from rho = 0 with monotone-ascent step halving,
// falling back to golden-section maximization of the profiled
// log-likelihood when the curvature is unusable.
FitResult fit(const LikelihoodWorkspace& ws, const FitOptions& opts = {});
FitResult fit(const Eigen::VectorXd& y1, const Eigen::MatrixXd& w11,
              const FitOptions& opts = {});

}  // namespace sarnet
