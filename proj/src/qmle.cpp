#include "sarnet/qmle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace sarnet {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

LikelihoodWorkspace::LikelihoodWorkspace(Eigen::MatrixXd w11, Eigen::VectorXd y1,
                                         bool use_eigen)
    : n_(static_cast<int>(w11.rows())),
      use_eigen_(use_eigen),
      w11_(std::move(w11)),
      y1_(std::move(y1)) {
  if (w11_.rows() != w11_.cols())
    throw std::invalid_argument("LikelihoodWorkspace: W11 must be square");
  if (y1_.size() != n_)
    throw std::invalid_argument("LikelihoodWorkspace: Y1 length mismatch");
  wy_ = w11_ * y1_;
  y1y1_ = y1_.squaredNorm();
  wy_y1_ = wy_.dot(y1_);
  wywy_ = wy_.squaredNorm();
  if (use_eigen_) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(w11_, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
      throw FitError("LikelihoodWorkspace: eigenvalue computation failed");
    eigvals_ = es.eigenvalues();
    const double tr = w11_.trace();
    if (std::abs(eigvals_.sum().real() - tr) > 1e-8 * std::max(1, n_))
      throw FitError("LikelihoodWorkspace: eigenvalue trace inconsistency");
  }
}

const LikelihoodWorkspace::TraceEval& LikelihoodWorkspace::traces(double rho) const {
  if (cache_.rho == rho) return cache_;
  TraceEval ev;
  ev.rho = rho;
  if (use_eigen_) {
    double logdet = 0, tr_m = 0, tr_m2 = 0;
    for (int i = 0; i < n_; ++i) {
      const std::complex<double> d = 1.0 - rho * eigvals_[i];
      if (std::abs(d) < 1e-14)
        throw SingularityError("log_det: eigenvalue singularity at rho=" +
                               std::to_string(rho));
      logdet += std::log(std::abs(d));
      const std::complex<double> r = eigvals_[i] / d;  // lambda / (1 - rho lambda)
      tr_m += r.real();
      tr_m2 += (r * r).real();
    }
    ev.logdet = logdet;
    ev.tr_m = tr_m;
    ev.tr_m2 = tr_m2;
  } else {
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n_, n_) - rho * w11_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(t);
    double logdet = 0;
    for (int i = 0; i < n_; ++i) {
      const double u = std::abs(lu.matrixLU()(i, i));
      if (u < 1e-14)
        throw SingularityError("log_det: singular factor at rho=" + std::to_string(rho));
      logdet += std::log(u);
    }
    Eigen::MatrixXd m = lu.solve(w11_);  // (I - rho W)^{-1} W; same trace as M
    ev.logdet = logdet;
    ev.tr_m = m.trace();
    ev.tr_m2 = m.cwiseProduct(m.transpose()).sum();
  }
  cache_ = ev;
  return cache_;
}

double LikelihoodWorkspace::profile_sigma2(double rho) const {
  const double s2 = (y1_ - rho * wy_).squaredNorm() / n_;
  if (!(s2 > 0.0))
    throw DegenerateDataError("profile_sigma2: degenerate data (sigma2 <= 0)");
  return s2;
}

double LikelihoodWorkspace::log_det(double rho) const { return traces(rho).logdet; }

double LikelihoodWorkspace::loglik(double rho) const {
  return -0.5 * n_ * (kLog2Pi + 1.0) - 0.5 * n_ * std::log(profile_sigma2(rho)) +
         traces(rho).logdet;
}

double LikelihoodWorkspace::score(double rho) const {
  const double q = wy_y1_ - rho * wywy_;  // Y1' W' (I - rho W) Y1
  return q / profile_sigma2(rho) - traces(rho).tr_m;
}

double LikelihoodWorkspace::hessian(double rho) const {
  const double s2 = profile_sigma2(rho);
  const double q = wy_y1_ - rho * wywy_;
  return 2.0 * q * q / (n_ * s2 * s2) - wywy_ / s2 - traces(rho).tr_m2;
}

namespace {

template <typename F>
double golden_section_max(F f, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

FitResult fit(const LikelihoodWorkspace& ws, const FitOptions& opts) {
  const int n = ws.size();
  if (n < 2) throw std::invalid_argument("fit: need n >= 2");

  double rho = 0.0;
  double ll = ws.loglik(rho);  // throws DegenerateDataError for Y1 = 0
  if (!std::isfinite(ll)) throw FitError("fit: non-finite likelihood at rho = 0");

  FitResult res;
  bool fallback = false;
  int it = 0;
  while (it < opts.max_iterations) {
    ++it;
    const double s = ws.score(rho);
    if (std::abs(s) <= opts.score_tol_scale * n) break;
    const double h = ws.hessian(rho);
    if (!std::isfinite(s) || !std::isfinite(h) || h >= 0.0) {
      fallback = true;
      break;
    }
    const double target =
        std::clamp(rho - s / h, -opts.newton_box, opts.newton_box);
    double step = target - rho;
    if (step == 0.0) break;  // pinned at the box
    double cand = target;
    double cand_ll = ws.loglik(cand);
    int halves = 0;
    while (!(cand_ll > ll) && halves < opts.max_halvings) {
      step *= 0.5;
      cand = rho + step;
      cand_ll = ws.loglik(cand);
      ++halves;
    }
    if (!(cand_ll > ll)) {
      if (std::abs(step) <= opts.newton_tol && cand_ll >= ll - 1e-12 * std::abs(ll)) {
        break;  // flat at machine precision around a stationary point
      }
      fallback = true;
      break;
    }
    const bool small_step = std::abs(cand - rho) <= opts.newton_tol;
    rho = cand;
    ll = cand_ll;
    if (small_step) break;
  }

  if (fallback) {
    rho = golden_section_max([&](double r) { return ws.loglik(r); }, opts.fallback_lo,
                             opts.fallback_hi, opts.fallback_tol);
    ll = ws.loglik(rho);
  } else {
    // polish: a couple of undamped Newton steps pin the score to the
    // stationarity tolerance once the iterates are already tiny
    for (int extra = 0; extra < 3; ++extra) {
      const double s = ws.score(rho);
      if (std::abs(s) <= opts.score_tol_scale * n) break;
      const double h = ws.hessian(rho);
      if (!(h < 0.0)) break;
      const double step = -s / h;
      if (std::abs(step) > 1e-6) break;
      rho = std::clamp(rho + step, -opts.newton_box, opts.newton_box);
    }
    ll = ws.loglik(rho);
  }

  res.rho_hat = rho;
  res.sigma2_hat = ws.profile_sigma2(rho);
  res.loglik = ll;
  res.iterations = it;
  res.used_fallback = fallback;
  const double s_final = ws.score(rho);
  res.converged = std::isfinite(s_final) && std::abs(s_final) <= 1e-8 * n &&
                  ws.hessian(rho) < 0.0;
  return res;
}

FitResult fit(const Eigen::VectorXd& y1, const Eigen::MatrixXd& w11,
              const FitOptions& opts) {
  LikelihoodWorkspace ws(w11, y1, w11.rows() <= opts.eigen_threshold);
  return fit(ws, opts);
}

}  // namespace sarnet
