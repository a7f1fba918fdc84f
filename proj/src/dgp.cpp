#include "sarnet/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sarnet {

ErrorDist error_dist_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "norm" || s == "normal") return ErrorDist::Norm;
  if (s == "exp" || s == "exponential") return ErrorDist::Exp;
  throw std::invalid_argument("unknown error distribution: " + name);
}

std::string to_string(ErrorDist d) {
  return d == ErrorDist::Norm ? "norm" : "exp";
}

std::vector<double> draw_errors(ErrorDist dist, int n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("draw_errors: need n >= 1");
  std::vector<double> e(static_cast<std::size_t>(n));
  if (dist == ErrorDist::Norm) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : e) v = gauss(rng);
  } else {
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : e) v = expo(rng) - 1.0;
  }
  return e;
}

ResponseVector gen_response(const WeightMatrix& w, const DgpConfig& cfg,
                            std::span<const double> errors) {
  if (std::abs(cfg.rho) >= 1.0)
    throw std::invalid_argument("gen_response: need |rho| < 1");
  if (static_cast<int>(errors.size()) != w.n_nodes)
    throw std::invalid_argument("gen_response: error vector length mismatch");

  const std::size_t n = errors.size();
  ResponseVector out;
  out.y.assign(errors.begin(), errors.end());
  if (cfg.rho == 0.0) return out;

  double e_max = 0.0;
  for (double v : errors) e_max = std::max(e_max, std::abs(v));
  const double abs_rho = std::abs(cfg.rho);

  // tail after m terms: |rho|^{m+1} / (1 - |rho|) * max|e| (rows of W sum
  // to at most 1, so powers never amplify the sup norm)
  auto tail_bound = [&](int m) {
    return std::pow(abs_rho, m + 1) / (1.0 - abs_rho) * e_max;
  };

  std::vector<double> wk(errors.begin(), errors.end());  // W^k e
  std::vector<double> tmp(n);
  double rho_k = 1.0;
  int m = 0;
  while (tail_bound(m) >= cfg.neumann_tol) {
    if (m >= cfg.m_cap) {
      out.hit_cap = true;
      break;
    }
    spmv_into(w, wk.data(), tmp.data());
    wk.swap(tmp);
    rho_k *= cfg.rho;
    ++m;
    for (std::size_t i = 0; i < n; ++i) out.y[i] += rho_k * wk[i];
  }
  out.truncation_m = m;
  return out;
}

}  // namespace sarnet
