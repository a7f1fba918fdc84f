#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sarnet/graph.hpp"

namespace sarnet {

enum class ErrorDist { Norm, Exp };

ErrorDist error_dist_from_string(const std::string& name);
std::string to_string(ErrorDist d);

// i.i.d. draws with mean 0 and variance 1: standard normal, or a
// centralized standard exponential (Exp(1) - 1, fourth moment 9).
std::vector<double> draw_errors(ErrorDist dist, int n, std::mt19937_64& rng);

struct DgpConfig {
  double rho = 0.0;  // |rho| < 1
  ErrorDist error_dist = ErrorDist::Norm;
  double neumann_tol = 1e-10;
  int m_cap = 500;
  std::uint64_t seed = 0;
};

struct ResponseVector {
  std::vector<double> y;
  int truncation_m = 0;
  bool hit_cap = false;
};

// y = sum_{k=0}^{m} rho^k W^k e by repeated spmv, truncated at the
// first m where the geometric tail bound |rho|^{m+1} / (1 - |rho|) *
// max|e_i| drops below neumann_tol (or at m_cap, which sets hit_cap).
ResponseVector gen_response(const WeightMatrix& w, const DgpConfig& cfg,
                            std::span<const double> errors);

}  // namespace sarnet
