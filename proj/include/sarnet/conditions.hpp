#pragma once

#include <span>
#include <vector>

#include "sarnet/graph.hpp"
#include "sarnet/selection.hpp"

namespace sarnet {

struct StationaryResult {
  std::vector<double> pi;  // length n_nodes, zero outside the component
  int iterations = 0;
  bool converged = false;
  double residual_l1 = 0;  // || W' pi - pi ||_1 at the returned iterate
  int closure_size = 0;    // size of the restricted state space
  double fraction_outside = 0;
};

// Damped power iteration for W' pi = pi, restricted to the largest
// strongly connected component, where the chain is irreducible. (The
// component's out-closure is the wrong state space: any reachable
// sub-class with no return path absorbs the whole stationary mass.)
// Boundary leakage is renormalized away, giving the quasi-stationary
// distribution; on a strongly connected graph this is exactly pi. Each
// step takes damping * pi + (1 - damping) * W' pi, renormalized to sum
// 1; damping of 0 is plain power iteration (which cannot converge on
// periodic chains).
StationaryResult stationary_dist(const WeightMatrix& w, double tol = 1e-12,
                                 int max_iters = 100000, double damping = 0.5);

// Pi = sqrt(N) * pi' pi; at least N^{-1/2}, attained by the uniform pi.
double check_c1(std::span<const double> pi, int n_nodes);

// ||A||_max: maximum column sum (largest in-degree).
double check_c2(const AdjacencyMatrix& a);

struct C3Result {
  double delta1 = 0;
  double delta2 = 0;
  double c_min = 0;
  bool c_min_approximate = false;  // W22 factor replaced by the (1-|rho|)^2 bound
  double lambda_max_w12 = 0;       // of W12' W12
  double lambda_max_w21 = 0;       // of W21' W21
};

// Delta1 = rho^2 c_min^{-2} lmax(W12'W12) lmax(W21'W21) and
// Delta2 = {tr(W12'W12) + tr(W21'W21)} / sqrt(n). Requires a selection
// extracted with keep_blocks. The W22 part of c_min is computed exactly
// only when N - n <= dense_threshold.
C3Result check_c3(const WeightMatrix& w, const SubnetSelection& sel, double rho,
                  int dense_threshold = 4000);

struct ConditionReport {
  double pi_stat = 0;  // sqrt(N) pi' pi
  double a_max = 0;
  double delta1 = 0;
  double delta2 = 0;
  int power_iters = 0;
  bool converged = false;
  bool c_min_approximate = false;
  int closure_size = 0;
  int n_zero_rows = 0;
};

ConditionReport verify_conditions(const AdjacencyMatrix& a, const WeightMatrix& w,
                                  std::span<const int> s1, double rho);

// Component id per node (0-based) and the id of the largest component.
std::vector<int> strongly_connected_components(const AdjacencyMatrix& a,
                                               int& n_components, int& largest);

}  // namespace sarnet
