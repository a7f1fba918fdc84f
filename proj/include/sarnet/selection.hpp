#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sarnet/graph.hpp"

namespace sarnet {

// Rectangular sparse block in compressed row storage.
struct SparseBlock {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;
};

// View of W partitioned by an ordered node set S1. W11 keeps the
// full-network denominators d_i; no renormalization happens inside the
// subnetwork. The W12/W21 Frobenius norms are always available; the
// sparse blocks themselves (needed for the Delta1 diagnostic) are
// retained only when requested. Block columns are indexed by position
// in s2 (the complement of S1 in ascending node order).
struct SubnetSelection {
  std::vector<int> nodes;  // S1, selection order
  Eigen::MatrixXd w11;
  double w12_frobenius_sq = 0.0;
  double w21_frobenius_sq = 0.0;
  bool has_blocks = false;
  SparseBlock w12;  // n x (N-n)
  SparseBlock w21;  // (N-n) x n
  std::vector<int> s2;
};

// Throws std::domain_error on duplicate or out-of-range indices.
SubnetSelection extract_selection(const WeightMatrix& w, std::span<const int> s1,
                                  bool keep_blocks = false);

}  // namespace sarnet
