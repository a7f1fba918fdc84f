#include "sarnet/selection.hpp"

#include <stdexcept>
#include <string>

namespace sarnet {

SubnetSelection extract_selection(const WeightMatrix& w, std::span<const int> s1,
                                  bool keep_blocks) {
  const int big_n = w.n_nodes;
  const int n = static_cast<int>(s1.size());

  // position of each node inside S1, -1 if unselected
  std::vector<int> pos(static_cast<std::size_t>(big_n), -1);
  for (int p = 0; p < n; ++p) {
    const int node = s1[p];
    if (node < 0 || node >= big_n)
      throw std::domain_error("extract_selection: node id " + std::to_string(node) +
                              " out of range");
    if (pos[node] != -1)
      throw std::domain_error("extract_selection: duplicate node id " +
                              std::to_string(node));
    pos[node] = p;
  }

  SubnetSelection sel;
  sel.nodes.assign(s1.begin(), s1.end());
  sel.w11 = Eigen::MatrixXd::Zero(n, n);

  // W11 and tr(W12' W12) in one pass over the rows of S1.
  for (int p = 0; p < n; ++p) {
    const int i = s1[p];
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int q = pos[cols[k]];
      if (q >= 0)
        sel.w11(p, q) = vals[k];
      else
        sel.w12_frobenius_sq += vals[k] * vals[k];
    }
  }
  // tr(W21' W21): rows of S2 restricted to columns in S1.
  for (int i = 0; i < big_n; ++i) {
    if (pos[i] >= 0) continue;
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (pos[cols[k]] >= 0) sel.w21_frobenius_sq += vals[k] * vals[k];
  }

  if (!keep_blocks) return sel;

  sel.has_blocks = true;
  sel.s2.reserve(static_cast<std::size_t>(big_n - n));
  std::vector<int> s2pos(static_cast<std::size_t>(big_n), -1);
  for (int i = 0; i < big_n; ++i)
    if (pos[i] < 0) {
      s2pos[i] = static_cast<int>(sel.s2.size());
      sel.s2.push_back(i);
    }
  const int m = static_cast<int>(sel.s2.size());

  sel.w12.rows = n;
  sel.w12.cols = m;
  sel.w12.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int p = 0; p < n; ++p) {
    const int i = s1[p];
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (pos[cols[k]] >= 0) continue;
      sel.w12.col_idx.push_back(s2pos[cols[k]]);
      sel.w12.values.push_back(vals[k]);
    }
    sel.w12.row_ptr[p + 1] = static_cast<std::int64_t>(sel.w12.col_idx.size());
  }

  sel.w21.rows = m;
  sel.w21.cols = n;
  sel.w21.row_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  for (int r = 0; r < m; ++r) {
    const int i = sel.s2[r];
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int q = pos[cols[k]];
      if (q < 0) continue;
      sel.w21.col_idx.push_back(q);
      sel.w21.values.push_back(vals[k]);
    }
    sel.w21.row_ptr[r + 1] = static_cast<std::int64_t>(sel.w21.col_idx.size());
  }
  return sel;
}

}  // namespace sarnet
