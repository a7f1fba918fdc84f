#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace sarnet {

// Directed 0/1 adjacency in compressed row storage. a_ij = 1 means
// "i follows j". Rows are sorted by column, deduplicated, and never
// contain the diagonal (a_ii = 0 by convention).
struct AdjacencyMatrix {
  int n_nodes = 0;
  std::vector<std::int64_t> row_ptr;  // size n_nodes + 1
  std::vector<int> col_idx;

  int out_degree(int i) const {
    return static_cast<int>(row_ptr[i + 1] - row_ptr[i]);
  }
  std::int64_t n_edges() const { return static_cast<std::int64_t>(col_idx.size()); }
  std::span<const int> out_neighbors(int i) const {
    return {col_idx.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
};

// Row-normalized spatial weights, w_ij = a_ij / d_i. Rows with d_i = 0
// are stored empty (zero rows); the count of such rows is kept for
// diagnostics.
struct WeightMatrix {
  int n_nodes = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;
  int n_zero_rows = 0;

  std::span<const int> row_cols(int i) const {
    return {col_idx.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  std::span<const double> row_values(int i) const {
    return {values.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
};

// Builds a deduplicated adjacency from an edge list; self-loops are
// dropped. Throws std::domain_error on out-of-range endpoints.
AdjacencyMatrix from_edges(int n_nodes, std::vector<std::pair<int, int>> edges);

// Parses the "src<TAB>dst" text format. Lines starting with '#' are
// comments, except an optional "#nodes N" header which fixes the node
// count (otherwise 1 + max id seen). Throws std::runtime_error with the
// offending line number on malformed input, std::domain_error on
// negative ids.
AdjacencyMatrix load_edge_list(std::istream& in);
AdjacencyMatrix load_edge_list_file(const std::string& path);

void save_edge_list(const AdjacencyMatrix& a, std::ostream& out);

WeightMatrix row_normalize(const AdjacencyMatrix& a);

// y = W x. Throws std::domain_error on length mismatch.
std::vector<double> spmv(const WeightMatrix& w, std::span<const double> x);
void spmv_into(const WeightMatrix& w, const double* x, double* y);

}  // namespace sarnet
