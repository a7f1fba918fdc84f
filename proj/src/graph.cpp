#include "sarnet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sarnet {

AdjacencyMatrix from_edges(int n_nodes, std::vector<std::pair<int, int>> edges) {
  if (n_nodes < 0) throw std::domain_error("from_edges: negative node count");
  for (const auto& [s, d] : edges) {
    if (s < 0 || d < 0) throw std::domain_error("from_edges: negative node id");
    if (s >= n_nodes || d >= n_nodes)
      throw std::domain_error("from_edges: node id " + std::to_string(std::max(s, d)) +
                              " out of range for n_nodes=" + std::to_string(n_nodes));
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  AdjacencyMatrix a;
  a.n_nodes = n_nodes;
  a.row_ptr.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
  a.col_idx.reserve(edges.size());
  for (const auto& [s, d] : edges) a.row_ptr[static_cast<std::size_t>(s) + 1]++;
  for (int i = 0; i < n_nodes; ++i) a.row_ptr[i + 1] += a.row_ptr[i];
  for (const auto& [s, d] : edges) a.col_idx.push_back(d);  // already row-major sorted
  return a;
}

AdjacencyMatrix load_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  long header_nodes = -1;
  int max_id = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      hs >> tag;
      if (tag == "nodes") {
        long n = -1;
        if (!(hs >> n) || n < 0)
          throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                   ": malformed #nodes header");
        header_nodes = n;
      }
      continue;
    }
    std::istringstream ls(line);
    long s = 0, d = 0;
    if (!(ls >> s >> d))
      throw std::runtime_error("edge list line " + std::to_string(lineno) +
                               ": expected \"src<TAB>dst\"");
    std::string trailing;
    if (ls >> trailing)
      throw std::runtime_error("edge list line " + std::to_string(lineno) +
                               ": trailing tokens after edge pair");
    if (s < 0 || d < 0)
      throw std::domain_error("edge list line " + std::to_string(lineno) +
                              ": negative node id");
    edges.emplace_back(static_cast<int>(s), static_cast<int>(d));
    max_id = std::max({max_id, static_cast<int>(s), static_cast<int>(d)});
  }
  long n_nodes = (header_nodes >= 0) ? header_nodes : static_cast<long>(max_id) + 1;
  if (header_nodes >= 0 && max_id >= header_nodes)
    throw std::domain_error("edge list: node id " + std::to_string(max_id) +
                            " exceeds #nodes header " + std::to_string(header_nodes));
  return from_edges(static_cast<int>(n_nodes), std::move(edges));
}

AdjacencyMatrix load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list file: " + path);
  return load_edge_list(in);
}

void save_edge_list(const AdjacencyMatrix& a, std::ostream& out) {
  out << "#nodes " << a.n_nodes << "\n";
  for (int i = 0; i < a.n_nodes; ++i)
    for (int j : a.out_neighbors(i)) out << i << '\t' << j << '\n';
}

WeightMatrix row_normalize(const AdjacencyMatrix& a) {
  WeightMatrix w;
  w.n_nodes = a.n_nodes;
  w.row_ptr = a.row_ptr;
  w.col_idx = a.col_idx;
  w.values.resize(a.col_idx.size());
  for (int i = 0; i < a.n_nodes; ++i) {
    const int d = a.out_degree(i);
    if (d == 0) {
      ++w.n_zero_rows;
      continue;
    }
    const double inv = 1.0 / d;
    for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) w.values[p] = inv;
  }
  return w;
}

void spmv_into(const WeightMatrix& w, const double* x, double* y) {
  for (int i = 0; i < w.n_nodes; ++i) {
    double acc = 0.0;
    for (std::int64_t p = w.row_ptr[i]; p < w.row_ptr[i + 1]; ++p)
      acc += w.values[p] * x[w.col_idx[p]];
    y[i] = acc;
  }
}

std::vector<double> spmv(const WeightMatrix& w, std::span<const double> x) {
  if (static_cast<int>(x.size()) != w.n_nodes)
    throw std::domain_error("spmv: vector length does not match n_nodes");
  std::vector<double> y(static_cast<std::size_t>(w.n_nodes));
  spmv_into(w, x.data(), y.data());
  return y;
}

}  // namespace sarnet
