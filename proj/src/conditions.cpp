#include "sarnet/conditions.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sarnet {

namespace {

// Iterative Tarjan; recursion depth would not survive path graphs.
struct TarjanState {
  std::vector<int> index, low, comp;
  std::vector<char> on_stack;
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
};

void tarjan_from(const AdjacencyMatrix& a, int root, TarjanState& st) {
  struct Frame {
    int v;
    std::int64_t edge;
  };
  std::vector<Frame> frames;
  frames.push_back({root, a.row_ptr[root]});
  st.index[root] = st.low[root] = st.next_index++;
  st.stack.push_back(root);
  st.on_stack[root] = 1;

  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.edge < a.row_ptr[f.v + 1]) {
      const int w = a.col_idx[f.edge++];
      if (st.index[w] < 0) {
        st.index[w] = st.low[w] = st.next_index++;
        st.stack.push_back(w);
        st.on_stack[w] = 1;
        frames.push_back({w, a.row_ptr[w]});
      } else if (st.on_stack[w]) {
        st.low[f.v] = std::min(st.low[f.v], st.index[w]);
      }
    } else {
      if (st.low[f.v] == st.index[f.v]) {
        int w;
        do {
          w = st.stack.back();
          st.stack.pop_back();
          st.on_stack[w] = 0;
          st.comp[w] = st.next_comp;
        } while (w != f.v);
        ++st.next_comp;
      }
      const int v = f.v;
      frames.pop_back();
      if (!frames.empty())
        st.low[frames.back().v] = std::min(st.low[frames.back().v], st.low[v]);
    }
  }
}

}  // namespace

std::vector<int> strongly_connected_components(const AdjacencyMatrix& a,
                                               int& n_components, int& largest) {
  TarjanState st;
  const std::size_t n = static_cast<std::size_t>(a.n_nodes);
  st.index.assign(n, -1);
  st.low.assign(n, 0);
  st.comp.assign(n, -1);
  st.on_stack.assign(n, 0);
  for (int v = 0; v < a.n_nodes; ++v)
    if (st.index[v] < 0) tarjan_from(a, v, st);
  n_components = st.next_comp;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(st.next_comp), 0);
  for (int v = 0; v < a.n_nodes; ++v) sizes[st.comp[v]]++;
  largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) -
                             sizes.begin());
  return st.comp;
}

StationaryResult stationary_dist(const WeightMatrix& w, double tol, int max_iters,
                                 double damping) {
  const int n = w.n_nodes;
  if (n == 0) throw std::invalid_argument("stationary_dist: empty graph");

  // Restrict to the largest strongly connected component. Its closure
  // would look natural but is the wrong state space: any reachable
  // sub-class with no way back (absorbing blocks, terminal cycles)
  // swallows the whole stationary mass. On the SCC the chain is
  // irreducible and the renormalized iteration yields its
  // quasi-stationary distribution, which equals pi exactly when the
  // graph is strongly connected.
  AdjacencyMatrix pattern;
  pattern.n_nodes = n;
  pattern.row_ptr = w.row_ptr;
  pattern.col_idx = w.col_idx;
  int n_comp = 0, largest = 0;
  const std::vector<int> comp = strongly_connected_components(pattern, n_comp, largest);
  std::vector<char> in_closure(static_cast<std::size_t>(n), 0);
  std::vector<int> queue;
  for (int v = 0; v < n; ++v)
    if (comp[v] == largest) {
      in_closure[v] = 1;
      queue.push_back(v);
    }

  StationaryResult res;
  res.closure_size = static_cast<int>(queue.size());
  res.fraction_outside = 1.0 - static_cast<double>(queue.size()) / n;

  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  const double init = 1.0 / res.closure_size;
  for (int v : queue) pi[v] = init;

  std::vector<double> next(static_cast<std::size_t>(n), 0.0);
  // Rows with no in-set target (possible only for a singleton component)
  // get the uniform completion; edges leaving the set leak mass, which
  // the per-step renormalization absorbs.
  std::vector<char> no_target(static_cast<std::size_t>(n), 0);
  for (int i : queue) {
    bool any = false;
    for (std::int64_t p = w.row_ptr[i]; p < w.row_ptr[i + 1] && !any; ++p)
      any = in_closure[w.col_idx[p]];
    no_target[i] = any ? 0 : 1;
  }
  auto wt_apply = [&](const std::vector<double>& x, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    double dangling = 0;
    for (int i : queue) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      if (no_target[i]) {
        dangling += xi;
        continue;
      }
      for (std::int64_t p = w.row_ptr[i]; p < w.row_ptr[i + 1]; ++p) {
        const int j = w.col_idx[p];
        if (in_closure[j]) out[j] += w.values[p] * xi;
      }
    }
    if (dangling > 0) {
      const double share = dangling / static_cast<double>(queue.size());
      for (int i : queue) out[i] += share;
    }
  };

  int it = 0;
  for (; it < max_iters; ++it) {
    wt_apply(pi, next);
    double mass = 0;
    for (int v : queue) {
      next[v] = damping * pi[v] + (1.0 - damping) * next[v];
      mass += next[v];
    }
    if (mass <= 0.0) break;
    double delta = 0;
    for (int v : queue) {
      next[v] /= mass;
      delta += std::abs(next[v] - pi[v]);
      pi[v] = next[v];
    }
    if (delta <= tol) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.pi = std::move(pi);

  wt_apply(res.pi, next);
  double resid = 0;
  for (int v : queue) resid += std::abs(next[v] - res.pi[v]);
  res.residual_l1 = resid;
  return res;
}

double check_c1(std::span<const double> pi, int n_nodes) {
  double ss = 0;
  for (double p : pi) ss += p * p;
  return std::sqrt(static_cast<double>(n_nodes)) * ss;
}

double check_c2(const AdjacencyMatrix& a) {
  std::vector<std::int64_t> col_sum(static_cast<std::size_t>(a.n_nodes), 0);
  for (int j : a.col_idx) col_sum[j]++;
  std::int64_t best = 0;
  for (std::int64_t s : col_sum) best = std::max(best, s);
  return static_cast<double>(best);
}

namespace {

// lambda_max of B'B by power iteration on v -> B'(Bv).
double block_lambda_max(const SparseBlock& b, double tol = 1e-13,
                        int max_iters = 200000) {
  if (b.values.empty() || b.cols == 0) return 0.0;
  std::vector<double> v(static_cast<std::size_t>(b.cols));
  // fixed quasi-random start; an orthogonal start would stall the iteration
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto& x : v) {
    h ^= h << 13;
    h ^= h >> 7;
    h ^= h << 17;
    x = 0.5 + static_cast<double>(h % 1000003) / 1000003.0;
  }
  std::vector<double> u(static_cast<std::size_t>(b.rows));
  std::vector<double> vn(static_cast<std::size_t>(b.cols));
  double lambda = 0;
  for (int it = 0; it < max_iters; ++it) {
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (auto& x : v) x /= norm;

    std::fill(u.begin(), u.end(), 0.0);
    for (int r = 0; r < b.rows; ++r)
      for (std::int64_t p = b.row_ptr[r]; p < b.row_ptr[r + 1]; ++p)
        u[r] += b.values[p] * v[b.col_idx[p]];
    std::fill(vn.begin(), vn.end(), 0.0);
    for (int r = 0; r < b.rows; ++r) {
      if (u[r] == 0.0) continue;
      for (std::int64_t p = b.row_ptr[r]; p < b.row_ptr[r + 1]; ++p)
        vn[b.col_idx[p]] += b.values[p] * u[r];
    }
    double next = 0;
    for (std::size_t i = 0; i < v.size(); ++i) next += v[i] * vn[i];
    v.swap(vn);
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

double dense_sigma_min_sq(const Eigen::MatrixXd& w_block, double rho) {
  const Eigen::Index m = w_block.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(m, m) - rho * w_block;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.transpose() * t,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

C3Result check_c3(const WeightMatrix& w, const SubnetSelection& sel, double rho,
                  int dense_threshold) {
  if (!sel.has_blocks)
    throw std::invalid_argument("check_c3: selection extracted without blocks");
  const int n = static_cast<int>(sel.nodes.size());
  const int m = static_cast<int>(sel.s2.size());

  C3Result res;
  res.delta2 = (sel.w12_frobenius_sq + sel.w21_frobenius_sq) / std::sqrt(
                   static_cast<double>(n));
  if (rho == 0.0) {
    // Delta1 vanishes; lambda_max factors still reported
    res.lambda_max_w12 = block_lambda_max(sel.w12);
    res.lambda_max_w21 = block_lambda_max(sel.w21);
    res.c_min = 1.0;
    res.delta1 = 0.0;
    return res;
  }

  res.lambda_max_w12 = block_lambda_max(sel.w12);
  res.lambda_max_w21 = block_lambda_max(sel.w21);

  double c1 = dense_sigma_min_sq(sel.w11, rho);
  double c2;
  if (m <= dense_threshold) {
    Eigen::MatrixXd w22 = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> s2pos(static_cast<std::size_t>(w.n_nodes), -1);
    for (int r = 0; r < m; ++r) s2pos[sel.s2[r]] = r;
    for (int r = 0; r < m; ++r) {
      const int i = sel.s2[r];
      for (std::int64_t p = w.row_ptr[i]; p < w.row_ptr[i + 1]; ++p) {
        const int q = s2pos[w.col_idx[p]];
        if (q >= 0) w22(r, q) = w.values[p];
      }
    }
    c2 = dense_sigma_min_sq(w22, rho);
  } else {
    c2 = (1.0 - std::abs(rho)) * (1.0 - std::abs(rho));
    res.c_min_approximate = true;
  }
  res.c_min = std::min(c1, c2);
  res.delta1 = rho * rho / (res.c_min * res.c_min) * res.lambda_max_w12 *
               res.lambda_max_w21;
  return res;
}

ConditionReport verify_conditions(const AdjacencyMatrix& a, const WeightMatrix& w,
                                  std::span<const int> s1, double rho) {
  ConditionReport rep;
  const StationaryResult st = stationary_dist(w);
  rep.pi_stat = check_c1(st.pi, w.n_nodes);
  rep.power_iters = st.iterations;
  rep.converged = st.converged;
  rep.closure_size = st.closure_size;
  rep.a_max = check_c2(a);
  const SubnetSelection sel = extract_selection(w, s1, /*keep_blocks=*/true);
  const C3Result c3 = check_c3(w, sel, rho);
  rep.delta1 = c3.delta1;
  rep.delta2 = c3.delta2;
  rep.c_min_approximate = c3.c_min_approximate;
  rep.n_zero_rows = w.n_zero_rows;
  return rep;
}

}  // namespace sarnet
