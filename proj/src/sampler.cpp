#include "sarnet/sampler.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sarnet/rng.hpp"

namespace sarnet {

SamplerMethod sampler_method_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "srs") return SamplerMethod::SRS;
  if (s == "snow") return SamplerMethod::SNOW;
  if (s == "cs") return SamplerMethod::CS;
  if (s == "dfs") return SamplerMethod::DFS;
  if (s == "ff") return SamplerMethod::FF;
  if (s == "snowk" || s == "snow-k" || s == "snow_k") return SamplerMethod::SNOWK;
  if (s == "rwr") return SamplerMethod::RWR;
  if (s == "rwj") return SamplerMethod::RWJ;
  throw std::invalid_argument("unknown sampler method: " + name);
}

std::string to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::SRS: return "srs";
    case SamplerMethod::SNOW: return "snow";
    case SamplerMethod::CS: return "cs";
    case SamplerMethod::DFS: return "dfs";
    case SamplerMethod::FF: return "ff";
    case SamplerMethod::SNOWK: return "snowk";
    case SamplerMethod::RWR: return "rwr";
    case SamplerMethod::RWJ: return "rwj";
  }
  return "?";
}

namespace {

struct Traversal {
  const AdjacencyMatrix& a;
  const SamplerSpec& spec;
  std::mt19937_64 rng;
  std::vector<char> selected;
  std::vector<int> order;
  std::vector<int>* trace;

  Traversal(const AdjacencyMatrix& a_, const SamplerSpec& spec_, std::vector<int>* tr)
      : a(a_), spec(spec_), rng(make_rng(spec_.seed)),
        selected(static_cast<std::size_t>(a_.n_nodes), 0), trace(tr) {
    order.reserve(static_cast<std::size_t>(spec_.target_n));
  }

  int n_selected() const { return static_cast<int>(order.size()); }
  bool full() const { return n_selected() >= spec.target_n; }
  int room() const { return spec.target_n - n_selected(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

  // Uniform over unvisited nodes; -1 when none remain.
  int fresh_unvisited() {
    const int n = a.n_nodes;
    if (n_selected() >= n) return -1;
    if (n_selected() < n / 2) {
      for (int tries = 0; tries < 64; ++tries) {
        const int v = uniform_int(0, n - 1);
        if (!selected[v]) return v;
      }
    }
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(n - n_selected()));
    for (int v = 0; v < n; ++v)
      if (!selected[v]) pool.push_back(v);
    if (pool.empty()) return -1;
    return pool[static_cast<std::size_t>(uniform_int(0, static_cast<int>(pool.size()) - 1))];
  }

  void take(int v) {
    selected[v] = 1;
    order.push_back(v);
  }

  // Admits a grown chunk: records its pre-trim size, randomly drops
  // overshoot from this (last) step only.
  void admit_chunk(std::vector<int>& chunk) {
    if (trace) trace->push_back(static_cast<int>(chunk.size()));
    if (static_cast<int>(chunk.size()) > room()) {
      std::shuffle(chunk.begin(), chunk.end(), rng);
      for (std::size_t i = static_cast<std::size_t>(room()); i < chunk.size(); ++i)
        selected[chunk[i]] = 0;
      chunk.resize(static_cast<std::size_t>(room()));
    }
    order.insert(order.end(), chunk.begin(), chunk.end());
  }

  std::vector<int> draw_seeds(int n0) {
    std::vector<int> seeds;
    seeds.reserve(static_cast<std::size_t>(n0));
    for (int s = 0; s < n0 && n_selected() + static_cast<int>(seeds.size()) < a.n_nodes;
         ++s) {
      const int v = fresh_unvisited();
      if (v < 0) break;
      selected[v] = 1;  // marked while the chunk is being built
      seeds.push_back(v);
    }
    return seeds;
  }

  // Unvisited out-neighbors of v, marking as they are gathered.
  void expand_all(int v, std::vector<int>& chunk) {
    for (int j : a.out_neighbors(v)) {
      if (selected[j]) continue;
      selected[j] = 1;
      chunk.push_back(j);
    }
  }

  // Takes up to `cap` uniformly chosen unvisited out-neighbors of v.
  void expand_capped(int v, int cap, std::vector<int>& chunk) {
    if (cap <= 0) return;
    std::vector<int> fresh;
    for (int j : a.out_neighbors(v))
      if (!selected[j]) fresh.push_back(j);
    if (static_cast<int>(fresh.size()) > cap) {
      for (int t = 0; t < cap; ++t)
        std::swap(fresh[t], fresh[static_cast<std::size_t>(
                                uniform_int(t, static_cast<int>(fresh.size()) - 1))]);
      fresh.resize(static_cast<std::size_t>(cap));
    }
    for (int j : fresh) {
      selected[j] = 1;
      chunk.push_back(j);
    }
  }

  // Failures before first success; mean (1 - p) / p.
  int geometric(double p) {
    return std::geometric_distribution<int>(p)(rng);
  }

  int random_unvisited_neighbor(int v) {
    std::vector<int> fresh;
    for (int j : a.out_neighbors(v))
      if (!selected[j]) fresh.push_back(j);
    if (fresh.empty()) return -1;
    return fresh[static_cast<std::size_t>(uniform_int(0, static_cast<int>(fresh.size()) - 1))];
  }
};

void run_wave_family(Traversal& t) {
  const SamplerSpec& spec = t.spec;
  std::vector<int> frontier = t.draw_seeds(std::min(spec.n_seeds, spec.target_n));
  {
    std::vector<int> chunk = frontier;
    t.admit_chunk(chunk);
    frontier = std::move(chunk);
  }
  while (!t.full()) {
    std::vector<int> chunk;
    for (int v : frontier) {
      switch (spec.method) {
        case SamplerMethod::SNOW: t.expand_all(v, chunk); break;
        case SamplerMethod::SNOWK: t.expand_capped(v, spec.k, chunk); break;
        case SamplerMethod::FF: t.expand_capped(v, t.geometric(spec.p_ff), chunk); break;
        default: break;
      }
    }
    if (chunk.empty()) {
      const int v = t.fresh_unvisited();
      if (v < 0) return;  // graph exhausted
      t.selected[v] = 1;
      chunk.push_back(v);
    }
    t.admit_chunk(chunk);
    frontier = std::move(chunk);
  }
}

void run_cs(Traversal& t) {
  std::span<const int> labels = t.spec.cluster_labels;
  if (labels.size() != static_cast<std::size_t>(t.a.n_nodes))
    throw std::invalid_argument("CS sampler: cluster labels missing or wrong length");
  std::map<int, std::vector<int>> clusters;
  for (int i = 0; i < t.a.n_nodes; ++i) clusters[labels[i]].push_back(i);
  std::vector<const std::vector<int>*> visit;
  visit.reserve(clusters.size());
  for (const auto& [label, members] : clusters) visit.push_back(&members);
  std::shuffle(visit.begin(), visit.end(), t.rng);
  for (const auto* members : visit) {
    if (t.full()) break;
    std::vector<int> chunk = *members;
    for (int v : chunk) t.selected[v] = 1;
    t.admit_chunk(chunk);
  }
}

void run_srs(Traversal& t) {
  std::vector<int> ids(static_cast<std::size_t>(t.a.n_nodes));
  std::iota(ids.begin(), ids.end(), 0);
  const int n = t.spec.target_n;
  for (int s = 0; s < n; ++s) {
    std::swap(ids[s], ids[static_cast<std::size_t>(
                          t.uniform_int(s, static_cast<int>(ids.size()) - 1))]);
    t.take(ids[s]);
    if (t.trace) t.trace->push_back(1);
  }
}

void run_dfs(Traversal& t) {
  std::vector<int> stack;
  while (!t.full()) {
    if (stack.empty()) {
      const int v = t.fresh_unvisited();
      if (v < 0) return;
      t.take(v);
      if (t.trace) t.trace->push_back(1);
      if (t.full()) return;
      stack.push_back(v);
    }
    const int j = t.random_unvisited_neighbor(stack.back());
    if (j < 0) {
      stack.pop_back();  // backtrack
      continue;
    }
    t.take(j);
    if (t.trace) t.trace->push_back(1);
    stack.push_back(j);
  }
}

void run_random_walk(Traversal& t, bool jump) {
  int root = t.fresh_unvisited();
  if (root < 0) return;
  t.take(root);
  if (t.trace) t.trace->push_back(1);
  int cur = root;
  std::bernoulli_distribution follow(t.spec.p_rw);
  while (!t.full()) {
    if (follow(t.rng)) {
      const int j = t.random_unvisited_neighbor(cur);
      if (j >= 0) {
        t.take(j);
        if (t.trace) t.trace->push_back(1);
        cur = j;
      } else {
        const int v = t.fresh_unvisited();  // dead end
        if (v < 0) return;
        t.take(v);
        if (t.trace) t.trace->push_back(1);
        cur = v;
      }
    } else if (jump) {
      const int v = t.fresh_unvisited();
      if (v < 0) return;
      t.take(v);
      if (t.trace) t.trace->push_back(1);
      cur = v;
    } else {
      cur = root;  // restart from the first seed node
    }
  }
}

void validate(const AdjacencyMatrix& a, const SamplerSpec& spec) {
  if (a.n_nodes <= 0) throw std::invalid_argument("sample: empty graph");
  if (spec.target_n <= 0 || spec.target_n > a.n_nodes)
    throw std::invalid_argument("sample: target_n must be in (0, n_nodes]");
  if (spec.method == SamplerMethod::FF && (spec.p_ff <= 0.0 || spec.p_ff >= 1.0))
    throw std::invalid_argument("sample: p_ff must be in (0,1)");
  if ((spec.method == SamplerMethod::RWR || spec.method == SamplerMethod::RWJ) &&
      (spec.p_rw <= 0.0 || spec.p_rw >= 1.0))
    throw std::invalid_argument("sample: p_rw must be in (0,1)");
  if (spec.method == SamplerMethod::SNOWK && spec.k < 1)
    throw std::invalid_argument("sample: k must be >= 1");
  if ((spec.method == SamplerMethod::SNOW || spec.method == SamplerMethod::SNOWK ||
       spec.method == SamplerMethod::FF) &&
      spec.n_seeds < 1)
    throw std::invalid_argument("sample: n_seeds must be >= 1");
}

SampleResult run(const AdjacencyMatrix& a, const SamplerSpec& spec,
                 std::vector<int>* trace) {
  validate(a, spec);
  Traversal t(a, spec, trace);
  switch (spec.method) {
    case SamplerMethod::SRS: run_srs(t); break;
    case SamplerMethod::SNOW:
    case SamplerMethod::SNOWK:
    case SamplerMethod::FF: run_wave_family(t); break;
    case SamplerMethod::CS: run_cs(t); break;
    case SamplerMethod::DFS: run_dfs(t); break;
    case SamplerMethod::RWR: run_random_walk(t, false); break;
    case SamplerMethod::RWJ: run_random_walk(t, true); break;
  }
  SampleResult res;
  res.short_sample = static_cast<int>(t.order.size()) < spec.target_n;
  res.nodes = std::move(t.order);
  return res;
}

}  // namespace

SampleResult sample(const AdjacencyMatrix& a, const SamplerSpec& spec) {
  return run(a, spec, nullptr);
}

std::vector<int> wave_trace(const AdjacencyMatrix& a, const SamplerSpec& spec) {
  std::vector<int> trace;
  run(a, spec, &trace);
  return trace;
}

}  // namespace sarnet
