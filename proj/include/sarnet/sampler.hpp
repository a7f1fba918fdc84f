#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarnet/graph.hpp"

namespace sarnet {

enum class SamplerMethod { SRS, SNOW, CS, DFS, FF, SNOWK, RWR, RWJ };

SamplerMethod sampler_method_from_string(const std::string& name);
std::string to_string(SamplerMethod m);

struct SamplerSpec {
  SamplerMethod method = SamplerMethod::SNOW;
  int target_n = 0;
  int n_seeds = 5;     // SNOW / FF / SNOWK
  int k = 5;           // SNOWK: neighbors taken per seed
  double p_ff = 0.25;  // FF: geometric success probability
  double p_rw = 0.75;  // RWR / RWJ: probability of following an edge
  std::span<const int> cluster_labels;  // CS only
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::vector<int> nodes;  // S1 in selection order
  bool short_sample = false;
};

// Draws a node set of exactly spec.target_n (unless the whole graph is
// exhausted first, which sets short_sample). Expansion follows
// out-edges: j is a neighbor of i when a_ij = 1. Growth steps that
// overshoot the target drop uniformly chosen nodes from the last step.
// Samplers that get stuck (empty frontier, dead-end walk) restart from
// a uniformly chosen unvisited node.
SampleResult sample(const AdjacencyMatrix& a, const SamplerSpec& spec);

// Same traversal as sample(); returns the pre-trim size of each growth
// step (the seed step first).
std::vector<int> wave_trace(const AdjacencyMatrix& a, const SamplerSpec& spec);

}  // namespace sarnet
