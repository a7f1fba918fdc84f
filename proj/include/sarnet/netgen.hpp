#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sarnet/graph.hpp"

namespace sarnet {

struct SbmConfig {
  int n_nodes = 0;
  int n_blocks = 1;
  std::uint64_t seed = 0;
};

struct LsmConfig {
  int n_nodes = 0;
  int n_blocks = 1;
  double beta = 1.0;
  double alpha_within = 5.0;
  double alpha_between = 1.0;
  std::uint64_t seed = 0;
};

// Generated graph plus the block/cluster memberships (1..K) it was
// built from. The memberships feed the CS sampler.
struct SyntheticNetwork {
  AdjacencyMatrix adjacency;
  std::vector<int> labels;
};

// Three-tier directed edge rates for the block model: same block,
// adjacent block label (|c_i - c_j| = 1, no wraparound), and everything
// else. Tiers separate as 1 : N^{-1/2} : N^{-1} at rate 0.2, so the
// expected out-degree stays fixed by N/K while cross-block noise decays
// with N.
struct SbmTierRates {
  double same_block;
  double adjacent_block;
  double far;
};
SbmTierRates sbm_tier_rates(int n_nodes);

// Ordered pairs (i != j) drawn independently with the three-tier rates;
// memberships uniform over {1..K}. Equivalent to a full Bernoulli sweep
// over all pairs, implemented with geometric skip-sampling so cost is
// O(edges) rather than O(N^2).
SyntheticNetwork gen_sbm(const SbmConfig& cfg);

// Latent space model: Z_i ~ Normal(2 c_i, 1), pairwise covariate
// X_ij ~ Normal(0,1), and edge probability
// logistic(alpha_ij + beta X_ij - (N/K) |Z_i - Z_j|). Cross-cluster
// pairs are drawn with X integrated out (same edge distribution; X is
// not used anywhere downstream) behind an exponential envelope.
SyntheticNetwork gen_lsm(const LsmConfig& cfg);

// Edge-generation stage of gen_lsm for fixed memberships and latent
// positions. Each ordered pair is an independent Bernoulli draw of the
// marginal (over X) link probability.
AdjacencyMatrix gen_lsm_edges(const LsmConfig& cfg, std::span<const int> labels,
                              std::span<const double> z, std::uint64_t seed);

// The conditional link probability given the pairwise covariate.
double lsm_link_probability(const LsmConfig& cfg, bool same_cluster, double x,
                            double latent_gap);
// The link probability with the covariate integrated out (Gauss-Hermite).
double lsm_marginal_link_probability(double alpha, double beta, double scaled_gap);

void save_labels(const std::vector<int>& labels, std::ostream& out);
std::vector<int> load_labels(std::istream& in);
std::vector<int> load_labels_file(const std::string& path);

}  // namespace sarnet
