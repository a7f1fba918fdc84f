#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "sarnet/dgp.hpp"
#include "sarnet/inference.hpp"
#include "sarnet/netgen.hpp"
#include "sarnet/sampler.hpp"

namespace sarnet {

enum class NetworkKind { Sbm, Lsm, EdgeList };

NetworkKind network_kind_from_string(const std::string& name);
std::string to_string(NetworkKind k);

// One simulation cell (network family, size, sampler) swept over a rho
// grid. Synthetic networks are redrawn fresh every replication;
// edge-list networks are fixed and only errors/samples are redrawn.
struct ExperimentConfig {
  NetworkKind network = NetworkKind::Sbm;
  int n_nodes = 0;
  int n_blocks = 1;
  double lsm_beta = 1.0;
  double lsm_alpha_within = 5.0;
  double lsm_alpha_between = 1.0;
  std::string edgelist_path;
  std::string labels_path;

  std::vector<double> rho_grid{0.0, 0.2, 0.4, 0.6};
  ErrorDist error_dist = ErrorDist::Exp;

  SamplerMethod method = SamplerMethod::SNOW;
  int n_seeds = 5;
  int k = 5;
  double p_ff = 0.25;
  double p_rw = 0.75;
  double subsample_ratio = 0.01;
  int target_n = 0;  // 0: round(subsample_ratio * n_nodes)

  int replications = 500;
  std::uint64_t base_seed = 0;
  SeVariant se_variant = SeVariant::Lemma2;
  int bootstrap_B = 0;  // 0: bootstrap columns off
  double neumann_tol = 1e-10;
  int m_cap = 500;
  int threads = 0;  // 0: hardware concurrency
};

struct CellStats {
  double rho = 0;
  int n_reps = 0;
  int n_fail = 0;
  double bias = 0;
  double se_hat = 0;  // mean plug-in SE
  double se = 0;      // empirical, divisor = number of kept replications
  double ecp = 0;
  double cpu_s = 0;  // mean fit + SE seconds, generation and sampling excluded
  bool has_bootstrap = false;
  double se_bt_hat = 0;
  double ecp_bt = 0;
  double cpu_bt_s = 0;
};

struct MCReport {
  std::string network;
  int n_nodes = 0;
  int n_blocks = 0;
  std::string method;
  std::vector<CellStats> rows;
};

CellStats run_cell(const ExperimentConfig& cfg, double rho, int cell_index,
                   const AdjacencyMatrix* fixed_graph,
                   const std::vector<int>* fixed_labels);

MCReport run_experiment(const ExperimentConfig& cfg);

void write_csv(const MCReport& report, std::ostream& out);
nlohmann::json report_to_json(const MCReport& report);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

}  // namespace sarnet
