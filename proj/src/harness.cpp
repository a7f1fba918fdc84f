#include "sarnet/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#include "sarnet/rng.hpp"
#include "sarnet/selection.hpp"

namespace sarnet {

namespace {

// substream stages per (base_seed, cell, replication)
constexpr std::uint64_t kStageGraph = 0;
constexpr std::uint64_t kStageErrors = 1;
constexpr std::uint64_t kStageSample = 2;
constexpr std::uint64_t kStageBootstrap = 3;

struct RepOutcome {
  bool ok = false;
  double rho_hat = 0, se = 0, cpu = 0;
  bool covered = false;
  double se_bt = 0, cpu_bt = 0;
  bool covered_bt = false;
  bool bt_ok = false;
};

int resolve_target_n(const ExperimentConfig& cfg, int n_nodes) {
  if (cfg.target_n > 0) return cfg.target_n;
  return std::max(2, static_cast<int>(std::llround(cfg.subsample_ratio * n_nodes)));
}

RepOutcome run_replication(const ExperimentConfig& cfg, double rho, int cell_index,
                           int m, const AdjacencyMatrix* fixed_graph,
                           const std::vector<int>* fixed_labels) {
  using clock = std::chrono::steady_clock;
  const std::uint64_t cell = static_cast<std::uint64_t>(cell_index);
  const std::uint64_t rep = static_cast<std::uint64_t>(m);
  RepOutcome out;
  try {
    SyntheticNetwork local;
    const AdjacencyMatrix* graph = fixed_graph;
    const std::vector<int>* labels = fixed_labels;
    if (cfg.network == NetworkKind::Sbm) {
      local = gen_sbm({cfg.n_nodes, cfg.n_blocks,
                       stream_key(cfg.base_seed, {cell, rep, kStageGraph})});
      graph = &local.adjacency;
      labels = &local.labels;
    } else if (cfg.network == NetworkKind::Lsm) {
      LsmConfig lc;
      lc.n_nodes = cfg.n_nodes;
      lc.n_blocks = cfg.n_blocks;
      lc.beta = cfg.lsm_beta;
      lc.alpha_within = cfg.lsm_alpha_within;
      lc.alpha_between = cfg.lsm_alpha_between;
      lc.seed = stream_key(cfg.base_seed, {cell, rep, kStageGraph});
      local = gen_lsm(lc);
      graph = &local.adjacency;
      labels = &local.labels;
    }
    const int n_nodes = graph->n_nodes;
    const WeightMatrix w = row_normalize(*graph);

    auto err_rng = make_rng(cfg.base_seed, {cell, rep, kStageErrors});
    const std::vector<double> errors = draw_errors(cfg.error_dist, n_nodes, err_rng);
    DgpConfig dc;
    dc.rho = rho;
    dc.error_dist = cfg.error_dist;
    dc.neumann_tol = cfg.neumann_tol;
    dc.m_cap = cfg.m_cap;
    const ResponseVector y = gen_response(w, dc, errors);

    SamplerSpec sp;
    sp.method = cfg.method;
    sp.target_n = resolve_target_n(cfg, n_nodes);
    sp.n_seeds = cfg.n_seeds;
    sp.k = cfg.k;
    sp.p_ff = cfg.p_ff;
    sp.p_rw = cfg.p_rw;
    if (cfg.method == SamplerMethod::CS) {
      if (labels == nullptr || labels->empty())
        throw std::invalid_argument("CS sampling requires cluster labels");
      sp.cluster_labels = *labels;
    }
    sp.seed = stream_key(cfg.base_seed, {cell, rep, kStageSample});
    const SampleResult s1 = sample(*graph, sp);
    const SubnetSelection sel = extract_selection(w, s1.nodes);
    Eigen::VectorXd y1(static_cast<Eigen::Index>(sel.nodes.size()));
    for (std::size_t i = 0; i < sel.nodes.size(); ++i) y1[i] = y.y[sel.nodes[i]];

    const auto t0 = clock::now();
    const FitResult f = fit(y1, sel.w11);
    const SeIngredients ing = se_ingredients(f.rho_hat, f.sigma2_hat, y1, sel.w11);
    const double se = plugin_se(ing, static_cast<int>(sel.nodes.size()), cfg.se_variant);
    const auto t1 = clock::now();

    const IntervalResult ci = confidence_interval(f.rho_hat, se);
    out.rho_hat = f.rho_hat;
    out.se = se;
    out.covered = (rho >= ci.ci_lo && rho <= ci.ci_hi);
    out.cpu = std::chrono::duration<double>(t1 - t0).count();
    out.ok = std::isfinite(f.rho_hat) && std::isfinite(se);

    if (cfg.bootstrap_B > 0) {
      const auto b0 = clock::now();
      const BootstrapResult bt =
          bootstrap_se(*graph, w, y.y, sp, cfg.bootstrap_B,
                       stream_key(cfg.base_seed, {cell, rep, kStageBootstrap}));
      const auto b1 = clock::now();
      const IntervalResult ci_bt = confidence_interval(f.rho_hat, bt.se_bt);
      out.se_bt = bt.se_bt;
      out.covered_bt = (rho >= ci_bt.ci_lo && rho <= ci_bt.ci_hi);
      out.cpu_bt = std::chrono::duration<double>(b1 - b0).count();
      out.bt_ok = true;
    }
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

CellStats run_cell(const ExperimentConfig& cfg, double rho, int cell_index,
                   const AdjacencyMatrix* fixed_graph,
                   const std::vector<int>* fixed_labels) {
  const int reps = cfg.replications;
  if (reps < 1) throw std::invalid_argument("run_cell: need replications >= 1");
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, reps);
  if (n_threads == 1) {
    for (int m = 0; m < reps; ++m)
      outcomes[m] = run_replication(cfg, rho, cell_index, m, fixed_graph, fixed_labels);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (int m = t; m < reps; m += n_threads)
          outcomes[m] =
              run_replication(cfg, rho, cell_index, m, fixed_graph, fixed_labels);
      });
    }
    for (auto& th : pool) th.join();
  }

  // order-fixed reduction over replication index
  CellStats st;
  st.rho = rho;
  st.has_bootstrap = cfg.bootstrap_B > 0;
  double sum_rho = 0, sum_se = 0, sum_cpu = 0;
  double sum_se_bt = 0, sum_cpu_bt = 0;
  int n_ok = 0, n_cov = 0, n_bt = 0, n_cov_bt = 0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) continue;
    ++n_ok;
    sum_rho += o.rho_hat;
    sum_se += o.se;
    sum_cpu += o.cpu;
    if (o.covered) ++n_cov;
    if (st.has_bootstrap && o.bt_ok) {
      ++n_bt;
      sum_se_bt += o.se_bt;
      sum_cpu_bt += o.cpu_bt;
      if (o.covered_bt) ++n_cov_bt;
    }
  }
  st.n_reps = n_ok;
  st.n_fail = reps - n_ok;
  if (st.n_fail > 0 && st.n_fail * 100 > reps)
    std::fprintf(stderr,
                 "warning: cell rho=%g unreliable, %d of %d replications failed\n", rho,
                 st.n_fail, reps);
  if (n_ok == 0) return st;

  const double mean_rho = sum_rho / n_ok;
  st.bias = mean_rho - rho;
  st.se_hat = sum_se / n_ok;
  double ss = 0;
  for (const RepOutcome& o : outcomes)
    if (o.ok) ss += (o.rho_hat - mean_rho) * (o.rho_hat - mean_rho);
  st.se = std::sqrt(ss / n_ok);
  st.ecp = static_cast<double>(n_cov) / n_ok;
  st.cpu_s = sum_cpu / n_ok;
  if (st.has_bootstrap && n_bt > 0) {
    st.se_bt_hat = sum_se_bt / n_bt;
    st.ecp_bt = static_cast<double>(n_cov_bt) / n_bt;
    st.cpu_bt_s = sum_cpu_bt / n_bt;
  }
  return st;
}

MCReport run_experiment(const ExperimentConfig& cfg) {
  MCReport report;
  report.network = to_string(cfg.network);
  report.method = to_string(cfg.method);
  report.n_blocks = cfg.n_blocks;

  AdjacencyMatrix fixed;
  std::vector<int> fixed_labels;
  const AdjacencyMatrix* graph = nullptr;
  const std::vector<int>* labels = nullptr;
  if (cfg.network == NetworkKind::EdgeList) {
    if (cfg.edgelist_path.empty())
      throw std::invalid_argument("run_experiment: edgelist_path required");
    fixed = load_edge_list_file(cfg.edgelist_path);
    graph = &fixed;
    if (!cfg.labels_path.empty()) {
      fixed_labels = load_labels_file(cfg.labels_path);
      labels = &fixed_labels;
    }
    report.n_nodes = fixed.n_nodes;
  } else {
    if (cfg.n_nodes < 2)
      throw std::invalid_argument("run_experiment: n_nodes required");
    report.n_nodes = cfg.n_nodes;
  }

  for (std::size_t r = 0; r < cfg.rho_grid.size(); ++r)
    report.rows.push_back(
        run_cell(cfg, cfg.rho_grid[r], static_cast<int>(r), graph, labels));
  return report;
}

void write_csv(const MCReport& report, std::ostream& out) {
  const bool bt = !report.rows.empty() && report.rows.front().has_bootstrap;
  out << "network,N,K,method,rho,bias,se_hat,se,ecp,cpu_s,n_fail";
  if (bt) out << ",se_bt_hat,ecp_bt,cpu_bt_s";
  out << "\n";
  char buf[512];
  for (const CellStats& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%d",
                  report.network.c_str(), report.n_nodes, report.n_blocks,
                  report.method.c_str(), row.rho, row.bias, row.se_hat, row.se, row.ecp,
                  row.cpu_s, row.n_fail);
    out << buf;
    if (bt) {
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g", row.se_bt_hat, row.ecp_bt,
                    row.cpu_bt_s);
      out << buf;
    }
    out << "\n";
  }
}

nlohmann::json report_to_json(const MCReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CellStats& r : report.rows) {
    nlohmann::json row{{"rho", r.rho},     {"bias", r.bias},   {"se_hat", r.se_hat},
                       {"se", r.se},       {"ecp", r.ecp},     {"cpu_s", r.cpu_s},
                       {"n_fail", r.n_fail}, {"n_reps", r.n_reps}};
    if (r.has_bootstrap) {
      row["se_bt_hat"] = r.se_bt_hat;
      row["ecp_bt"] = r.ecp_bt;
      row["cpu_bt_s"] = r.cpu_bt_s;
    }
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"network", report.network},
                        {"N", report.n_nodes},
                        {"K", report.n_blocks},
                        {"method", report.method},
                        {"rows", std::move(rows)}};
}

NetworkKind network_kind_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "sbm") return NetworkKind::Sbm;
  if (s == "lsm") return NetworkKind::Lsm;
  if (s == "edgelist" || s == "edge_list") return NetworkKind::EdgeList;
  throw std::invalid_argument("unknown network kind: " + name);
}

std::string to_string(NetworkKind k) {
  switch (k) {
    case NetworkKind::Sbm: return "sbm";
    case NetworkKind::Lsm: return "lsm";
    case NetworkKind::EdgeList: return "edgelist";
  }
  return "?";
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.network = network_kind_from_string(j.value("network", "sbm"));
  cfg.n_nodes = j.value("n_nodes", 0);
  cfg.n_blocks = j.value("n_blocks", 1);
  cfg.lsm_beta = j.value("lsm_beta", 1.0);
  cfg.lsm_alpha_within = j.value("lsm_alpha_within", 5.0);
  cfg.lsm_alpha_between = j.value("lsm_alpha_between", 1.0);
  cfg.edgelist_path = j.value("edgelist_path", "");
  cfg.labels_path = j.value("labels_path", "");
  if (j.contains("rho_grid"))
    cfg.rho_grid = j.at("rho_grid").get<std::vector<double>>();
  cfg.error_dist = error_dist_from_string(j.value("error_dist", "exp"));
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    cfg.method = sampler_method_from_string(s.value("method", "snow"));
    cfg.n_seeds = s.value("n_seeds", 5);
    cfg.k = s.value("k", 5);
    cfg.p_ff = s.value("p_ff", 0.25);
    cfg.p_rw = s.value("p_rw", 0.75);
  }
  cfg.subsample_ratio = j.value("subsample_ratio", 0.01);
  cfg.target_n = j.value("target_n", 0);
  cfg.replications = j.value("replications", 500);
  cfg.base_seed = j.value("base_seed", 0ULL);
  cfg.se_variant = se_variant_from_string(j.value("se_variant", "lemma2"));
  cfg.bootstrap_B = j.value("bootstrap_B", 0);
  cfg.neumann_tol = j.value("neumann_tol", 1e-10);
  cfg.m_cap = j.value("m_cap", 500);
  cfg.threads = j.value("threads", 0);
  for (double rho : cfg.rho_grid)
    if (std::abs(rho) >= 1.0)
      throw std::invalid_argument("experiment config: rho grid outside (-1,1)");
  return cfg;
}

}  // namespace sarnet
