// Command line front end: synthetic network generation, subnetwork
// sampling, response simulation, estimation, bootstrap, condition
// diagnostics, and the Monte Carlo driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "json.hpp"

#include "sarnet/conditions.hpp"
#include "sarnet/dgp.hpp"
#include "sarnet/harness.hpp"
#include "sarnet/inference.hpp"
#include "sarnet/netgen.hpp"
#include "sarnet/qmle.hpp"
#include "sarnet/rng.hpp"
#include "sarnet/sampler.hpp"
#include "sarnet/selection.hpp"

namespace {

using nlohmann::json;

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

std::vector<double> read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file: " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

std::vector<int> read_node_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open node list file: " + path);
  std::vector<int> v;
  long x;
  while (in >> x) v.push_back(static_cast<int>(x));
  return v;
}

struct SamplerCliOptions {
  std::string method = "snow";
  int n = 0;
  int seeds = 5;
  int k = 5;
  double p_ff = 0.25;
  double p_rw = 0.75;
  std::string labels_path;
  std::uint64_t rng = 0;

  void attach(CLI::App* cmd, bool need_n = true) {
    cmd->add_option("--method", method, "srs|snow|cs|dfs|ff|snowk|rwr|rwj");
    auto* n_opt = cmd->add_option("--n", n, "target subnetwork size");
    if (need_n) n_opt->required();
    cmd->add_option("--seeds", seeds, "seed node count (snow/ff/snowk)");
    cmd->add_option("--k", k, "neighbors per seed (snowk)");
    cmd->add_option("--p-ff", p_ff, "forest fire geometric probability");
    cmd->add_option("--p-rw", p_rw, "random walk follow probability (rwr/rwj)");
    cmd->add_option("--labels", labels_path, "cluster label file (cs)");
    cmd->add_option("--rng", rng, "sampler RNG seed");
  }

  sarnet::SamplerSpec spec(const std::vector<int>& labels) const {
    sarnet::SamplerSpec sp;
    sp.method = sarnet::sampler_method_from_string(method);
    sp.target_n = n;
    sp.n_seeds = seeds;
    sp.k = k;
    sp.p_ff = p_ff;
    sp.p_rw = p_rw;
    if (!labels.empty()) sp.cluster_labels = labels;
    sp.seed = rng;
    return sp;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subnetwork QMLE for spatial autoregressive models"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "generate a synthetic network");
  std::string gen_model = "sbm", gen_out, gen_labels_out;
  int gen_n = 0, gen_k = 1;
  std::uint64_t gen_seed = 0;
  double gen_beta = 1.0, gen_aw = 5.0, gen_ab = 1.0;
  gen->add_option("--model", gen_model, "sbm|lsm")->required();
  gen->add_option("--n-nodes", gen_n, "network size N")->required();
  gen->add_option("--blocks", gen_k, "block/cluster count K")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--beta", gen_beta, "lsm covariate coefficient");
  gen->add_option("--alpha-within", gen_aw, "lsm same-cluster intercept");
  gen->add_option("--alpha-between", gen_ab, "lsm cross-cluster intercept");
  gen->add_option("--out", gen_out, "edge list output path (default stdout)");
  gen->add_option("--labels-out", gen_labels_out, "cluster label sidecar path");
  gen->callback([&] {
    sarnet::SyntheticNetwork net;
    if (gen_model == "sbm") {
      net = sarnet::gen_sbm({gen_n, gen_k, gen_seed});
    } else if (gen_model == "lsm") {
      sarnet::LsmConfig cfg;
      cfg.n_nodes = gen_n;
      cfg.n_blocks = gen_k;
      cfg.beta = gen_beta;
      cfg.alpha_within = gen_aw;
      cfg.alpha_between = gen_ab;
      cfg.seed = gen_seed;
      net = sarnet::gen_lsm(cfg);
    } else {
      throw CLI::ValidationError("--model must be sbm or lsm");
    }
    std::ofstream file;
    sarnet::save_edge_list(net.adjacency, open_out(file, gen_out));
    if (!gen_labels_out.empty()) {
      std::ofstream lf(gen_labels_out);
      if (!lf) throw std::runtime_error("cannot open " + gen_labels_out);
      sarnet::save_labels(net.labels, lf);
    }
  });

  // ---- sample ----
  auto* smp = app.add_subcommand("sample", "draw a subnetwork node set");
  SamplerCliOptions smp_opts;
  std::string smp_graph, smp_out;
  smp->add_option("--graph", smp_graph, "edge list path")->required();
  smp_opts.attach(smp);
  smp->add_option("--out", smp_out, "node list output path (default stdout)");
  smp->callback([&] {
    const auto a = sarnet::load_edge_list_file(smp_graph);
    std::vector<int> labels;
    if (!smp_opts.labels_path.empty())
      labels = sarnet::load_labels_file(smp_opts.labels_path);
    const auto res = sarnet::sample(a, smp_opts.spec(labels));
    if (res.short_sample)
      std::cerr << "warning: graph exhausted, sample is short (" << res.nodes.size()
                << " nodes)\n";
    std::ofstream file;
    auto& out = open_out(file, smp_out);
    for (int v : res.nodes) out << v << '\n';
  });

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate a SAR response vector");
  std::string sim_graph, sim_dist = "norm", sim_out;
  double sim_rho = 0.0, sim_tol = 1e-10;
  int sim_mcap = 500;
  std::uint64_t sim_seed = 0;
  sim->add_option("--graph", sim_graph, "edge list path")->required();
  sim->add_option("--rho", sim_rho, "network effect, |rho| < 1")->required();
  sim->add_option("--dist", sim_dist, "norm|exp");
  sim->add_option("--seed", sim_seed, "error RNG seed");
  sim->add_option("--tol", sim_tol, "Neumann tail tolerance");
  sim->add_option("--m-cap", sim_mcap, "Neumann term cap");
  sim->add_option("--out", sim_out, "response output path (default stdout)");
  sim->callback([&] {
    const auto a = sarnet::load_edge_list_file(sim_graph);
    const auto w = sarnet::row_normalize(a);
    auto rng = sarnet::make_rng(sim_seed);
    const auto errors =
        sarnet::draw_errors(sarnet::error_dist_from_string(sim_dist), a.n_nodes, rng);
    sarnet::DgpConfig cfg;
    cfg.rho = sim_rho;
    cfg.error_dist = sarnet::error_dist_from_string(sim_dist);
    cfg.neumann_tol = sim_tol;
    cfg.m_cap = sim_mcap;
    const auto y = sarnet::gen_response(w, cfg, errors);
    if (y.hit_cap)
      std::cerr << "warning: Neumann cap reached at m=" << y.truncation_m << '\n';
    std::ofstream file;
    auto& out = open_out(file, sim_out);
    char buf[64];
    for (double v : y.y) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", v);
      out << buf;
    }
  });

  // ---- estimate ----
  auto* est = app.add_subcommand("estimate", "fit the subnetwork QMLE");
  std::string est_graph, est_y, est_s1, est_variant = "lemma2";
  bool est_full = false;
  est->add_option("--graph", est_graph, "edge list path")->required();
  est->add_option("--y", est_y, "response file, one value per line")->required();
  est->add_option("--s1", est_s1, "sampled node list file");
  est->add_flag("--full", est_full, "estimate on the entire network");
  est->add_option("--se-variant", est_variant, "lemma2|thm1_literal");
  est->callback([&] {
    const auto a = sarnet::load_edge_list_file(est_graph);
    const auto w = sarnet::row_normalize(a);
    const auto y = read_vector(est_y);
    if (static_cast<int>(y.size()) != a.n_nodes)
      throw std::runtime_error("response length does not match graph size");
    std::vector<int> s1;
    if (est_full) {
      s1.resize(static_cast<std::size_t>(a.n_nodes));
      std::iota(s1.begin(), s1.end(), 0);
    } else {
      if (est_s1.empty()) throw CLI::ValidationError("need --s1 or --full");
      s1 = read_node_list(est_s1);
    }
    const auto sel = sarnet::extract_selection(w, s1);
    Eigen::VectorXd y1(static_cast<Eigen::Index>(sel.nodes.size()));
    for (std::size_t i = 0; i < sel.nodes.size(); ++i) y1[i] = y[sel.nodes[i]];
    const auto f = sarnet::fit(y1, sel.w11);
    const auto ing = sarnet::se_ingredients(f.rho_hat, f.sigma2_hat, y1, sel.w11);
    const double se = sarnet::plugin_se(ing, static_cast<int>(sel.nodes.size()),
                                        sarnet::se_variant_from_string(est_variant));
    const auto ci = sarnet::confidence_interval(f.rho_hat, se);
    json out{{"rho_hat", f.rho_hat},   {"sigma2_hat", f.sigma2_hat},
             {"se", se},               {"ci_lo", ci.ci_lo},
             {"ci_hi", ci.ci_hi},      {"iterations", f.iterations},
             {"converged", f.converged}, {"used_fallback", f.used_fallback}};
    std::cout << out.dump(2) << '\n';
  });

  // ---- bootstrap ----
  auto* bt = app.add_subcommand("bootstrap", "bootstrap SE by repeated sampling");
  SamplerCliOptions bt_opts;
  std::string bt_graph, bt_y;
  int bt_B = 20;
  std::uint64_t bt_seed = 0;
  bt->add_option("--graph", bt_graph, "edge list path")->required();
  bt->add_option("--y", bt_y, "response file")->required();
  bt->add_option("--B", bt_B, "bootstrap replications");
  bt_opts.attach(bt);
  bt->add_option("--seed", bt_seed, "bootstrap seed");
  bt->callback([&] {
    const auto a = sarnet::load_edge_list_file(bt_graph);
    const auto w = sarnet::row_normalize(a);
    const auto y = read_vector(bt_y);
    if (static_cast<int>(y.size()) != a.n_nodes)
      throw std::runtime_error("response length does not match graph size");
    std::vector<int> labels;
    if (!bt_opts.labels_path.empty())
      labels = sarnet::load_labels_file(bt_opts.labels_path);
    const auto res = sarnet::bootstrap_se(a, w, y, bt_opts.spec(labels), bt_B, bt_seed);
    json out{{"se_bt", res.se_bt},
             {"n_success", res.n_success},
             {"n_dropped", res.n_dropped},
             {"estimates", res.estimates}};
    std::cout << out.dump(2) << '\n';
  });

  // ---- verify-conditions ----
  auto* vc = app.add_subcommand("verify-conditions", "Appendix-style diagnostics");
  std::string vc_graph, vc_s1;
  double vc_rho = 0.2;
  vc->add_option("--graph", vc_graph, "edge list path")->required();
  vc->add_option("--s1", vc_s1, "sampled node list file")->required();
  vc->add_option("--rho", vc_rho, "network effect used in Delta1");
  vc->callback([&] {
    const auto a = sarnet::load_edge_list_file(vc_graph);
    const auto w = sarnet::row_normalize(a);
    const auto s1 = read_node_list(vc_s1);
    const auto rep = sarnet::verify_conditions(a, w, s1, vc_rho);
    json out{{"pi_stat", rep.pi_stat},
             {"a_max", rep.a_max},
             {"delta1", rep.delta1},
             {"delta2", rep.delta2},
             {"power_iters", rep.power_iters},
             {"converged", rep.converged},
             {"c_min_approximate", rep.c_min_approximate},
             {"closure_size", rep.closure_size},
             {"n_zero_rows", rep.n_zero_rows}};
    std::cout << out.dump(2) << '\n';
  });

  // ---- mc ----
  auto* mc = app.add_subcommand("mc", "Monte Carlo experiment from a JSON config");
  std::string mc_config, mc_out, mc_format = "csv";
  int mc_threads = -1;
  mc->add_option("--config", mc_config, "experiment config JSON path")->required();
  mc->add_option("--out", mc_out, "report output path (default stdout)");
  mc->add_option("--format", mc_format, "csv|json");
  mc->add_option("--threads", mc_threads, "worker threads (default: config/hardware)");
  mc->callback([&] {
    std::ifstream in(mc_config);
    if (!in) throw std::runtime_error("cannot open config: " + mc_config);
    json j = json::parse(in);
    auto cfg = sarnet::experiment_from_json(j);
    if (mc_threads >= 0) cfg.threads = mc_threads;
    const auto report = sarnet::run_experiment(cfg);
    std::ofstream file;
    auto& out = open_out(file, mc_out);
    if (mc_format == "csv")
      sarnet::write_csv(report, out);
    else if (mc_format == "json")
      out << sarnet::report_to_json(report).dump(2) << '\n';
    else
      throw CLI::ValidationError("--format must be csv or json");
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
