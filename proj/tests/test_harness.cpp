#include <sstream>
#include <fstream>
#include <cstdio>

#include "doctest.h"
#include "sarnet/harness.hpp"
#include "test_util.hpp"

using namespace sarnet;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.network = NetworkKind::Sbm;
  cfg.n_nodes = 400;
  cfg.n_blocks = 20;
  cfg.rho_grid = {0.0, 0.2};
  cfg.error_dist = ErrorDist::Exp;
  cfg.method = SamplerMethod::SNOW;
  cfg.subsample_ratio = 0.1;
  cfg.replications = 12;
  cfg.base_seed = 99;
  cfg.threads = 1;
  return cfg;
}

bool rows_equal(const MCReport& a, const MCReport& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.rho != y.rho || x.bias != y.bias || x.se_hat != y.se_hat || x.se != y.se ||
        x.ecp != y.ecp || x.n_fail != y.n_fail)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("experiment is reproducible bit for bit") {
  const auto cfg = small_config();
  const auto r1 = run_experiment(cfg);
  const auto r2 = run_experiment(cfg);
  CHECK(rows_equal(r1, r2));
  CHECK(r1.rows.size() == 2);
  for (const auto& row : r1.rows) CHECK(row.n_fail == 0);
}

TEST_CASE("thread count does not change the report") {
  auto cfg = small_config();
  cfg.threads = 1;
  const auto r1 = run_experiment(cfg);
  cfg.threads = 3;
  const auto r3 = run_experiment(cfg);
  CHECK(rows_equal(r1, r3));
}

TEST_CASE("single deterministic replication row") {
  auto cfg = small_config();
  cfg.rho_grid = {0.0};
  cfg.replications = 1;
  const auto r = run_experiment(cfg);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].n_reps == 1);
  CHECK(r.rows[0].se == 0.0);  // one draw has no spread
  CHECK((r.rows[0].ecp == 0.0 || r.rows[0].ecp == 1.0));
}

TEST_CASE("csv layout") {
  MCReport empty;
  empty.network = "sbm";
  empty.n_nodes = 10;
  empty.n_blocks = 2;
  empty.method = "snow";
  std::ostringstream out;
  write_csv(empty, out);
  CHECK(out.str() == "network,N,K,method,rho,bias,se_hat,se,ecp,cpu_s,n_fail\n");

  MCReport one = empty;
  CellStats row;
  row.rho = 0.2;
  row.bias = -0.005;
  row.se_hat = 0.121;
  row.se = 0.12;
  row.ecp = 0.94;
  row.cpu_s = 0.01;
  row.n_fail = 0;
  one.rows.push_back(row);
  std::ostringstream out2;
  write_csv(one, out2);
  CHECK(out2.str() ==
        "network,N,K,method,rho,bias,se_hat,se,ecp,cpu_s,n_fail\n"
        "sbm,10,2,snow,0.2,-0.005,0.121,0.12,0.94,0.01,0\n");
}

TEST_CASE("json report round trips") {
  auto cfg = small_config();
  cfg.replications = 4;
  const auto r = run_experiment(cfg);
  const auto j = report_to_json(r);
  const auto parsed = nlohmann::json::parse(j.dump());
  CHECK(parsed == j);
  CHECK(parsed.at("rows").size() == r.rows.size());
  CHECK(parsed.at("rows")[0].at("bias").get<double>() == r.rows[0].bias);
}

TEST_CASE("experiment config json parsing") {
  const auto j = nlohmann::json::parse(R"({
    "network": "sbm", "n_nodes": 1000, "n_blocks": 50,
    "rho_grid": [0, 0.2, 0.4, 0.6], "error_dist": "exp",
    "sampler": {"method": "snow", "n_seeds": 5},
    "subsample_ratio": 0.01, "replications": 7, "base_seed": 42
  })");
  const auto cfg = experiment_from_json(j);
  CHECK(cfg.n_nodes == 1000);
  CHECK(cfg.n_blocks == 50);
  CHECK(cfg.rho_grid == std::vector<double>{0, 0.2, 0.4, 0.6});
  CHECK(cfg.method == SamplerMethod::SNOW);
  CHECK(cfg.replications == 7);
  CHECK(cfg.base_seed == 42);

  auto bad = j;
  bad["rho_grid"] = {1.5};
  CHECK_THROWS_AS(static_cast<void>(experiment_from_json(bad)),
                  std::invalid_argument);
}

TEST_CASE("edgelist cells reuse the fixed network") {
  // write a small graph to disk, run an edgelist experiment on it
  const auto a = test_util::make_connected_graph(300, 0.02, 5);
  const std::string path = "test_harness_graph.tsv";
  {
    std::ofstream out(path);
    save_edge_list(a, out);
  }
  ExperimentConfig cfg;
  cfg.network = NetworkKind::EdgeList;
  cfg.edgelist_path = path;
  cfg.rho_grid = {0.2};
  cfg.method = SamplerMethod::SNOW;
  cfg.subsample_ratio = 0.1;
  cfg.replications = 6;
  cfg.base_seed = 3;
  cfg.threads = 1;
  const auto r = run_experiment(cfg);
  CHECK(r.n_nodes == 300);
  CHECK(r.rows[0].n_reps == 6);
  std::remove(path.c_str());
}

TEST_CASE("single-instance fit lands in the coarse error band") {
  // one SBM replication at rho = 0.2 stays within +-0.4 of the truth
  auto cfg = small_config();
  cfg.n_nodes = 10000;
  cfg.n_blocks = 1000;
  cfg.subsample_ratio = 0.01;
  cfg.rho_grid = {0.2};
  cfg.replications = 1;
  const auto r = run_experiment(cfg);
  REQUIRE(r.rows[0].n_reps == 1);
  CHECK(std::abs(r.rows[0].bias) <= 0.4);
}

TEST_CASE("bootstrap columns appear when enabled") {
  auto cfg = small_config();
  cfg.rho_grid = {0.2};
  cfg.replications = 5;
  cfg.bootstrap_B = 5;
  const auto r = run_experiment(cfg);
  REQUIRE(r.rows[0].has_bootstrap);
  CHECK(r.rows[0].se_bt_hat > 0.0);
  std::ostringstream out;
  write_csv(r, out);
  CHECK(out.str().find("se_bt_hat,ecp_bt,cpu_bt_s") != std::string::npos);
}
