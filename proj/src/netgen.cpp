#include "sarnet/netgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sarnet/rng.hpp"

namespace sarnet {

namespace {

constexpr std::uint64_t kMembershipStream = 0x6d656d62;  // membership draws
constexpr std::uint64_t kRowStream = 0x726f7773;         // per-row edge draws
constexpr std::uint64_t kLatentStream = 0x6c61746e;      // latent positions

// Geometric skip: number of failures before the first success of a
// Bernoulli(p) sweep. Advancing by skip()+1 visits exactly the success
// positions of the sweep.
std::int64_t geometric_skip(std::mt19937_64& rng, double log1mp) {
  const double u = std::uniform_real_distribution<double>(
      std::numeric_limits<double>::min(), 1.0)(rng);
  const double k = std::floor(std::log(u) / log1mp);
  if (k > 4.6e18) return std::numeric_limits<std::int64_t>::max() / 4;
  return static_cast<std::int64_t>(k);
}

// Bernoulli(p) sweep over members[], appending hits (minus self) to out.
void sweep_members(const std::vector<int>& members, double p, int self,
                   std::mt19937_64& rng, std::vector<int>& out) {
  if (p <= 0.0 || members.empty()) return;
  if (p >= 1.0) {
    for (int j : members)
      if (j != self) out.push_back(j);
    return;
  }
  const double log1mp = std::log1p(-p);
  std::int64_t pos = geometric_skip(rng, log1mp);
  while (pos < static_cast<std::int64_t>(members.size())) {
    const int j = members[static_cast<std::size_t>(pos)];
    if (j != self) out.push_back(j);
    pos += 1 + geometric_skip(rng, log1mp);
  }
}

std::vector<int> draw_memberships(int n, int k, std::uint64_t seed) {
  auto rng = make_rng(seed, {kMembershipStream});
  std::uniform_int_distribution<int> block(1, k);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& c : labels) c = block(rng);
  return labels;
}

std::vector<std::vector<int>> group_by_label(const std::vector<int>& labels, int k) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    members[labels[i]].push_back(i);
  return members;
}

AdjacencyMatrix rows_to_csr(int n, std::vector<std::vector<int>>& rows) {
  AdjacencyMatrix a;
  a.n_nodes = n;
  a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  std::int64_t nnz = 0;
  for (int i = 0; i < n; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    nnz += static_cast<std::int64_t>(rows[i].size());
    a.row_ptr[i + 1] = nnz;
  }
  a.col_idx.reserve(static_cast<std::size_t>(nnz));
  for (int i = 0; i < n; ++i)
    a.col_idx.insert(a.col_idx.end(), rows[i].begin(), rows[i].end());
  return a;
}

// 20-point Gauss-Hermite rule (physicists' convention, weight e^{-x^2}).
constexpr std::array<double, 20> kGhNodes = {
    -5.38748089001123276e+00, -4.60368244955074424e+00, -3.94476404011562520e+00,
    -3.34785456738321630e+00, -2.78880605842813045e+00, -2.25497400208927568e+00,
    -1.73853771211658614e+00, -1.23407621539532308e+00, -7.37473728545394391e-01,
    -2.45340708300901239e-01, 2.45340708300901239e-01,  7.37473728545394391e-01,
    1.23407621539532308e+00,  1.73853771211658614e+00,  2.25497400208927568e+00,
    2.78880605842813045e+00,  3.34785456738321630e+00,  3.94476404011562520e+00,
    4.60368244955074424e+00,  5.38748089001123276e+00};
constexpr std::array<double, 20> kGhWeights = {
    2.22939364553414471e-13, 4.39934099227317473e-10, 1.08606937076927821e-07,
    7.80255647853205987e-06, 2.28338636016353646e-04, 3.24377334223785669e-03,
    2.48105208874636433e-02, 1.09017206020023294e-01, 2.86675505362834149e-01,
    4.62243669600610085e-01, 4.62243669600610085e-01, 2.86675505362834149e-01,
    1.09017206020023294e-01, 2.48105208874636433e-02, 3.24377334223785669e-03,
    2.28338636016353646e-04, 7.80255647853205987e-06, 1.08606937076927821e-07,
    4.39934099227317473e-10, 2.22939364553414471e-13};
constexpr double kInvSqrtPi = 0.564189583547756287;
constexpr double kSqrt2 = 1.41421356237309505;

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

SbmTierRates sbm_tier_rates(int n_nodes) {
  const double n = static_cast<double>(n_nodes);
  return {0.2, 0.2 / std::sqrt(n), 0.2 / n};
}

SyntheticNetwork gen_sbm(const SbmConfig& cfg) {
  if (cfg.n_nodes < 2) throw std::invalid_argument("gen_sbm: need n_nodes >= 2");
  if (cfg.n_blocks < 1) throw std::invalid_argument("gen_sbm: need n_blocks >= 1");
  const int n = cfg.n_nodes;
  const int k = cfg.n_blocks;
  const auto rates = sbm_tier_rates(n);

  std::vector<int> labels = draw_memberships(n, k, cfg.seed);
  const auto members = group_by_label(labels, k);

  const bool far_possible = rates.far > 0.0 && k > 1;
  const double log1mp_far = far_possible ? std::log1p(-rates.far) : 0.0;

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto rng = make_rng(cfg.seed, {kRowStream, static_cast<std::uint64_t>(i)});
    const int b = labels[i];
    sweep_members(members[b], rates.same_block, i, rng, rows[i]);
    if (b - 1 >= 1) sweep_members(members[b - 1], rates.adjacent_block, i, rng, rows[i]);
    if (b + 1 <= k) sweep_members(members[b + 1], rates.adjacent_block, i, rng, rows[i]);
    if (far_possible) {
      // sweep all node ids, rejecting the three near blocks handled above
      std::int64_t pos = geometric_skip(rng, log1mp_far);
      while (pos < n) {
        const int j = static_cast<int>(pos);
        if (std::abs(labels[j] - b) > 1) rows[i].push_back(j);
        pos += 1 + geometric_skip(rng, log1mp_far);
      }
    }
  }

  SyntheticNetwork net;
  net.adjacency = rows_to_csr(n, rows);
  net.labels = std::move(labels);
  return net;
}

double lsm_marginal_link_probability(double alpha, double beta, double scaled_gap) {
  const double u = alpha - scaled_gap;
  double acc = 0.0;
  for (std::size_t q = 0; q < kGhNodes.size(); ++q)
    acc += kGhWeights[q] * logistic(u + beta * kSqrt2 * kGhNodes[q]);
  return acc * kInvSqrtPi;
}

double lsm_link_probability(const LsmConfig& cfg, bool same_cluster, double x,
                            double latent_gap) {
  const double alpha = same_cluster ? cfg.alpha_within : cfg.alpha_between;
  const double scale = static_cast<double>(cfg.n_nodes) / cfg.n_blocks;
  return logistic(alpha + cfg.beta * x - scale * latent_gap);
}

AdjacencyMatrix gen_lsm_edges(const LsmConfig& cfg, std::span<const int> labels,
                              std::span<const double> z, std::uint64_t seed) {
  const int n = cfg.n_nodes;
  const int k = cfg.n_blocks;
  if (static_cast<int>(labels.size()) != n || static_cast<int>(z.size()) != n)
    throw std::invalid_argument("gen_lsm_edges: labels/z length mismatch");
  const double scale = static_cast<double>(n) / k;
  const auto members =
      group_by_label(std::vector<int>(labels.begin(), labels.end()), k);

  // Z-range per cluster, for envelope bounds on the latent distance.
  std::vector<double> zmin(static_cast<std::size_t>(k) + 1,
                           std::numeric_limits<double>::infinity());
  std::vector<double> zmax(static_cast<std::size_t>(k) + 1,
                           -std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    zmin[labels[i]] = std::min(zmin[labels[i]], z[i]);
    zmax[labels[i]] = std::max(zmax[labels[i]], z[i]);
  }

  const double half_beta_sq = 0.5 * cfg.beta * cfg.beta;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto rng = make_rng(seed, {kRowStream, static_cast<std::uint64_t>(i)});
    const int b = labels[i];
    for (int c = 1; c <= k; ++c) {
      if (members[c].empty()) continue;
      const double alpha = (c == b) ? cfg.alpha_within : cfg.alpha_between;
      double gap_min = 0.0;
      if (z[i] < zmin[c])
        gap_min = zmin[c] - z[i];
      else if (z[i] > zmax[c])
        gap_min = z[i] - zmax[c];
      const double envelope = std::exp(alpha + half_beta_sq - scale * gap_min);
      if (envelope >= 0.999) {
        // dense regime: draw the covariate pair by pair
        for (int j : members[c]) {
          if (j == i) continue;
          const double x = gauss(rng);
          const double p = logistic(alpha + cfg.beta * x - scale * std::abs(z[i] - z[j]));
          if (unif(rng) < p) rows[i].push_back(j);
        }
      } else {
        // thin regime: envelope sweep, then exact acceptance with the
        // covariate integrated out
        const double log1mq = std::log1p(-envelope);
        std::int64_t pos = geometric_skip(rng, log1mq);
        while (pos < static_cast<std::int64_t>(members[c].size())) {
          const int j = members[c][static_cast<std::size_t>(pos)];
          if (j != i) {
            const double m = lsm_marginal_link_probability(
                alpha, cfg.beta, scale * std::abs(z[i] - z[j]));
            if (unif(rng) * envelope < m) rows[i].push_back(j);
          }
          pos += 1 + geometric_skip(rng, log1mq);
        }
      }
    }
  }
  return rows_to_csr(n, rows);
}

SyntheticNetwork gen_lsm(const LsmConfig& cfg) {
  if (cfg.n_nodes < 2) throw std::invalid_argument("gen_lsm: need n_nodes >= 2");
  if (cfg.n_blocks < 1) throw std::invalid_argument("gen_lsm: need n_blocks >= 1");
  const int n = cfg.n_nodes;
  std::vector<int> labels = draw_memberships(n, cfg.n_blocks, cfg.seed);
  std::vector<double> z(static_cast<std::size_t>(n));
  {
    auto rng = make_rng(cfg.seed, {kLatentStream});
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) z[i] = 2.0 * labels[i] + gauss(rng);
  }
  SyntheticNetwork net;
  net.adjacency = gen_lsm_edges(cfg, labels, z, cfg.seed);
  net.labels = std::move(labels);
  return net;
}

void save_labels(const std::vector<int>& labels, std::ostream& out) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << i << '\t' << labels[i] << '\n';
}

std::vector<int> load_labels(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long node = 0, cluster = 0;
    if (!(ls >> node >> cluster) || node < 0)
      throw std::runtime_error("label file line " + std::to_string(lineno) +
                               ": expected \"node<TAB>cluster\"");
    if (node >= static_cast<long>(labels.size()))
      labels.resize(static_cast<std::size_t>(node) + 1, 0);
    labels[static_cast<std::size_t>(node)] = static_cast<int>(cluster);
  }
  return labels;
}

std::vector<int> load_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  return load_labels(in);
}

}  // namespace sarnet
