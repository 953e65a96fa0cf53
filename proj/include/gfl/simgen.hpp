#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfl/graph.hpp"
#include "gfl/rng.hpp"

namespace gfl {

struct ScenarioSpec {
  int scenario = 1;  // 1 block graph + AR, 2 grid + AR, 3 block graph + VAR
  int n_nodes = 120;
  int series_len = 100;
  std::uint64_t seed = 0;
  std::vector<int> cluster_sizes;
  std::vector<double> cluster_means;
  std::vector<double> ar_coeffs;   // per-cluster psi
  std::vector<double> noise_vars;  // per-cluster sigma^2
  double p_in = 0.30;
  double p_out = 0.15;
  int grid_rows = 12;  // scenario 2 only
  int grid_cols = 12;
  double var_phi = 0.5;  // scenario 3 only
  double var_rho = 0.3;
  int burn_in = 100;

  void validate() const {
    if (scenario < 1 || scenario > 3)
      throw std::invalid_argument("scenario: id must be 1, 2, or 3");
    if (series_len < 1)
      throw std::invalid_argument("scenario: series length must be >= 1");
    if (cluster_sizes.empty())
      throw std::invalid_argument("scenario: no cluster sizes");
    const int total = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
    if (total != n_nodes)
      throw std::invalid_argument("scenario: cluster sizes sum to " +
                                  std::to_string(total) + ", expected " +
                                  std::to_string(n_nodes));
    for (int sz : cluster_sizes)
      if (sz < 1) throw std::invalid_argument("scenario: empty cluster");
    const auto k = cluster_sizes.size();
    if (cluster_means.size() != k || ar_coeffs.size() != k || noise_vars.size() != k)
      throw std::invalid_argument("scenario: per-cluster parameter count mismatch");
    for (double psi : ar_coeffs)
      if (!(std::abs(psi) < 1.0))
        throw std::invalid_argument("scenario: |ar coefficient| must be < 1");
    for (double v : noise_vars)
      if (!(v > 0.0)) throw std::invalid_argument("scenario: noise variance must be > 0");
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
      throw std::invalid_argument("scenario: edge probabilities must lie in [0, 1]");
    if (scenario == 2 && grid_rows * grid_cols != n_nodes)
      throw std::invalid_argument("scenario: grid does not match node count");
    if (scenario == 3) {
      if (!(std::abs(var_phi) < 1.0))
        throw std::invalid_argument("scenario: |var coefficient| must be < 1");
      if (var_rho < 0.0 || var_rho >= 1.0)
        throw std::invalid_argument("scenario: correlation must lie in [0, 1)");
      if (burn_in < 0) throw std::invalid_argument("scenario: negative burn-in");
    }
  }
};

namespace detail {

// Splits n into parts proportional to the given weights, largest remainders
// rounded up first.
inline std::vector<int> proportional_sizes(int n, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> sizes(weights.size());
  std::vector<std::pair<double, std::size_t>> rema(weights.size());
  int assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double exact = n * weights[k] / total;
    sizes[k] = static_cast<int>(std::floor(exact));
    assigned += sizes[k];
    rema[k] = {exact - std::floor(exact), k};
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r) ++sizes[rema[r].second];
  return sizes;
}

}  // namespace detail

// Fills defaults for one of the three study scenarios. For scenario 2 pass
// the grid shape through n_nodes = rows * cols after setting grid_rows/cols.
inline ScenarioSpec make_scenario(int scenario, int n_nodes, std::uint64_t seed,
                                  int grid_rows = 0, int grid_cols = 0) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  spec.seed = seed;
  if (scenario == 1 || scenario == 3) {
    spec.n_nodes = n_nodes;
    if (n_nodes == 120)
      spec.cluster_sizes = {30, 40, 50};
    else if (n_nodes == 210)
      spec.cluster_sizes = {60, 70, 80};
    else
      spec.cluster_sizes = detail::proportional_sizes(n_nodes, {3, 4, 5});
    spec.cluster_means = {-1.0, 0.0, 1.0};
    spec.ar_coeffs = {0.5, 0.5, 0.5};
    spec.noise_vars = {1.0, 1.0, 1.0};
  } else if (scenario == 2) {
    spec.grid_rows = grid_rows > 0 ? grid_rows : 12;
    spec.grid_cols = grid_cols > 0 ? grid_cols : spec.grid_rows;
    spec.n_nodes = spec.grid_rows * spec.grid_cols;
    if (n_nodes > 0 && n_nodes != spec.n_nodes)
      throw std::invalid_argument("scenario: node count conflicts with grid shape");
    if (spec.grid_rows == 12 && spec.grid_cols == 12)
      spec.cluster_sizes = {25, 30, 42, 47};
    else if (spec.grid_rows == 14 && spec.grid_cols == 14)
      spec.cluster_sizes = {35, 40, 42, 79};
    else
      spec.cluster_sizes =
          detail::proportional_sizes(spec.n_nodes, {25, 30, 42, 47});
    spec.cluster_means = {-0.8, 0.0, 0.8, 1.6};
    spec.ar_coeffs = {0.5, 0.5, 0.5, 0.5};
    spec.noise_vars = {1.0, 1.0, 1.0, 1.0};
  } else {
    throw std::invalid_argument("scenario: id must be 1, 2, or 3");
  }
  spec.validate();
  return spec;
}

// Stochastic block graph: nodes in contiguous label blocks, each unordered
// pair connected with probability p_in inside a block and p_out across.
inline std::pair<Graph, std::vector<int>> gen_block_graph(
    const std::vector<int>& cluster_sizes, double p_in, double p_out,
    std::uint64_t seed) {
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
    throw std::invalid_argument("block graph: need 0 <= p_out <= p_in <= 1");
  std::vector<int> labels;
  for (std::size_t k = 0; k < cluster_sizes.size(); ++k)
    labels.insert(labels.end(), cluster_sizes[k], static_cast<int>(k));
  const int n = static_cast<int>(labels.size());
  RngStream rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  return {graph_from_edges(n, std::move(edges)), std::move(labels)};
}

// 4-neighbor lattice with quadrant labels: node r*cols + c gets label 0
// (top left), 1 (top right), 2 (bottom left), or 3 (bottom right) according
// to the split lines.
inline std::pair<Graph, std::vector<int>> gen_grid_graph(int rows, int cols,
                                                         int row_split,
                                                         int col_split) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid: empty grid");
  if (row_split <= 0 || row_split >= rows || col_split <= 0 || col_split >= cols)
    throw std::invalid_argument("grid: split lines must fall inside the grid");
  std::vector<std::pair<int, int>> edges;
  std::vector<int> labels(rows * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(id, id + 1);
      if (r + 1 < rows) edges.emplace_back(id, id + cols);
      labels[id] = (r < row_split ? 0 : 2) + (c < col_split ? 0 : 1);
    }
  return {graph_from_edges(rows * cols, std::move(edges)), std::move(labels)};
}

// Partitions a grid into four connected corner regions with exact sizes.
// The four quotas anchor to the top-left, top-right, bottom-left, and
// bottom-right corners. Regions grow one cell at a time: the cluster with
// the most cells still to claim (ties to the lower index) takes the
// unassigned frontier cell closest to its corner. A cluster whose frontier
// is exhausted claims the closest unassigned cell outright, which keeps the
// quotas exact in every case.
inline std::vector<int> grid_region_labels(int rows, int cols,
                                           const std::vector<int>& quotas) {
  if (quotas.size() != 4)
    throw std::invalid_argument("grid regions: exactly four region sizes required");
  if (std::accumulate(quotas.begin(), quotas.end(), 0) != rows * cols)
    throw std::invalid_argument("grid regions: sizes must cover the grid");
  const std::pair<int, int> corners[4] = {
      {0, 0}, {0, cols - 1}, {rows - 1, 0}, {rows - 1, cols - 1}};
  std::vector<int> labels(rows * cols, -1);
  std::vector<int> remaining = quotas;

  auto corner_dist = [&](int k, int id) {
    const double dr = static_cast<double>(id / cols - corners[k].first);
    const double dc = static_cast<double>(id % cols - corners[k].second);
    return dr * dr + dc * dc;
  };

  for (int filled = 0; filled < rows * cols; ++filled) {
    int k = 0;
    for (int c = 1; c < 4; ++c)
      if (remaining[c] > remaining[k]) k = c;

    int chosen = -1;
    double chosen_dist = std::numeric_limits<double>::infinity();
    bool frontier_only = false;
    for (int id = 0; id < rows * cols; ++id) {
      if (labels[id] != -1) continue;
      const int r = id / cols, c = id % cols;
      const bool frontier =
          (r > 0 && labels[id - cols] == k) || (r + 1 < rows && labels[id + cols] == k) ||
          (c > 0 && labels[id - 1] == k) || (c + 1 < cols && labels[id + 1] == k) ||
          (id == corners[k].first * cols + corners[k].second);
      if (frontier && !frontier_only) {
        frontier_only = true;
        chosen = -1;
        chosen_dist = std::numeric_limits<double>::infinity();
      }
      if (frontier_only && !frontier) continue;
      const double dist = corner_dist(k, id);
      if (dist < chosen_dist) {
        chosen_dist = dist;
        chosen = id;
      }
    }
    labels[chosen] = k;
    --remaining[k];
  }
  return labels;
}

// Cluster-specific AR(1) series, one independent series per node, first
// observation drawn from the stationary law N(mean, var / (1 - psi^2)).
inline NodeSeries gen_ar_series(const std::vector<int>& labels,
                                const std::vector<double>& means,
                                const std::vector<double>& psis,
                                const std::vector<double>& noise_vars, int n,
                                std::uint64_t seed) {
  const int n_nodes = static_cast<int>(labels.size());
  if (n_nodes == 0) throw std::invalid_argument("ar series: no nodes");
  if (n < 1) throw std::invalid_argument("ar series: length must be >= 1");
  for (int lab : labels)
    if (lab < 0 || lab >= static_cast<int>(means.size()) ||
        means.size() != psis.size() || means.size() != noise_vars.size())
      throw std::invalid_argument("ar series: label outside parameter range");
  for (double psi : psis)
    if (!(std::abs(psi) < 1.0))
      throw std::invalid_argument("ar series: nonstationary coefficient");

  Eigen::MatrixXd y(n_nodes, n);
  for (int i = 0; i < n_nodes; ++i) {
    const int k = labels[i];
    const double sd = std::sqrt(noise_vars[k]);
    RngStream rng(seed, RngStream::Id{i, 0, 0});
    y(i, 0) = means[k] + sd / std::sqrt(1.0 - psis[k] * psis[k]) * rng.normal();
    for (int t = 1; t < n; ++t)
      y(i, t) = means[k] + psis[k] * (y(i, t - 1) - means[k]) + sd * rng.normal();
  }
  return NodeSeries(std::move(y));
}

// One draw of the equicorrelated innovation: unit variance per node,
// correlation rho between nodes of the same cluster, zero across clusters.
// Shared factors are drawn in cluster order, then node noise in node order.
inline Eigen::VectorXd equicorr_noise(const std::vector<int>& labels,
                                      int n_clusters, double rho,
                                      RngStream& rng) {
  Eigen::VectorXd shared(n_clusters);
  for (int k = 0; k < n_clusters; ++k) shared(k) = rng.normal();
  const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  Eigen::VectorXd xi(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    xi(i) = a * shared(labels[i]) + b * rng.normal();
  return xi;
}

// Cluster-coupled VAR(1): Y_t = beta + phi (Y_{t-1} - beta) + xi_t with
// equicorrelated innovations, started at zero and burned in.
inline NodeSeries gen_var_series(const std::vector<int>& labels,
                                 const std::vector<double>& means,
                                 double phi, double rho, int n, int burn_in,
                                 std::uint64_t seed) {
  const int n_nodes = static_cast<int>(labels.size());
  if (n_nodes == 0) throw std::invalid_argument("var series: no nodes");
  if (n < 1) throw std::invalid_argument("var series: length must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("var series: negative burn-in");
  if (!(std::abs(phi) < 1.0))
    throw std::invalid_argument("var series: nonstationary coefficient");
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("var series: correlation must lie in [0, 1)");
  int n_clusters = 0;
  for (int lab : labels) {
    if (lab < 0 || lab >= static_cast<int>(means.size()))
      throw std::invalid_argument("var series: label outside parameter range");
    n_clusters = std::max(n_clusters, lab + 1);
  }

  Eigen::VectorXd beta(n_nodes);
  for (int i = 0; i < n_nodes; ++i) beta(i) = means[labels[i]];

  RngStream rng(seed);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(n_nodes);
  Eigen::MatrixXd y(n_nodes, n);
  for (int t = 0; t < burn_in + n; ++t) {
    state = beta + phi * (state - beta) + equicorr_noise(labels, n_clusters, rho, rng);
    if (t >= burn_in) y.col(t - burn_in) = state;
  }
  return NodeSeries(std::move(y));
}

struct ScenarioData {
  Graph graph;
  NodeSeries series;
  std::vector<int> labels;
};

inline ScenarioData run_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const std::uint64_t graph_seed = derive_seed(spec.seed, 101);
  const std::uint64_t series_seed = derive_seed(spec.seed, 102);
  ScenarioData data;
  if (spec.scenario == 2) {
    data.labels = grid_region_labels(spec.grid_rows, spec.grid_cols, spec.cluster_sizes);
    auto [graph, ignored] = gen_grid_graph(spec.grid_rows, spec.grid_cols,
                                           spec.grid_rows / 2, spec.grid_cols / 2);
    (void)ignored;
    data.graph = std::move(graph);
  } else {
    auto [graph, labels] =
        gen_block_graph(spec.cluster_sizes, spec.p_in, spec.p_out, graph_seed);
    data.graph = std::move(graph);
    data.labels = std::move(labels);
  }
  if (spec.scenario == 3) {
    data.series = gen_var_series(data.labels, spec.cluster_means, spec.var_phi,
                                 spec.var_rho, spec.series_len, spec.burn_in,
                                 series_seed);
  } else {
    data.series = gen_ar_series(data.labels, spec.cluster_means, spec.ar_coeffs,
                                spec.noise_vars, spec.series_len, series_seed);
  }
  return data;
}

}  // namespace gfl
