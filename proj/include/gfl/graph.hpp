#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfl {

// Undirected graph over nodes 0..n-1. Edges are stored once in canonical
// (min, max) order; the position of an edge in edges() is its edge index,
// which the ADMM state uses to address slack and dual columns.
class Graph {
 public:
  Graph() = default;

  Graph(int n_nodes, std::vector<std::pair<int, int>> edges)
      : n_nodes_(n_nodes), edges_(std::move(edges)) {
    neighbors_.assign(n_nodes_, {});
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      const auto [i, j] = edges_[e];
      neighbors_[i].push_back(j);
      neighbors_[j].push_back(i);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  }

  int n_nodes() const { return n_nodes_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }

  // Index of the undirected edge {i, j}, or -1 if absent.
  int edge_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(i, j));
    if (it == edges_.end() || *it != std::make_pair(i, j)) return -1;
    return static_cast<int>(it - edges_.begin());
  }

 private:
  int n_nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

// Validates, canonicalizes, and dedupes an edge list.
inline Graph graph_from_edges(int n_nodes, std::vector<std::pair<int, int>> edges) {
  if (n_nodes <= 0) throw std::invalid_argument("graph: n_nodes must be positive");
  for (auto& [i, j] : edges) {
    if (i == j)
      throw std::invalid_argument("graph: self-loop at node " + std::to_string(i));
    if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes)
      throw std::invalid_argument("graph: edge (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") out of range for " +
                                  std::to_string(n_nodes) + " nodes");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph(n_nodes, std::move(edges));
}

// Observed series, one row per node.
class NodeSeries {
 public:
  NodeSeries() = default;

  explicit NodeSeries(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0)
      throw std::invalid_argument("series: empty matrix");
    if (!values_.allFinite())
      throw std::invalid_argument("series: non-finite value");
  }

  int n_nodes() const { return static_cast<int>(values_.rows()); }
  int series_len() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd row(int i) const { return values_.row(i).transpose(); }

 private:
  Eigen::MatrixXd values_;
};

namespace detail {
inline bool near_zero_sd(double sd, double mean) {
  return sd <= 1e-12 * std::max(1.0, std::abs(mean));
}
}  // namespace detail

// Pools positions k*period + v across all nodes and z-scores each of the
// `period` phase groups with its own mean and unbiased standard deviation.
inline NodeSeries standardize_seasonal(const NodeSeries& series, int period) {
  if (period <= 0) throw std::invalid_argument("standardize: period must be positive");
  const Eigen::MatrixXd& y = series.values();
  const int n = static_cast<int>(y.rows());
  const int len = static_cast<int>(y.cols());
  if (period > len)
    throw std::invalid_argument("standardize: period exceeds series length");
  Eigen::MatrixXd out = y;
  for (int v = 0; v < period; ++v) {
    double sum = 0.0, sum2 = 0.0;
    std::int64_t count = 0;
    for (int t = v; t < len; t += period) {
      for (int i = 0; i < n; ++i) {
        sum += y(i, t);
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    for (int t = v; t < len; t += period)
      for (int i = 0; i < n; ++i) sum2 += (y(i, t) - mean) * (y(i, t) - mean);
    if (count < 2)
      throw std::invalid_argument("standardize: phase " + std::to_string(v) +
                                  " has fewer than two observations");
    const double sd = std::sqrt(sum2 / static_cast<double>(count - 1));
    if (detail::near_zero_sd(sd, mean))
      throw std::invalid_argument("standardize: zero variance at phase " +
                                  std::to_string(v));
    for (int t = v; t < len; t += period)
      for (int i = 0; i < n; ++i) out(i, t) = (y(i, t) - mean) / sd;
  }
  return NodeSeries(std::move(out));
}

// Plain z-score over all entries.
inline NodeSeries standardize_zscore(const NodeSeries& series) {
  const Eigen::MatrixXd& y = series.values();
  const double mean = y.mean();
  const auto count = static_cast<std::int64_t>(y.size());
  if (count < 2) throw std::invalid_argument("standardize: fewer than two observations");
  const double ss = (y.array() - mean).square().sum();
  const double sd = std::sqrt(ss / static_cast<double>(count - 1));
  if (detail::near_zero_sd(sd, mean))
    throw std::invalid_argument("standardize: zero variance");
  return NodeSeries(((y.array() - mean) / sd).matrix());
}

}  // namespace gfl
