#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfl/errors.hpp"
#include "gfl/rng.hpp"

namespace gfl {

struct ClusterResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0.0;
  double silhouette = 0.0;
};

// Mean silhouette over all points: (d_out - d_in) / max(d_in, d_out), where
// d_in is the mean distance to the other members of the point's own cluster
// and d_out the smallest mean distance to any other cluster. Points in
// singleton clusters contribute 0.
inline double silhouette(const Eigen::MatrixXd& points,
                         const std::vector<int>& labels) {
  const int n = static_cast<int>(points.rows());
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("silhouette: label count mismatch");
  int k = 0;
  for (int lab : labels) {
    if (lab < 0) throw std::invalid_argument("silhouette: negative label");
    k = std::max(k, lab + 1);
  }
  std::vector<int> sizes(k, 0);
  for (int lab : labels) ++sizes[lab];
  int populated = 0;
  for (int c = 0; c < k; ++c) populated += sizes[c] > 0 ? 1 : 0;
  if (populated < 2)
    throw std::invalid_argument("silhouette: needs at least two clusters");

  double total = 0.0;
  std::vector<double> cluster_dist(k);
  for (int i = 0; i < n; ++i) {
    std::fill(cluster_dist.begin(), cluster_dist.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cluster_dist[labels[j]] += (points.row(i) - points.row(j)).norm();
    }
    const int own = labels[i];
    if (sizes[own] < 2) continue;  // singleton contributes 0
    const double d_in = cluster_dist[own] / static_cast<double>(sizes[own] - 1);
    double d_out = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      d_out = std::min(d_out, cluster_dist[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(d_in, d_out);
    if (denom > 0.0) total += (d_out - d_in) / denom;
  }
  return total / static_cast<double>(n);
}

namespace detail {

inline double assign_labels(const Eigen::MatrixXd& points,
                            const Eigen::MatrixXd& centroids,
                            std::vector<int>& labels) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(centroids.rows());
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double dist = (points.row(i) - centroids.row(c)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

// k-means++ seeding: first centroid uniform, the rest proportional to the
// squared distance from the nearest chosen centroid.
inline Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, int k,
                                      RngStream& rng) {
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd centroids(k, points.cols());
  centroids.row(0) = points.row(rng.uniform_int(n));
  Eigen::VectorXd d2(n);
  for (int i = 0; i < n; ++i)
    d2(i) = (points.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int chosen;
    if (total <= 0.0) {
      chosen = static_cast<int>(rng.uniform_int(n));  // all mass on chosen points
    } else {
      double target = rng.uniform() * total;
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        target -= d2(i);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = points.row(chosen);
    for (int i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (points.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs by
// inertia. Emptied clusters are reseeded at the point farthest from its
// assigned centroid.
inline ClusterResult kmeans(const Eigen::MatrixXd& points, int k, int restarts,
                            std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (k < 2) throw std::invalid_argument("kmeans: k must be >= 2");
  if (k > n)
    throw std::invalid_argument("kmeans: k (" + std::to_string(k) +
                                ") exceeds point count (" + std::to_string(n) + ")");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  ClusterResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    RngStream rng(seed, RngStream::Id{0, 0, r});
    Eigen::MatrixXd centroids = detail::seed_centroids(points, k, rng);
    std::vector<int> labels(n, -1);
    double inertia = detail::assign_labels(points, centroids, labels);

    for (int iter = 0; iter < 300; ++iter) {
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<int> counts(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        } else {
          // Reseed an emptied cluster at the globally worst-fit point.
          int farthest = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double dist = (points.row(i) - centroids.row(labels[i])).squaredNorm();
            if (dist > far_d) {
              far_d = dist;
              farthest = i;
            }
          }
          centroids.row(c) = points.row(farthest);
        }
      }

      std::vector<int> new_labels(n, -1);
      const double new_inertia = detail::assign_labels(points, centroids, new_labels);
      if (new_inertia > inertia + 1e-9 * (1.0 + inertia))
        throw numeric_error("kmeans: inertia increased during Lloyd iteration");
      const bool stable = new_labels == labels;
      labels = std::move(new_labels);
      inertia = new_inertia;
      if (stable) break;
    }

    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centroids = std::move(centroids);
      best.inertia = inertia;
    }
  }

  best.silhouette = silhouette(points, best.labels);
  return best;
}

// Runs kmeans for k = 2..k_max and keeps the highest silhouette; ties go to
// the smaller k.
inline ClusterResult select_k(const Eigen::MatrixXd& points, int k_max,
                              int restarts, std::uint64_t seed,
                              std::vector<std::pair<int, double>>* table = nullptr) {
  if (k_max < 2) throw std::invalid_argument("select_k: k_max must be >= 2");
  if (k_max > points.rows())
    throw std::invalid_argument("select_k: k_max exceeds point count");
  ClusterResult best;
  bool have = false;
  for (int k = 2; k <= k_max; ++k) {
    ClusterResult res = kmeans(points, k, restarts, seed);
    if (table) table->emplace_back(k, res.silhouette);
    if (!have || res.silhouette > best.silhouette) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

}  // namespace gfl
