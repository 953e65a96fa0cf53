#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gfl {

// Cross-tabulation of two labelings over the same items. Label values are
// re-indexed densely in order of first appearance.
struct ContingencyTable {
  std::vector<std::vector<long long>> counts;  // true class x predicted cluster
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;
  long long total = 0;
};

inline ContingencyTable contingency(const std::vector<int>& true_labels,
                                    const std::vector<int>& pred_labels) {
  if (true_labels.size() != pred_labels.size())
    throw std::invalid_argument("contingency: label lengths differ");
  if (true_labels.empty())
    throw std::invalid_argument("contingency: empty labels");
  std::unordered_map<int, int> row_of, col_of;
  std::vector<std::pair<int, int>> cells(true_labels.size());
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int row =
        row_of.try_emplace(true_labels[i], static_cast<int>(row_of.size()))
            .first->second;
    const int col =
        col_of.try_emplace(pred_labels[i], static_cast<int>(col_of.size()))
            .first->second;
    cells[i] = {row, col};
  }
  ContingencyTable t;
  t.counts.assign(row_of.size(), std::vector<long long>(col_of.size(), 0));
  for (const auto& [r, c] : cells) ++t.counts[r][c];
  t.row_sums.assign(row_of.size(), 0);
  t.col_sums.assign(col_of.size(), 0);
  for (std::size_t r = 0; r < t.counts.size(); ++r)
    for (std::size_t c = 0; c < t.counts[r].size(); ++c) {
      t.row_sums[r] += t.counts[r][c];
      t.col_sums[c] += t.counts[r][c];
      t.total += t.counts[r][c];
    }
  return t;
}

namespace detail {

inline double entropy(const std::vector<long long>& marginal, long long total) {
  double h = 0.0;
  for (long long m : marginal) {
    if (m == 0) continue;
    const double p = static_cast<double>(m) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

inline double choose2(long long m) {
  return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
}

// Minimum-cost perfect assignment on a square matrix (Hungarian algorithm,
// potentials formulation, O(n^3)). Returns the column matched to each row.
inline std::vector<int> min_cost_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1) match[p[j] - 1] = j - 1;
  return match;
}

}  // namespace detail

struct ClusteringScores {
  double nmi = 0.0;
  double ari = 0.0;      // clamped to [0, 1] for reporting
  double ari_raw = 0.0;  // can be negative
  double acc = 0.0;
  double hom = 0.0;
  double com = 0.0;
  double pur = 0.0;
};

// The six agreement scores between a reference labeling and a predicted one.
// NMI uses natural logs with the geometric-mean normalizer; ACC maximizes the
// matched fraction over one-to-one cluster-class assignments.
inline ClusteringScores evaluate(const std::vector<int>& true_labels,
                                 const std::vector<int>& pred_labels) {
  const ContingencyTable t = contingency(true_labels, pred_labels);
  const int r = static_cast<int>(t.counts.size());
  const int c = static_cast<int>(t.counts[0].size());
  const double n = static_cast<double>(t.total);

  const double hu = detail::entropy(t.row_sums, t.total);
  const double hv = detail::entropy(t.col_sums, t.total);
  double mi = 0.0;
  double h_u_given_v = 0.0;  // H(U|V)
  double h_v_given_u = 0.0;  // H(V|U)
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) {
      const long long m = t.counts[a][b];
      if (m == 0) continue;
      const double p_ab = static_cast<double>(m) / n;
      const double p_a = static_cast<double>(t.row_sums[a]) / n;
      const double p_b = static_cast<double>(t.col_sums[b]) / n;
      mi += p_ab * std::log(p_ab / (p_a * p_b));
      h_u_given_v -= p_ab * std::log(p_ab / p_b);
      h_v_given_u -= p_ab * std::log(p_ab / p_a);
    }

  ClusteringScores s;
  if (hu == 0.0 && hv == 0.0)
    s.nmi = 1.0;  // both partitions trivial, hence identical
  else if (hu == 0.0 || hv == 0.0)
    s.nmi = 0.0;
  else
    s.nmi = mi / std::sqrt(hu * hv);

  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b) sum_cells += detail::choose2(t.counts[a][b]);
  for (long long m : t.row_sums) sum_rows += detail::choose2(m);
  for (long long m : t.col_sums) sum_cols += detail::choose2(m);
  const double pairs = detail::choose2(t.total);
  const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
  const double denom = 0.5 * (sum_rows + sum_cols) - expected;
  s.ari_raw = denom == 0.0 ? 1.0 : (sum_cells - expected) / denom;
  s.ari = std::clamp(s.ari_raw, 0.0, 1.0);

  const int side = std::max(r, c);
  std::vector<std::vector<double>> cost(side, std::vector<double>(side, 0.0));
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < c; ++b)
      cost[a][b] = -static_cast<double>(t.counts[a][b]);
  const std::vector<int> match = detail::min_cost_assignment(cost);
  double matched = 0.0;
  for (int a = 0; a < r; ++a)
    if (match[a] < c) matched += static_cast<double>(t.counts[a][match[a]]);
  s.acc = matched / n;

  s.hom = hu == 0.0 ? 1.0 : 1.0 - h_u_given_v / hu;
  s.com = hv == 0.0 ? 1.0 : 1.0 - h_v_given_u / hv;

  double pure = 0.0;
  for (int b = 0; b < c; ++b) {
    long long best = 0;
    for (int a = 0; a < r; ++a) best = std::max(best, t.counts[a][b]);
    pure += static_cast<double>(best);
  }
  s.pur = pure / n;
  return s;
}

}  // namespace gfl
