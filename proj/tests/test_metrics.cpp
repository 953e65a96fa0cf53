#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gfl/metrics.hpp>
#include <gfl/rng.hpp>

namespace {

std::vector<int> random_labels(int n, int k, gfl::RngStream& rng) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = static_cast<int>(rng.uniform_int(k));
  // Guarantee every id appears so k is the true cluster count.
  for (int c = 0; c < k && c < n; ++c) out[c] = c;
  return out;
}

// Pair-counting adjusted Rand index, straight from its definition over all
// unordered item pairs.
double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  double same_both = 0.0, same_a = 0.0, same_b = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool in_a = a[i] == a[j];
      const bool in_b = b[i] == b[j];
      same_a += in_a;
      same_b += in_b;
      same_both += in_a && in_b;
    }
  const double pairs = 0.5 * n * (n - 1);
  const double expected = same_a * same_b / pairs;
  const double denom = 0.5 * (same_a + same_b) - expected;
  return denom == 0.0 ? 1.0 : (same_both - expected) / denom;
}

// Best matched fraction over injective cluster-to-class assignments by brute
// force over permutations of the padded square table.
double brute_force_acc(const std::vector<int>& truth, const std::vector<int>& pred) {
  const gfl::ContingencyTable t = gfl::contingency(truth, pred);
  const int r = static_cast<int>(t.counts.size());
  const int c = static_cast<int>(t.counts[0].size());
  const int side = std::max(r, c);
  std::vector<int> perm(side);
  std::iota(perm.begin(), perm.end(), 0);
  long long best = 0;
  do {
    long long matched = 0;
    for (int a = 0; a < r; ++a)
      if (perm[a] < c) matched += t.counts[a][perm[a]];
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.total);
}

}  // namespace

TEST_CASE("identical and relabeled partitions score one everywhere") {
  for (const auto& [truth, pred] :
       std::vector<std::pair<std::vector<int>, std::vector<int>>>{
           {{0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}},
           {{0, 0, 1}, {1, 1, 0}},
           {{4, 4, 9, 9, 7, 7}, {0, 0, 2, 2, 1, 1}}}) {
    const gfl::ClusteringScores s = gfl::evaluate(truth, pred);
    REQUIRE(s.nmi == Catch::Approx(1.0));
    REQUIRE(s.ari == Catch::Approx(1.0));
    REQUIRE(s.ari_raw == Catch::Approx(1.0));
    REQUIRE(s.acc == Catch::Approx(1.0));
    REQUIRE(s.hom == Catch::Approx(1.0));
    REQUIRE(s.com == Catch::Approx(1.0));
    REQUIRE(s.pur == Catch::Approx(1.0));
  }
}

TEST_CASE("independent partitions score at the bottom of every scale") {
  const gfl::ClusteringScores s =
      gfl::evaluate({0, 0, 1, 1}, {0, 1, 0, 1});
  REQUIRE(s.nmi == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.ari_raw == Catch::Approx(-0.5));
  REQUIRE(s.ari == 0.0);  // clamped for reporting
  REQUIRE(s.acc == Catch::Approx(0.5));
  REQUIRE(s.hom == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.com == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.pur == Catch::Approx(0.5));
}

TEST_CASE("normalized mutual information matches a direct computation") {
  // Contingency [[2, 0], [1, 1]].
  const gfl::ClusteringScores s = gfl::evaluate({0, 0, 1, 1}, {0, 0, 0, 1});
  const double mi = 0.5 * std::log(0.5 / 0.375) + 0.25 * std::log(0.25 / 0.375) +
                    0.25 * std::log(0.25 / 0.125);
  const double hu = std::log(2.0);
  const double hv = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  REQUIRE(s.nmi == Catch::Approx(mi / std::sqrt(hu * hv)).epsilon(1e-12));
  REQUIRE(s.hom == Catch::Approx(1.0 - (hu - mi) / hu).epsilon(1e-12));
  REQUIRE(s.com == Catch::Approx(1.0 - (hv - mi) / hv).epsilon(1e-12));
}

TEST_CASE("trivial partitions hit the documented conventions") {
  // Both sides constant: perfect agreement by convention.
  const gfl::ClusteringScores both = gfl::evaluate({3, 3, 3}, {1, 1, 1});
  REQUIRE(both.nmi == 1.0);
  REQUIRE(both.ari_raw == 1.0);
  REQUIRE(both.acc == 1.0);
  REQUIRE(both.hom == 1.0);
  REQUIRE(both.com == 1.0);

  // One side constant: no shared information.
  const gfl::ClusteringScores one = gfl::evaluate({0, 0, 0, 0}, {0, 1, 0, 1});
  REQUIRE(one.nmi == 0.0);
  REQUIRE(one.hom == 1.0);  // a single class is trivially homogeneous
  REQUIRE(one.com == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(one.ari_raw == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(one.pur == 1.0);
}

TEST_CASE("rectangular tables assign clusters injectively") {
  // Contingency [[1, 1, 0], [0, 0, 2]]: class 1 takes its pure cluster and
  // class 0 the better of the two remaining singleton clusters.
  const gfl::ClusteringScores s = gfl::evaluate({0, 0, 1, 1}, {0, 1, 2, 2});
  REQUIRE(s.acc == Catch::Approx(0.75));
  REQUIRE(s.pur == Catch::Approx(1.0));  // every cluster is pure
  REQUIRE(s.hom == Catch::Approx(1.0));
  REQUIRE(s.com < 1.0);

  // More classes than clusters leaves a class unmatched.
  const gfl::ClusteringScores t = gfl::evaluate({0, 1, 2, 2}, {0, 0, 1, 1});
  REQUIRE(t.acc == Catch::Approx(0.75));
}

TEST_CASE("assignment accuracy equals brute force over random instances") {
  gfl::RngStream rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 15;
    const int r = 2 + static_cast<int>(rng.uniform_int(3));
    const int c = 2 + static_cast<int>(rng.uniform_int(3));
    const std::vector<int> truth = random_labels(n, r, rng);
    const std::vector<int> pred = random_labels(n, c, rng);
    const gfl::ClusteringScores s = gfl::evaluate(truth, pred);
    REQUIRE(s.acc == Catch::Approx(brute_force_acc(truth, pred)).margin(1e-12));
    REQUIRE(s.pur >= s.acc - 1e-12);
    REQUIRE(s.pur >= 1.0 / static_cast<double>(r) - 1e-12);
  }
}

TEST_CASE("adjusted Rand matches pair counting over random instances") {
  gfl::RngStream rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform_int(26));
    const std::vector<int> truth = random_labels(n, 3, rng);
    const std::vector<int> pred = random_labels(n, 4, rng);
    const gfl::ClusteringScores s = gfl::evaluate(truth, pred);
    REQUIRE(s.ari_raw ==
            Catch::Approx(pair_counting_ari(truth, pred)).margin(1e-12));
    REQUIRE(s.ari == std::clamp(s.ari_raw, 0.0, 1.0));
  }
}

TEST_CASE("scores ignore the concrete label ids") {
  gfl::RngStream rng(55);
  const std::vector<int> truth = random_labels(30, 3, rng);
  const std::vector<int> pred = random_labels(30, 4, rng);
  const gfl::ClusteringScores base = gfl::evaluate(truth, pred);

  auto remap = [](const std::vector<int>& labels, const std::vector<int>& to) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = to[labels[i]];
    return out;
  };
  const gfl::ClusteringScores moved = gfl::evaluate(
      remap(truth, {42, -7, 1000, 0}), remap(pred, {9, 8, 7, 6, 5}));
  REQUIRE(moved.nmi == Catch::Approx(base.nmi).margin(1e-15));
  REQUIRE(moved.ari_raw == Catch::Approx(base.ari_raw).margin(1e-15));
  REQUIRE(moved.acc == Catch::Approx(base.acc).margin(1e-15));
  REQUIRE(moved.hom == Catch::Approx(base.hom).margin(1e-15));
  REQUIRE(moved.com == Catch::Approx(base.com).margin(1e-15));
  REQUIRE(moved.pur == Catch::Approx(base.pur).margin(1e-15));
}

TEST_CASE("homogeneity and completeness flag the right failure modes") {
  // Pure clusters, split class: homogeneous but incomplete.
  const gfl::ClusteringScores split =
      gfl::evaluate({0, 0, 1, 1, 2, 2}, {0, 0, 1, 1, 2, 3});
  REQUIRE(split.hom == Catch::Approx(1.0));
  REQUIRE(split.com < 1.0);
  REQUIRE(split.pur == Catch::Approx(1.0));

  // Merged classes: complete but inhomogeneous.
  const gfl::ClusteringScores merged =
      gfl::evaluate({0, 0, 1, 1, 2, 2}, {0, 0, 0, 0, 1, 1});
  REQUIRE(merged.com == Catch::Approx(1.0));
  REQUIRE(merged.hom < 1.0);
  REQUIRE(merged.pur < 1.0);
}

TEST_CASE("label vectors must be nonempty and aligned") {
  REQUIRE_THROWS_AS(gfl::evaluate({0, 1}, {0}), std::invalid_argument);
  REQUIRE_THROWS_AS(gfl::evaluate({}, {}), std::invalid_argument);
}
