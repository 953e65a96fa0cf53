#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gfl/decoder.hpp"
#include "gfl/errors.hpp"
#include "gfl/graph.hpp"
#include "gfl/inference.hpp"
#include "gfl/rng.hpp"

namespace gfl {

enum class MuSweep { gauss_seidel, jacobi };

struct FitConfig {
  int latent_dim = 3;
  double lambda = 0.5;
  double gamma = 0.5;
  bool gamma_follows_lambda = true;  // gamma := lambda unless overridden
  int admm_iters = 30;               // A
  int adam_iters = 20;               // B
  int bcd_iters = 1;                 // D, slack prox passes per iteration
  double adam_lr = 1e-4;
  int hidden1 = 32;
  int hidden2 = 32;
  LangevinConfig langevin;
  MuSweep mu_sweep = MuSweep::gauss_seidel;
  std::uint64_t seed = 0;
  int objective_mc_samples = 64;   // draws behind the per-iteration objective
  int cv_loglik_samples = 2000;    // draws behind held-out model selection

  double effective_gamma() const {
    if (!gamma_follows_lambda) return gamma;
    return lambda > 0.0 ? lambda : 1.0;
  }

  void validate() const {
    if (latent_dim < 1) throw std::invalid_argument("config: latent_dim must be >= 1");
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (effective_gamma() <= 0.0)
      throw std::invalid_argument("config: gamma must be > 0");
    if (admm_iters < 1 || adam_iters < 1 || bcd_iters < 1)
      throw std::invalid_argument("config: iteration counts must be >= 1");
    if (adam_lr <= 0.0) throw std::invalid_argument("config: adam_lr must be > 0");
    if (hidden1 < 1 || hidden2 < 1)
      throw std::invalid_argument("config: hidden sizes must be >= 1");
    if (langevin.delta <= 0.0 || langevin.mcmc_steps < 1 || langevin.n_samples < 1)
      throw std::invalid_argument("config: bad sampler settings");
    if (objective_mc_samples < 1 || cv_loglik_samples < 1)
      throw std::invalid_argument("config: Monte Carlo sample counts must be >= 1");
  }
};

// Mutable optimization state. Slack nu and scaled dual w hold one column per
// canonical edge of the graph, in edge-index order.
struct AdmmState {
  Eigen::MatrixXd mu;   // N x d, row i = prior mean of node i
  Eigen::MatrixXd nu;   // d x E
  Eigen::MatrixXd w;    // d x E
  DecoderParams decoder;
  int iteration = 0;
};

struct IterationStats {
  double primal_residual = 0.0;  // sum over edges of |mu_i - mu_j - nu_ij|
  double objective = 0.0;        // -sum_i ln P(y_i) estimate + lambda * fusion
  double dual_max_norm = 0.0;    // max over edges of |w_ij|
};

struct FitResult {
  AdmmState state;
  std::vector<IterationStats> history;
};

// Closed-form minimizer of the mu_i subproblem:
//   (1 + gamma |B(i)|)^-1 [ E(Z_i|Y_i) + gamma sum_{j in B(i)} (mu_j + nu_ij - w_ij) ].
// nu and w are stored once per canonical (min, max) edge for the difference
// mu_min - mu_max, so when i is the larger endpoint their sign flips.
inline Eigen::VectorXd update_mu(int i, const Eigen::VectorXd& post_mean,
                                 const AdmmState& state, const Graph& graph,
                                 double gamma) {
  Eigen::VectorXd acc = post_mean;
  for (int j : graph.neighbors(i)) {
    const int e = graph.edge_index(i, j);
    const double sign = i < j ? 1.0 : -1.0;
    acc += gamma * (state.mu.row(j).transpose() +
                    sign * (state.nu.col(e) - state.w.col(e)));
  }
  return acc / (1.0 + gamma * graph.degree(i));
}

// Radial shrinkage solving min_nu lambda |nu| + (gamma/2) |s - nu|^2.
inline Eigen::VectorXd prox_group_lasso(const Eigen::VectorXd& s, double lambda,
                                        double gamma) {
  const double norm = s.norm();
  if (gamma * norm <= lambda) return Eigen::VectorXd::Zero(s.size());
  return (1.0 - lambda / (gamma * norm)) * s;
}

// Scaled dual ascent, one step per edge: w' = mu_i - mu_j - nu_ij + w.
inline AdmmState update_duals(AdmmState state, const Graph& graph) {
  for (int e = 0; e < graph.n_edges(); ++e) {
    const auto [i, j] = graph.edges()[e];
    state.w.col(e) +=
        state.mu.row(i).transpose() - state.mu.row(j).transpose() - state.nu.col(e);
  }
  return state;
}

namespace detail {

// Seed tags for the independent random streams a fit consumes.
inline constexpr std::uint64_t kTagDecoderInit = 0;
inline constexpr std::uint64_t kTagChains = 1;
inline constexpr std::uint64_t kTagObjective = 2;
inline constexpr std::uint64_t kTagHoldout = 3;
inline constexpr std::uint64_t kTagCvScore = 4;

inline double fusion_penalty(const Eigen::MatrixXd& mu, const Graph& graph) {
  double total = 0.0;
  for (const auto& [i, j] : graph.edges())
    total += (mu.row(i) - mu.row(j)).norm();
  return total;
}

}  // namespace detail

// Runs cfg.admm_iters iterations of the alternating scheme: posterior
// sampling for every node, cfg.adam_iters decoder updates on those samples,
// the closed-form mu sweep, cfg.bcd_iters slack prox passes, and the dual
// step. When `resume` is given, continues from its state for admm_iters more
// iterations; random streams are keyed by the absolute iteration index, so a
// split run replays the same draws as an unbroken one.
inline FitResult fit(const Graph& graph, const NodeSeries& data,
                     const FitConfig& cfg, const AdmmState* resume = nullptr) {
  cfg.validate();
  const int n_nodes = graph.n_nodes();
  if (data.n_nodes() != n_nodes)
    throw std::invalid_argument("fit: series rows (" +
                                std::to_string(data.n_nodes()) +
                                ") != graph nodes (" + std::to_string(n_nodes) + ")");
  const int d = cfg.latent_dim;
  const int n_edges = graph.n_edges();
  const double gamma = cfg.effective_gamma();

  AdmmState state;
  if (resume != nullptr) {
    state = *resume;
    if (state.mu.rows() != n_nodes || state.mu.cols() != d ||
        state.nu.cols() != n_edges || state.w.cols() != n_edges)
      throw std::invalid_argument("fit: resume state does not match graph/config");
  } else {
    RngStream init_rng(derive_seed(cfg.seed, detail::kTagDecoderInit));
    state.decoder = init_decoder(d, cfg.hidden1, cfg.hidden2, data.series_len(), init_rng);
    state.mu = Eigen::MatrixXd::Zero(n_nodes, d);
    state.nu = Eigen::MatrixXd::Zero(d, n_edges);
    state.w = Eigen::MatrixXd::Zero(d, n_edges);
    state.iteration = 0;
  }

  const std::uint64_t chain_seed = derive_seed(cfg.seed, detail::kTagChains);
  const std::uint64_t obj_seed = derive_seed(cfg.seed, detail::kTagObjective);

  AdamState adam = init_adam(state.decoder);
  std::vector<Eigen::MatrixXd> samples(n_nodes);  // d x s blocks, one per node
  Eigen::MatrixXd post_means(n_nodes, d);
  std::vector<Eigen::MatrixXd> warm;  // previous final states for warm_start
  FitResult result;
  result.history.reserve(cfg.admm_iters);

  for (int step = 0; step < cfg.admm_iters; ++step) {
    const int a = state.iteration;

    for (int i = 0; i < n_nodes; ++i) {
      RngStream rng(chain_seed, RngStream::Id{i, a, -1});
      const Eigen::MatrixXd* start =
          (cfg.langevin.init_mode == LangevinInit::warm_start && !warm.empty())
              ? &warm[i]
              : nullptr;
      samples[i] = langevin_chain(state.decoder, data.row(i),
                                  state.mu.row(i).transpose(), cfg.langevin, rng,
                                  start);
      post_means.row(i) = samples[i].rowwise().mean().transpose();
    }
    if (cfg.langevin.init_mode == LangevinInit::warm_start) warm = samples;

    for (int b = 0; b < cfg.adam_iters; ++b) {
      const DecoderParams grad =
          decoder_grad_params(state.decoder, data.values(), samples);
      std::tie(state.decoder, adam) =
          adam_step(std::move(state.decoder), std::move(adam), grad, cfg.adam_lr);
    }

    if (cfg.mu_sweep == MuSweep::gauss_seidel) {
      for (int i = 0; i < n_nodes; ++i)
        state.mu.row(i) =
            update_mu(i, post_means.row(i).transpose(), state, graph, gamma)
                .transpose();
    } else {
      Eigen::MatrixXd fresh(n_nodes, d);
      for (int i = 0; i < n_nodes; ++i)
        fresh.row(i) =
            update_mu(i, post_means.row(i).transpose(), state, graph, gamma)
                .transpose();
      state.mu = fresh;
    }

    for (int pass = 0; pass < cfg.bcd_iters; ++pass)
      for (int e = 0; e < n_edges; ++e) {
        const auto [i, j] = graph.edges()[e];
        const Eigen::VectorXd s = state.mu.row(i).transpose() -
                                  state.mu.row(j).transpose() + state.w.col(e);
        state.nu.col(e) = prox_group_lasso(s, cfg.lambda, gamma);
      }

    state = update_duals(std::move(state), graph);
    state.iteration = a + 1;

    IterationStats stats;
    for (int e = 0; e < n_edges; ++e) {
      const auto [i, j] = graph.edges()[e];
      stats.primal_residual +=
          (state.mu.row(i).transpose() - state.mu.row(j).transpose() -
           state.nu.col(e))
              .norm();
      stats.dual_max_norm = std::max(stats.dual_max_norm, state.w.col(e).norm());
    }
    double loglik = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
      RngStream rng(obj_seed, RngStream::Id{i, a, -1});
      loglik += marginal_loglik_mc(state.decoder, data.row(i),
                                   state.mu.row(i).transpose(),
                                   cfg.objective_mc_samples, rng);
    }
    stats.objective = -loglik + cfg.lambda * detail::fusion_penalty(state.mu, graph);
    if (!std::isfinite(stats.objective) || !std::isfinite(stats.primal_residual))
      throw numeric_error("fit: non-finite objective at iteration " +
                          std::to_string(state.iteration));
    result.history.push_back(stats);
  }

  result.state = std::move(state);
  return result;
}

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> candidates;
  std::vector<double> heldout_loglik;  // summed over held-out nodes, per candidate
  std::vector<int> heldout_nodes;
};

// Held-out-node model selection. A random holdout_frac of the nodes is
// picked; each held-out node's training series is replaced by the elementwise
// average of its neighbors' series (the mean over all other nodes when it has
// none). One fit per candidate lambda on the surrogate data, scored by the
// summed Monte Carlo marginal log-likelihood of the true held-out series
// under the learned decoder and prior means. Diverged fits score -inf. Ties
// break toward the larger lambda. The caller refits on the full data.
inline LambdaSelection select_lambda(const Graph& graph, const NodeSeries& data,
                                     const std::vector<double>& lambdas,
                                     double holdout_frac, FitConfig cfg) {
  if (lambdas.empty())
    throw std::invalid_argument("select_lambda: no candidates");
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0))
    throw std::invalid_argument("select_lambda: holdout fraction must be in (0, 1)");
  const int n_nodes = graph.n_nodes();
  int n_holdout = static_cast<int>(
      std::lround(holdout_frac * static_cast<double>(n_nodes)));
  n_holdout = std::max(1, std::min(n_holdout, n_nodes - 1));

  // Sample the holdout set without replacement.
  RngStream pick(derive_seed(cfg.seed, detail::kTagHoldout));
  std::vector<int> order(n_nodes);
  for (int i = 0; i < n_nodes; ++i) order[i] = i;
  for (int i = n_nodes - 1; i > 0; --i)
    std::swap(order[i], order[pick.uniform_int(i + 1)]);
  std::vector<int> heldout(order.begin(), order.begin() + n_holdout);
  std::sort(heldout.begin(), heldout.end());

  Eigen::MatrixXd train = data.values();
  for (int i : heldout) {
    Eigen::RowVectorXd surrogate = Eigen::RowVectorXd::Zero(train.cols());
    if (graph.degree(i) > 0) {
      for (int j : graph.neighbors(i)) surrogate += data.values().row(j);
      surrogate /= static_cast<double>(graph.degree(i));
    } else {
      for (int j = 0; j < n_nodes; ++j)
        if (j != i) surrogate += data.values().row(j);
      surrogate /= static_cast<double>(n_nodes - 1);
    }
    train.row(i) = surrogate;
  }
  const NodeSeries train_series{train};

  const std::uint64_t score_seed = derive_seed(cfg.seed, detail::kTagCvScore);
  LambdaSelection sel;
  sel.candidates = lambdas;
  sel.heldout_nodes = heldout;
  sel.heldout_loglik.assign(lambdas.size(), -std::numeric_limits<double>::infinity());

  for (std::size_t c = 0; c < lambdas.size(); ++c) {
    FitConfig trial = cfg;
    trial.lambda = lambdas[c];
    double score = 0.0;
    try {
      const FitResult fitted = fit(graph, train_series, trial);
      for (int i : heldout) {
        RngStream rng(score_seed, RngStream::Id{i, 0, -1});
        score += marginal_loglik_mc(fitted.state.decoder, data.row(i),
                                    fitted.state.mu.row(i).transpose(),
                                    trial.cv_loglik_samples, rng);
      }
    } catch (const numeric_error&) {
      score = -std::numeric_limits<double>::infinity();
    }
    sel.heldout_loglik[c] = score;
  }

  std::size_t best = 0;
  bool any_finite = false;
  for (std::size_t c = 0; c < lambdas.size(); ++c) {
    if (!std::isfinite(sel.heldout_loglik[c])) continue;
    if (!any_finite || sel.heldout_loglik[c] > sel.heldout_loglik[best] ||
        (sel.heldout_loglik[c] == sel.heldout_loglik[best] &&
         lambdas[c] > lambdas[best]))
      best = c;
    any_finite = true;
  }
  if (!any_finite)
    throw numeric_error("select_lambda: every candidate fit diverged");
  sel.lambda = lambdas[best];
  return sel;
}

}  // namespace gfl
