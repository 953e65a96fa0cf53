#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfl/decoder.hpp"
#include "gfl/errors.hpp"
#include "gfl/rng.hpp"

namespace gfl {

enum class LangevinInit { prior_mean, warm_start };

struct LangevinConfig {
  double delta = 0.4;     // step size
  int mcmc_steps = 30;    // transitions per sample path
  int n_samples = 100;    // posterior draws per node
  LangevinInit init_mode = LangevinInit::prior_mean;
};

// Unadjusted Langevin sampler for P(z | y) under z ~ N(mu, I),
// y | z ~ N(h(z), I). Each of the n_samples chains starts at mu (or at the
// matching column of *warm) and runs mcmc_steps transitions
//   z <- z + delta * (J^T (y - h(z)) - (z - mu)) + sqrt(2 delta) * eps.
// Chains are driven by per-sample substreams of `rng`, so sample u is
// reproducible in isolation. Returns the final states, one column per draw.
inline Eigen::MatrixXd langevin_chain(const DecoderParams& params,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& mu,
                                      const LangevinConfig& cfg, RngStream& rng,
                                      const Eigen::MatrixXd* warm = nullptr) {
  const int d = params.latent_dim();
  if (mu.size() != d) throw std::invalid_argument("langevin: mu has wrong dimension");
  if (y.size() != params.out_dim())
    throw std::invalid_argument("langevin: y has wrong dimension");
  if (cfg.n_samples <= 0 || cfg.mcmc_steps < 0 || cfg.delta <= 0.0)
    throw std::invalid_argument("langevin: bad sampler configuration");

  Eigen::MatrixXd z(d, cfg.n_samples);
  if (cfg.init_mode == LangevinInit::warm_start && warm != nullptr) {
    if (warm->rows() != d || warm->cols() != cfg.n_samples)
      throw std::invalid_argument("langevin: warm start has wrong shape");
    z = *warm;
  } else {
    z.colwise() = mu;
  }

  std::vector<RngStream> subs;
  subs.reserve(cfg.n_samples);
  for (int u = 0; u < cfg.n_samples; ++u) subs.push_back(rng.substream(u));

  const double noise_scale = std::sqrt(2.0 * cfg.delta);
  Eigen::MatrixXd eps(d, cfg.n_samples);
  for (int k = 0; k < cfg.mcmc_steps; ++k) {
    for (int u = 0; u < cfg.n_samples; ++u)
      for (int r = 0; r < d; ++r) eps(r, u) = subs[u].normal();
    const Eigen::MatrixXd grad = decoder_grad_z_batch(params, y, z);
    z += cfg.delta * (grad - (z.colwise() - mu)) + noise_scale * eps;
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > 1e6)
      throw numeric_error("langevin: diverged at node " +
                          std::to_string(rng.id().node) + ", step " +
                          std::to_string(k + 1) +
                          " (try a smaller step size)");
  }
  return z;
}

// E(Z | Y) estimate: mean over posterior draw columns.
inline Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& samples) {
  if (samples.cols() == 0) throw std::invalid_argument("posterior_mean: no samples");
  return samples.rowwise().mean();
}

// Monte Carlo estimate of ln P(y) = ln E_{z ~ N(mu, I)} P(y | z), computed as
// a log-mean-exp over prior draws.
inline double marginal_loglik_mc(const DecoderParams& params,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& mu, int n_samples,
                                 RngStream& rng) {
  if (n_samples <= 0)
    throw std::invalid_argument("marginal_loglik: n_samples must be positive");
  const int d = params.latent_dim();
  Eigen::MatrixXd z(d, n_samples);
  for (int u = 0; u < n_samples; ++u) {
    RngStream sub = rng.substream(u);
    for (int r = 0; r < d; ++r) z(r, u) = mu(r) + sub.normal();
  }
  const Eigen::MatrixXd out = decoder_forward_batch(params, z);
  Eigen::VectorXd ll(n_samples);
  static constexpr double kLn2Pi = 1.8378770664093454836;
  const double base = -0.5 * static_cast<double>(y.size()) * kLn2Pi;
  for (int u = 0; u < n_samples; ++u)
    ll(u) = base - 0.5 * (y - out.col(u)).squaredNorm();
  const double m = ll.maxCoeff();
  const double mean_exp = (ll.array() - m).exp().mean();
  return m + std::log(mean_exp);
}

}  // namespace gfl
