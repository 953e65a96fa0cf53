#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gfl/errors.hpp"
#include "gfl/rng.hpp"

namespace gfl {

// Three-layer ReLU decoder mapping a latent point z in R^d to a series
// mean in R^n: W3 * relu(W2 * relu(W1 z + b1) + b2) + b3.
struct DecoderParams {
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;

  int latent_dim() const { return static_cast<int>(W1.cols()); }
  int hidden1() const { return static_cast<int>(W1.rows()); }
  int hidden2() const { return static_cast<int>(W2.rows()); }
  int out_dim() const { return static_cast<int>(W3.rows()); }
};

inline std::int64_t param_count(const DecoderParams& p) {
  return p.W1.size() + p.W2.size() + p.W3.size() + p.b1.size() + p.b2.size() +
         p.b3.size();
}

// Weights uniform on +-1/sqrt(fan_in), biases zero.
inline DecoderParams init_decoder(int latent_dim, int hidden1, int hidden2,
                                  int out_dim, RngStream& rng) {
  if (latent_dim <= 0 || hidden1 <= 0 || hidden2 <= 0 || out_dim <= 0)
    throw std::invalid_argument("decoder: all layer sizes must be positive");
  auto uniform_mat = [&rng](int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r)
        m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    return m;
  };
  DecoderParams p;
  p.W1 = uniform_mat(hidden1, latent_dim, latent_dim);
  p.W2 = uniform_mat(hidden2, hidden1, hidden1);
  p.W3 = uniform_mat(out_dim, hidden2, hidden2);
  p.b1 = Eigen::VectorXd::Zero(hidden1);
  p.b2 = Eigen::VectorXd::Zero(hidden2);
  p.b3 = Eigen::VectorXd::Zero(out_dim);
  return p;
}

inline Eigen::VectorXd decoder_forward(const DecoderParams& p,
                                       const Eigen::VectorXd& z) {
  const Eigen::VectorXd h1 = (p.W1 * z + p.b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (p.W2 * h1 + p.b2).cwiseMax(0.0);
  return p.W3 * h2 + p.b3;
}

// Columns of z are latent points; returns one output column per input column.
inline Eigen::MatrixXd decoder_forward_batch(const DecoderParams& p,
                                             const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd h1 =
      ((p.W1 * z).colwise() + p.b1).cwiseMax(0.0);
  const Eigen::MatrixXd h2 =
      ((p.W2 * h1).colwise() + p.b2).cwiseMax(0.0);
  return (p.W3 * h2).colwise() + p.b3;
}

// ln N(y; mean, I) up to nothing: includes the -n/2 ln(2 pi) constant.
inline double gaussian_loglik(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& mean) {
  static constexpr double kLn2Pi = 1.8378770664093454836;
  const double sq = (y - mean).squaredNorm();
  return -0.5 * static_cast<double>(y.size()) * kLn2Pi - 0.5 * sq;
}

// Gradient of ln P(y | z) with respect to z: J(z)^T (y - h(z)), where J is
// the decoder Jacobian. ReLU subgradient at exactly zero is taken as zero.
inline Eigen::VectorXd decoder_grad_z(const DecoderParams& p,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& z) {
  const Eigen::VectorXd a1 = p.W1 * z + p.b1;
  const Eigen::VectorXd h1 = a1.cwiseMax(0.0);
  const Eigen::VectorXd a2 = p.W2 * h1 + p.b2;
  const Eigen::VectorXd h2 = a2.cwiseMax(0.0);
  const Eigen::VectorXd r = y - (p.W3 * h2 + p.b3);
  const Eigen::VectorXd g2 =
      (p.W3.transpose() * r).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
  const Eigen::VectorXd g1 =
      (p.W2.transpose() * g2).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
  return p.W1.transpose() * g1;
}

// Batched form of decoder_grad_z: column s is the gradient for (y, z.col(s)).
inline Eigen::MatrixXd decoder_grad_z_batch(const DecoderParams& p,
                                            const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd a1 = (p.W1 * z).colwise() + p.b1;
  const Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
  const Eigen::MatrixXd a2 = (p.W2 * h1).colwise() + p.b2;
  const Eigen::MatrixXd h2 = a2.cwiseMax(0.0);
  const Eigen::MatrixXd r = (-((p.W3 * h2).colwise() + p.b3)).colwise() + y;
  const Eigen::MatrixXd g2 =
      (p.W3.transpose() * r).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
  const Eigen::MatrixXd g1 =
      (p.W2.transpose() * g2).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
  return p.W1.transpose() * g1;
}

// Gradient of the mean over all (node, sample) pairs of -ln P(y_i | z_is)
// with respect to the decoder parameters. Each element of z_samples holds the
// posterior draws for one node as columns; all nodes must supply the same
// number of columns.
inline DecoderParams decoder_grad_params(
    const DecoderParams& p, const Eigen::MatrixXd& y,
    const std::vector<Eigen::MatrixXd>& z_samples) {
  const int n_nodes = static_cast<int>(y.rows());
  if (static_cast<int>(z_samples.size()) != n_nodes)
    throw std::invalid_argument("decoder: one sample block per node required");
  const int s = static_cast<int>(z_samples.front().cols());
  const int total = n_nodes * s;

  // Flatten to one big batch: column i*s + u is sample u of node i.
  Eigen::MatrixXd z(p.latent_dim(), total);
  for (int i = 0; i < n_nodes; ++i) {
    if (z_samples[i].cols() != s)
      throw std::invalid_argument("decoder: ragged sample blocks");
    z.middleCols(i * s, s) = z_samples[i];
  }

  const Eigen::MatrixXd a1 = (p.W1 * z).colwise() + p.b1;
  const Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
  const Eigen::MatrixXd a2 = (p.W2 * h1).colwise() + p.b2;
  const Eigen::MatrixXd h2 = a2.cwiseMax(0.0);
  Eigen::MatrixXd r = (p.W3 * h2).colwise() + p.b3;  // residual h(z) - y
  for (int i = 0; i < n_nodes; ++i)
    r.middleCols(i * s, s).colwise() -= y.row(i).transpose().eval();

  const double inv_m = 1.0 / static_cast<double>(total);
  DecoderParams g;
  g.W3 = inv_m * (r * h2.transpose());
  g.b3 = inv_m * r.rowwise().sum();
  const Eigen::MatrixXd g2 =
      (p.W3.transpose() * r).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
  g.W2 = inv_m * (g2 * h1.transpose());
  g.b2 = inv_m * g2.rowwise().sum();
  const Eigen::MatrixXd g1 =
      (p.W2.transpose() * g2).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
  g.W1 = inv_m * (g1 * z.transpose());
  g.b1 = inv_m * g1.rowwise().sum();
  return g;
}

// Adam optimizer state for the decoder parameters.
struct AdamState {
  DecoderParams m, v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline AdamState init_adam(const DecoderParams& p) {
  AdamState s;
  auto zeros_like_m = [](const Eigen::MatrixXd& x) {
    return Eigen::MatrixXd::Zero(x.rows(), x.cols()).eval();
  };
  auto zeros_like_v = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Zero(x.size()).eval();
  };
  s.m.W1 = zeros_like_m(p.W1); s.m.W2 = zeros_like_m(p.W2); s.m.W3 = zeros_like_m(p.W3);
  s.m.b1 = zeros_like_v(p.b1); s.m.b2 = zeros_like_v(p.b2); s.m.b3 = zeros_like_v(p.b3);
  s.v = s.m;
  return s;
}

// One Adam update, params and state taken by value and returned updated.
inline std::pair<DecoderParams, AdamState> adam_step(DecoderParams p, AdamState s,
                                                     const DecoderParams& grad,
                                                     double lr) {
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto upd = [&](auto& param, auto& m, auto& v, const auto& g) {
    if (!g.allFinite()) throw numeric_error("adam: non-finite gradient");
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = (s.beta2 * v.array() + (1.0 - s.beta2) * g.array().square()).matrix();
    param.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
  };
  upd(p.W1, s.m.W1, s.v.W1, grad.W1);
  upd(p.W2, s.m.W2, s.v.W2, grad.W2);
  upd(p.W3, s.m.W3, s.v.W3, grad.W3);
  upd(p.b1, s.m.b1, s.v.b1, grad.b1);
  upd(p.b2, s.m.b2, s.v.b2, grad.b2);
  upd(p.b3, s.m.b3, s.v.b3, grad.b3);
  return {std::move(p), std::move(s)};
}

}  // namespace gfl
