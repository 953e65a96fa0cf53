#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include <gfl/decoder.hpp>
#include <gfl/errors.hpp>
#include <gfl/rng.hpp>

namespace {

// Tiny fixed positive-weight net whose forward pass is easy to hand-check.
gfl::DecoderParams hand_net() {
  gfl::DecoderParams p;
  p.W1 = Eigen::MatrixXd(2, 2);
  p.W1 << 1, 0, 0, 1;
  p.b1 = Eigen::VectorXd::Zero(2);
  p.W2 = Eigen::MatrixXd(2, 2);
  p.W2 << 2, 0, 0, 3;
  p.b2 = Eigen::VectorXd::Zero(2);
  p.W3 = Eigen::MatrixXd(1, 2);
  p.W3 << 1, 1;
  p.b3 = Eigen::VectorXd::Constant(1, 0.5);
  return p;
}

double loglik_at(const gfl::DecoderParams& p, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& z) {
  return gfl::gaussian_loglik(y, gfl::decoder_forward(p, z));
}

}  // namespace

TEST_CASE("forward pass matches a hand computation including ReLU clipping") {
  const gfl::DecoderParams p = hand_net();
  Eigen::VectorXd z(2);
  z << 1.0, -2.0;  // second coordinate dies at the first ReLU
  const Eigen::VectorXd out = gfl::decoder_forward(p, z);
  REQUIRE(out.size() == 1);
  REQUIRE(out(0) == Catch::Approx(2.0 * 1.0 + 0.5));
}

TEST_CASE("batched forward agrees with the single-point version") {
  gfl::RngStream rng(11);
  const gfl::DecoderParams p = gfl::init_decoder(3, 8, 8, 16, rng);
  Eigen::MatrixXd z(3, 5);
  for (int c = 0; c < 5; ++c)
    for (int r = 0; r < 3; ++r) z(r, c) = rng.normal();
  const Eigen::MatrixXd out = gfl::decoder_forward_batch(p, z);
  for (int c = 0; c < 5; ++c)
    REQUIRE((out.col(c) - gfl::decoder_forward(p, z.col(c))).norm() < 1e-14);
}

TEST_CASE("initialization respects fan-in bounds and zero biases") {
  gfl::RngStream rng(5);
  const gfl::DecoderParams p = gfl::init_decoder(3, 32, 32, 100, rng);
  REQUIRE(p.W1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(3.0));
  REQUIRE(p.W2.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
  REQUIRE(p.W3.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
  REQUIRE(p.b1.isZero());
  REQUIRE(p.b2.isZero());
  REQUIRE(p.b3.isZero());
  REQUIRE(gfl::param_count(p) == 4484);
  REQUIRE_THROWS_AS(gfl::init_decoder(0, 8, 8, 16, rng), std::invalid_argument);
}

TEST_CASE("forward is piecewise linear between activation boundaries") {
  gfl::RngStream rng(17);
  const gfl::DecoderParams p = gfl::init_decoder(4, 10, 10, 20, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd z(4), dz(4);
    for (int i = 0; i < 4; ++i) {
      z(i) = rng.normal();
      dz(i) = 1e-7 * rng.normal();
    }
    const Eigen::VectorXd f0 = gfl::decoder_forward(p, z);
    const Eigen::VectorXd f1 = gfl::decoder_forward(p, z + dz);
    const Eigen::VectorXd f2 = gfl::decoder_forward(p, z + 2.0 * dz);
    // Second difference vanishes on a linear piece.
    REQUIRE((f2 - 2.0 * f1 + f0).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("gaussian log-likelihood hand values") {
  Eigen::VectorXd y(2), m(2);
  y << 1, 2;
  m = y;
  REQUIRE(gfl::gaussian_loglik(y, m) == Catch::Approx(-1.8378770664093454836));
  m << 0, 2;
  REQUIRE(gfl::gaussian_loglik(y, m) ==
          Catch::Approx(-1.8378770664093454836 - 0.5));
}

TEST_CASE("latent gradient matches finite differences of the log-likelihood") {
  gfl::RngStream rng(23);
  const gfl::DecoderParams p = gfl::init_decoder(3, 8, 8, 16, rng);
  Eigen::VectorXd y(16), z(3);
  for (int i = 0; i < 16; ++i) y(i) = rng.normal();
  for (int i = 0; i < 3; ++i) z(i) = rng.normal();
  const Eigen::VectorXd g = gfl::decoder_grad_z(p, y, z);
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    const double fd = (loglik_at(p, y, zp) - loglik_at(p, y, zm)) / (2.0 * h);
    REQUIRE(g(i) == Catch::Approx(fd).margin(1e-6));
  }
  // Zero residual means zero gradient.
  const Eigen::VectorXd y_exact = gfl::decoder_forward(p, z);
  REQUIRE(gfl::decoder_grad_z(p, y_exact, z).norm() < 1e-14);
}

TEST_CASE("batched latent gradient matches the single-point version") {
  gfl::RngStream rng(29);
  const gfl::DecoderParams p = gfl::init_decoder(2, 6, 6, 10, rng);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y(i) = rng.normal();
  Eigen::MatrixXd z(2, 4);
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 2; ++r) z(r, c) = rng.normal();
  const Eigen::MatrixXd g = gfl::decoder_grad_z_batch(p, y, z);
  for (int c = 0; c < 4; ++c)
    REQUIRE((g.col(c) - gfl::decoder_grad_z(p, y, z.col(c))).norm() < 1e-14);
}

TEST_CASE("parameter gradient validates its sample blocks") {
  gfl::RngStream rng(31);
  const gfl::DecoderParams p = gfl::init_decoder(2, 4, 4, 6, rng);
  Eigen::MatrixXd y = Eigen::MatrixXd::Random(2, 6);
  std::vector<Eigen::MatrixXd> blocks{Eigen::MatrixXd::Random(2, 3)};
  REQUIRE_THROWS_AS(gfl::decoder_grad_params(p, y, blocks), std::invalid_argument);
  blocks.push_back(Eigen::MatrixXd::Random(2, 2));  // ragged
  REQUIRE_THROWS_AS(gfl::decoder_grad_params(p, y, blocks), std::invalid_argument);
}

TEST_CASE("parameter gradient of a perfectly fitting sample is zero") {
  gfl::RngStream rng(37);
  const gfl::DecoderParams p = gfl::init_decoder(2, 4, 4, 6, rng);
  Eigen::VectorXd z(2);
  z << 0.3, -0.7;
  Eigen::MatrixXd y(1, 6);
  y.row(0) = gfl::decoder_forward(p, z).transpose();
  const gfl::DecoderParams g =
      gfl::decoder_grad_params(p, y, {Eigen::MatrixXd(z)});
  REQUIRE(g.W1.norm() < 1e-14);
  REQUIRE(g.W3.norm() < 1e-14);
  REQUIRE(g.b3.norm() < 1e-14);
}

TEST_CASE("parameter gradient matches finite differences on probed coordinates") {
  gfl::RngStream rng(41);
  gfl::DecoderParams p = gfl::init_decoder(3, 5, 5, 8, rng);
  Eigen::MatrixXd y(2, 8);
  for (int i = 0; i < y.size(); ++i) y(i / 8, i % 8) = rng.normal();
  std::vector<Eigen::MatrixXd> blocks;
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd b(3, 3);
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) b(r, c) = rng.normal();
    blocks.push_back(b);
  }
  auto objective = [&](const gfl::DecoderParams& q) {
    double total = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int u = 0; u < 3; ++u)
        total -= gfl::gaussian_loglik(y.row(i).transpose(),
                                      gfl::decoder_forward(q, blocks[i].col(u)));
    return total / 6.0;
  };
  const gfl::DecoderParams g = gfl::decoder_grad_params(p, y, blocks);
  const double h = 1e-5;
  auto probe = [&](Eigen::MatrixXd& target, const Eigen::MatrixXd& grad, int r,
                   int c) {
    const double save = target(r, c);
    target(r, c) = save + h;
    const double up = objective(p);
    target(r, c) = save - h;
    const double dn = objective(p);
    target(r, c) = save;
    const double fd = (up - dn) / (2.0 * h);
    REQUIRE(grad(r, c) == Catch::Approx(fd).margin(1e-6));
  };
  probe(p.W1, g.W1, 2, 1);
  probe(p.W2, g.W2, 0, 3);
  probe(p.W3, g.W3, 5, 2);
  const double save = p.b3(4);
  p.b3(4) = save + h;
  const double up = objective(p);
  p.b3(4) = save - h;
  const double dn = objective(p);
  p.b3(4) = save;
  REQUIRE(g.b3(4) == Catch::Approx((up - dn) / (2.0 * h)).margin(1e-6));
}

TEST_CASE("adam first step has magnitude lr and descends the sign") {
  gfl::RngStream rng(43);
  const gfl::DecoderParams p = gfl::init_decoder(2, 3, 3, 4, rng);
  gfl::AdamState st = gfl::init_adam(p);
  gfl::DecoderParams g = gfl::init_adam(p).m;  // zero-shaped like p
  g.W1(0, 0) = 2.5;
  g.b3(1) = -0.3;
  auto [p1, st1] = gfl::adam_step(p, st, g, 1e-2);
  // Bias-corrected first step is lr * g / (|g| + eps) = lr * sign(g).
  REQUIRE(p1.W1(0, 0) == Catch::Approx(p.W1(0, 0) - 1e-2).epsilon(1e-6));
  REQUIRE(p1.b3(1) == Catch::Approx(p.b3(1) + 1e-2).epsilon(1e-6));
  // Untouched coordinates stay put.
  REQUIRE(p1.W2(1, 1) == p.W2(1, 1));
  REQUIRE(st1.step == 1);
}

TEST_CASE("adam rejects non-finite gradients and zero gradient is a no-op") {
  gfl::RngStream rng(47);
  const gfl::DecoderParams p = gfl::init_decoder(2, 3, 3, 4, rng);
  gfl::AdamState st = gfl::init_adam(p);
  gfl::DecoderParams zero = gfl::init_adam(p).m;
  auto [p1, st1] = gfl::adam_step(p, st, zero, 1e-2);
  REQUIRE((p1.W1 - p.W1).norm() == 0.0);
  gfl::DecoderParams bad = zero;
  bad.W2(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(gfl::adam_step(p, st, bad, 1e-2), gfl::numeric_error);
}

TEST_CASE("constant gradient walks each coordinate against its sign") {
  gfl::RngStream rng(53);
  gfl::DecoderParams p = gfl::init_decoder(2, 3, 3, 4, rng);
  const gfl::DecoderParams start = p;
  gfl::AdamState st = gfl::init_adam(p);
  gfl::DecoderParams g = gfl::init_adam(p).m;
  g.W3.setConstant(0.7);
  for (int step = 0; step < 25; ++step) {
    auto [pn, sn] = gfl::adam_step(p, st, g, 1e-3);
    p = std::move(pn);
    st = std::move(sn);
  }
  REQUIRE(((start.W3 - p.W3).array() > 0.0).all());
  REQUIRE((start.W1 - p.W1).norm() == 0.0);
}
