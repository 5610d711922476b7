#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "gradcheck.hpp"
#include "swarm/core/error.hpp"
#include "swarm/nn/adam.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/nn/mlp.hpp"
#include "swarm/nn/replay_buffer.hpp"

namespace swarm::nn {
namespace {

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

TEST(Mlp, ZeroNetGivesZero) {
  ParamList p{Matrix::Zero(4, 3), Matrix::Zero(4, 1), Matrix::Zero(2, 4), Matrix::Zero(2, 1)};
  const Mlp net({3, 4, 2}, OutputHead::Linear, p);
  Rng rng(1);
  EXPECT_TRUE(net.forward(random_matrix(rng, 3, 5)).isZero(0.0));
}

TEST(Mlp, IdentityLayer) {
  const Mlp net({3, 3}, OutputHead::Linear, ParamList{Matrix::Identity(3, 3), Matrix::Zero(3, 1)});
  Vector x(3);
  x << 0.5, -2.0, 7.0;
  EXPECT_EQ(net.forward_one(x), x);
}

TEST(Mlp, MatchesHandRolledProduct) {
  Rng rng(4);
  const Mlp net({2, 8, 1}, OutputHead::Linear, rng);
  Vector x(2);
  x << 0.3, -1.1;
  const auto& p = net.params();
  double y = p[3](0, 0);
  for (int h = 0; h < 8; ++h) {
    double z = p[1](h, 0);
    for (int i = 0; i < 2; ++i) z += p[0](h, i) * x[i];
    y += p[2](0, h) * std::max(z, 0.0);
  }
  EXPECT_NEAR(net.forward_one(x)[0], y, 1e-14);
}

TEST(Mlp, TanhHeadBounded) {
  Rng rng(2);
  const Mlp net({4, 16, 2}, OutputHead::Tanh, rng);
  const Matrix out = net.forward(random_matrix(rng, 4, 100, 50.0));
  EXPECT_LE(out.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Mlp, GaussianLogVarClamped) {
  ParamList p{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  p[1](0, 0) = 3.0;
  p[1](1, 0) = 50.0;
  const Mlp net({1, 2}, OutputHead::Gaussian, p);
  const Vector out = net.forward_one(Vector::Zero(1));
  EXPECT_EQ(out[0], 3.0);
  EXPECT_EQ(out[1], kMaxLogVar);
}

TEST(Mlp, RejectsWrongInputWidth) {
  Rng rng(1);
  const Mlp net({3, 2}, OutputHead::Linear, rng);
  try {
    net.forward(Matrix::Zero(4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IncompatibleEncoding);
  }
}

TEST(Backward, LinearSquaredLossClosedForm) {
  const Mlp net({3, 1}, OutputHead::Linear,
                ParamList{Matrix::Constant(1, 3, 0.5), Matrix::Constant(1, 1, 0.1)});
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  const double y = 0.7;
  Tape tape;
  const double y_hat = net.forward(Matrix(x), tape)(0, 0);
  const ParamList g = net.backward(tape, Matrix::Constant(1, 1, 2 * (y_hat - y)));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[0](0, i), 2 * (y_hat - y) * x[i], 1e-15);
  EXPECT_NEAR(g[1](0, 0), 2 * (y_hat - y), 1e-15);
}

TEST(Backward, ZeroUpstreamZeroGrads) {
  Rng rng(7);
  const Mlp net({3, 5, 2}, OutputHead::Tanh, rng);
  Tape tape;
  net.forward(random_matrix(rng, 3, 4), tape);
  for (const auto& g : net.backward(tape, Matrix::Zero(2, 4))) EXPECT_TRUE(g.isZero(0.0));
}

class GradientHeads : public ::testing::TestWithParam<OutputHead> {};

TEST_P(GradientHeads, FiniteDifferencesAgree) {
  Rng rng(100 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 1 + static_cast<int>(rng.index(4));
    const int hidden = 2 + static_cast<int>(rng.index(6));
    int out = 1 + static_cast<int>(rng.index(3));
    if (GetParam() == OutputHead::Gaussian) out *= 2;
    const Mlp net({in, hidden, hidden, out}, GetParam(), rng);
    const Matrix x = random_matrix(rng, in, 3);
    const Matrix d_out = random_matrix(rng, out, 3);
    const auto r = testing::check_gradients(net, x, d_out);
    EXPECT_LE(r.max_rel_error, 1e-4);
    EXPECT_LE(r.max_input_rel_error, 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(AllHeads, GradientHeads,
                         ::testing::Values(OutputHead::Linear, OutputHead::Tanh,
                                           OutputHead::Gaussian));

TEST(Adam, ZeroGradientLeavesParams) {
  ParamList p{Matrix::Constant(2, 2, 1.5)};
  Adam opt(p, AdamConfig{});
  opt.step(p, ParamList{Matrix::Zero(2, 2)});
  EXPECT_TRUE(p[0].isApprox(Matrix::Constant(2, 2, 1.5), 0.0));
}

TEST(Adam, FirstStepIsSignTimesLr) {
  ParamList p{Matrix::Zero(1, 3)};
  Adam opt(p, AdamConfig{1e-3});
  Matrix g(1, 3);
  g << 0.2, -5.0, 1e-3;
  opt.step(p, ParamList{g});
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
  EXPECT_NEAR(p[0](0, 0), -1e-3, 1e-6);
  EXPECT_NEAR(p[0](0, 1), 1e-3, 1e-6);
  EXPECT_NEAR(p[0](0, 2), -1e-3, 1e-6);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, NonFiniteGradientThrows) {
  ParamList p{Matrix::Zero(1, 1)};
  Adam opt(p, AdamConfig{});
  try {
    opt.step(p, ParamList{Matrix::Constant(1, 1, std::nan(""))});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
  }
  EXPECT_EQ(p[0](0, 0), 0.0);
}

TEST(SoftUpdate, ZeroRateAndHandValue) {
  ParamList target{Matrix::Zero(2, 1)}, online{Matrix::Ones(2, 1)};
  soft_update(target, online, 0.0);
  EXPECT_TRUE(target[0].isZero(0.0));
  soft_update(target, online, 0.01);
  EXPECT_NEAR(target[0](0, 0), 0.01, 1e-15);
  EXPECT_NEAR(target[0](1, 0), 0.01, 1e-15);
}

TEST(ReplayBuffer, RingOverwriteAndDistinctSamples) {
  ReplayBuffer<int> buf(4, 1);
  for (int k = 0; k < 6; ++k) buf.push(k);
  EXPECT_EQ(buf.size(), 4u);
  std::vector<int> held(buf.items());
  std::sort(held.begin(), held.end());
  EXPECT_EQ(held, (std::vector<int>{2, 3, 4, 5}));
  auto idx = buf.sample_indices(10);
  EXPECT_EQ(idx.size(), 4u);
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(std::unique(idx.begin(), idx.end()), idx.end());
}

TEST(ReplayBuffer, SameSeedSameSamples) {
  ReplayBuffer<int> a(100, 9), b(100, 9);
  for (int k = 0; k < 50; ++k) {
    a.push(k);
    b.push(k);
  }
  EXPECT_EQ(a.sample_indices(10), b.sample_indices(10));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(3);
  Mlp net({3, 4, 2}, OutputHead::Gaussian, rng);
  Adam opt(net.params(), AdamConfig{2e-3});
  Tape tape;
  net.forward(random_matrix(rng, 3, 2), tape);
  opt.step(net.params(), net.backward(tape, random_matrix(rng, 2, 2)));
  Checkpoint ck;
  ck.put_mlp("net", net);
  ck.put_adam("opt", opt);
  ck.put_string("note", "hello");
  const std::string path = ::testing::TempDir() + "ck_test.bin";
  ck.save(path);
  const Checkpoint back = Checkpoint::load(path);
  const Mlp net2 = back.mlp("net");
  EXPECT_EQ(net2.widths(), net.widths());
  EXPECT_EQ(net2.head(), net.head());
  for (std::size_t k = 0; k < net.params().size(); ++k)
    EXPECT_TRUE(net2.params()[k] == net.params()[k]);
  const Adam opt2 = back.adam("opt");
  EXPECT_EQ(opt2.steps(), 1);
  EXPECT_EQ(opt2.config().lr, 2e-3);
  EXPECT_TRUE(opt2.second_moment()[0] == opt.second_moment()[0]);
  EXPECT_EQ(back.string("note"), "hello");
  std::remove(path.c_str());
}

TEST(Checkpoint, CorruptFileRejected) {
  const std::string path = ::testing::TempDir() + "ck_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(Checkpoint::load(path), Error);
  EXPECT_THROW(Checkpoint::load(path + ".missing"), Error);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace swarm::nn
