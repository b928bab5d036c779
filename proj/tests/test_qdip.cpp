#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gqmu/qdip.hpp"
#include "test_util.hpp"

using namespace gqmu;
using gqmu::testing::random_mat;
using gqmu::testing::random_tensor;

namespace {

QdipConfig small_config() {
  QdipConfig c;
  c.n_qubits = 4;  // 2x2 seed
  c.widths = {3};
  c.iterations = 30;
  c.seed = 5;
  return c;
}

FeatureMap random_map(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng) {
  FeatureMap m(c, h, w);
  std::normal_distribution<double> n;
  for (double& v : m.data) v = n(rng);
  return m;
}

// Scatter form: each input pixel stamps its 4x4 kernel at (2y-1, 2x-1).
FeatureMap tconv_oracle(const TConvLayer& l, const FeatureMap& in) {
  FeatureMap out(l.out_channels, in.height * 2, in.width * 2);
  for (std::size_t co = 0; co < l.out_channels; ++co)
    for (std::size_t y = 0; y < out.height; ++y)
      for (std::size_t x = 0; x < out.width; ++x) out.at(co, y, x) = l.bias[co];
  for (std::size_t ci = 0; ci < l.in_channels; ++ci)
    for (std::size_t co = 0; co < l.out_channels; ++co)
      for (std::size_t iy = 0; iy < in.height; ++iy)
        for (std::size_t ix = 0; ix < in.width; ++ix)
          for (int ky = 0; ky < 4; ++ky)
            for (int kx = 0; kx < 4; ++kx) {
              const long oy = 2L * static_cast<long>(iy) - 1 + ky;
              const long ox = 2L * static_cast<long>(ix) - 1 + kx;
              if (oy < 0 || ox < 0 || oy >= static_cast<long>(out.height) || ox >= static_cast<long>(out.width))
                continue;
              out.at(co, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) +=
                  l.weight[(ci * l.out_channels + co) * 16 + static_cast<std::size_t>(ky * 4 + kx)] *
                  in.at(ci, iy, ix);
            }
  return out;
}

double loss_at(const QdipParams& p, const Tensor3& zh, const Mat& a0, const QdipConfig& c) {
  return qdip_loss(zh, qdip_forward(p, zh.rows(), zh.cols(), static_cast<std::size_t>(a0.cols()), c.readout,
                                    c.leaky_slope),
                   a0);
}

}  // namespace

TEST(Qdip, SeedSideAndDepth) {
  EXPECT_EQ(seed_side(16, Readout::pauli_z), 4u);
  EXPECT_EQ(seed_side(4, Readout::probabilities), 4u);
  EXPECT_THROW(seed_side(3, Readout::pauli_z), ConfigError);
  EXPECT_EQ(decoder_depth(4, 32, 32), 3u);
  EXPECT_THROW(decoder_depth(4, 30, 30), ConfigError);
  EXPECT_THROW(decoder_depth(4, 32, 16), ConfigError);
  EXPECT_THROW(decoder_depth(4, 4, 4), ConfigError);
}

TEST(Qdip, ChannelsKeepWidthTail) {
  QdipConfig c;
  const auto ch = decoder_channels(c, 3, 6);
  EXPECT_EQ(ch, (std::vector<std::size_t>{1, 16, 8, 6}));
}

TEST(Qdip, TConvMatchesScatterOracle) {
  std::mt19937_64 rng(40);
  TConvLayer l;
  l.in_channels = 2;
  l.out_channels = 3;
  std::normal_distribution<double> n;
  l.weight.resize(2 * 3 * 16);
  for (double& w : l.weight) w = n(rng);
  l.bias = {0.1, -0.2, 0.3};
  const FeatureMap in = random_map(2, 3, 3, rng);
  const FeatureMap got = tconv_forward(l, in);
  const FeatureMap want = tconv_oracle(l, in);
  ASSERT_EQ(got.data.size(), want.data.size());
  for (std::size_t i = 0; i < got.data.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-12);
}

TEST(Qdip, TConvBackwardIsAdjoint) {
  // <tconv(x) - b, g> == <x, backward(g)>
  std::mt19937_64 rng(41);
  TConvLayer l;
  l.in_channels = 2;
  l.out_channels = 2;
  std::normal_distribution<double> n;
  l.weight.resize(64);
  for (double& w : l.weight) w = n(rng);
  l.bias = {0.0, 0.0};
  const FeatureMap x = random_map(2, 4, 4, rng);
  const FeatureMap g = random_map(2, 8, 8, rng);
  TConvLayer grad = l;
  std::fill(grad.weight.begin(), grad.weight.end(), 0.0);
  grad.bias = {0.0, 0.0};
  const FeatureMap gx = tconv_backward(l, x, g, grad);
  const FeatureMap y = tconv_forward(l, x);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) lhs += y.data[i] * g.data[i];
  for (std::size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * gx.data[i];
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST(Qdip, SoftmaxIsOnSimplex) {
  std::mt19937_64 rng(42);
  const Tensor3 s = softmax_channels(random_map(5, 4, 4, rng));
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      double sum = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_GT(s(r, c, k), 0.0);
        sum += s(r, c, k);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Qdip, ZeroDecoderGivesUniform) {
  QdipConfig c = small_config();
  QdipParams p = qdip_init(c, 8, 8, 4);
  for (auto& l : p.decoder) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  const Tensor3 s = qdip_forward(p, 8, 8, 4);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.data()[i], 0.25, 1e-15);
}

TEST(Qdip, BackpropMatchesFiniteDifferences) {
  for (Readout r : {Readout::pauli_z, Readout::probabilities}) {
    QdipConfig c = small_config();
    c.readout = r;
    if (r == Readout::probabilities) c.n_qubits = 2;  // 4 probabilities, 2x2 seed
    std::mt19937_64 rng(43);
    const Tensor3 zh = random_tensor(8, 8, 3, rng);
    const Mat a0 = random_mat(3, 4, rng).cwiseAbs();
    QdipParams p = qdip_init(c, 8, 8, 4);
    QdipParams g = detail::zero_like(p);
    const double loss = qdip_loss_and_grad(p, zh, a0, c.readout, c.leaky_slope, g);
    EXPECT_NEAR(loss, loss_at(p, zh, a0, c), 1e-10 * loss);

    const double h = 1e-5;
    auto check = [&](double& slot, double analytic, const char* what) {
      const double keep = slot;
      slot = keep + h;
      const double lp = loss_at(p, zh, a0, c);
      slot = keep - h;
      const double lm = loss_at(p, zh, a0, c);
      slot = keep;
      const double fd = (lp - lm) / (2 * h);
      EXPECT_NEAR(analytic, fd, 1e-5 * std::max(1.0, std::abs(fd))) << what;
    };
    QdipParams& mp = p;
    for (std::size_t i = 0; i < 5; ++i) check(mp.decoder[0].weight[i * 7], g.decoder[0].weight[i * 7], "w0");
    check(mp.decoder[0].bias[1], g.decoder[0].bias[1], "b0");
    for (std::size_t i = 0; i < 5; ++i) check(mp.decoder[1].weight[i * 11], g.decoder[1].weight[i * 11], "w1");
    check(mp.decoder[1].bias[2], g.decoder[1].bias[2], "b1");
    auto pf = mp.circuit.families();
    auto gf = g.circuit.families();
    for (std::size_t f = 0; f < pf.size(); ++f)
      for (std::size_t i = 0; i < pf[f]->size(); ++i) check((*pf[f])[i], (*gf[f])[i], "circuit");
  }
}

TEST(Qdip, TrainingReducesLossAndIsDeterministic) {
  std::mt19937_64 rng(44);
  const Mat a0 = random_mat(3, 4, rng).cwiseAbs();
  QdipConfig c = small_config();
  // Z_h consistent with some simplex abundances.
  const Tensor3 s_true = qdip_forward(qdip_init(c, 8, 8, 4), 8, 8, 4);
  const Tensor3 zh = mode3_mul(s_true, a0);
  c.seed = 99;
  const QdipResult a = qdip_train(zh, a0, c);
  const QdipResult b = qdip_train(zh, a0, c);
  ASSERT_EQ(a.loss_trace.size(), c.iterations + 1);
  EXPECT_LT(a.loss_trace.back(), a.loss_trace.front());
  EXPECT_GT(a.circuit_simulations, 0u);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_TRUE(std::ranges::equal(a.s_qu.data(), b.s_qu.data()));
}

TEST(Qdip, OutputPermutesWithLastLayerChannels) {
  std::mt19937_64 rng(45);
  const QdipConfig c = small_config();
  const QdipParams p = qdip_init(c, 8, 8, 3);
  QdipParams q = p;
  const std::size_t perm[3] = {2, 0, 1};
  auto& last = q.decoder.back();
  const auto& orig = p.decoder.back();
  for (std::size_t ci = 0; ci < last.in_channels; ++ci)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t t = 0; t < 16; ++t)
        last.weight[(ci * 3 + k) * 16 + t] = orig.weight[(ci * 3 + perm[k]) * 16 + t];
  for (std::size_t k = 0; k < 3; ++k) last.bias[k] = orig.bias[perm[k]];
  const Tensor3 sp = qdip_forward(p, 8, 8, 3);
  const Tensor3 sq = qdip_forward(q, 8, 8, 3);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t cc = 0; cc < 8; ++cc)
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sq(r, cc, k), sp(r, cc, perm[k]), 1e-14);

  const Mat a0 = random_mat(2, 3, rng).cwiseAbs();
  Mat a0p(2, 3);
  for (std::size_t k = 0; k < 3; ++k) a0p.col(static_cast<Eigen::Index>(k)) = a0.col(static_cast<Eigen::Index>(perm[k]));
  const Tensor3 zh = random_tensor(8, 8, 2, rng);
  EXPECT_NEAR(qdip_loss(zh, sp, a0), qdip_loss(zh, sq, a0p), 1e-10);
}

TEST(Qdip, RejectsBadInputs) {
  std::mt19937_64 rng(46);
  QdipConfig c = small_config();
  const Tensor3 zh = random_tensor(8, 8, 3, rng);
  Mat a0 = random_mat(3, 4, rng).cwiseAbs();
  EXPECT_THROW(qdip_train(zh, a0.topRows(2), c), InvalidInput);
  a0(0, 0) = -1.0;
  EXPECT_THROW(qdip_train(zh, a0, c), InvalidInput);
  EXPECT_THROW(qdip_init(c, 12, 12, 4), ConfigError);
  EXPECT_THROW(qdip_init(c, 8, 8, 0), ConfigError);
}
