#include <gtest/gtest.h>

#include "gqmu/augment.hpp"
#include "test_util.hpp"

using namespace gqmu;
using gqmu::testing::random_tensor;

TEST(Tau, SmallestCoveringFactor) {
  EXPECT_EQ(determine_tau(4, 6), 2u);
  EXPECT_EQ(determine_tau(4, 4), 1u);
  EXPECT_EQ(determine_tau(4, 9), 3u);
  EXPECT_EQ(determine_tau(3, 12), 4u);
  EXPECT_THROW(determine_tau(0, 3), InvalidInput);
}

TEST(Srf, KroneckerStructure) {
  const Mat d = build_srf(3, 2);
  ASSERT_EQ(d.rows(), 3);
  ASSERT_EQ(d.cols(), 6);
  for (int p = 0; p < 3; ++p)
    for (int m = 0; m < 6; ++m) EXPECT_EQ(d(p, m), m / 2 == p ? 1.0 : 0.0);
}

TEST(Bsp, VirtualBandsFollowDifferenceRule) {
  std::mt19937_64 rng(10);
  const Tensor3 z = random_tensor(2, 3, 4, rng, 0.5, 1.0);
  const Tensor3 v = bsp_split_raw(z, 2);
  ASSERT_EQ(v.channels(), 8u);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t q = 0; q < 4; ++q) {
        const double h = q + 1 < 4 ? 0.25 * (z(r, c, q + 1) - z(r, c, q)) : 0.25 * (z(r, c, 3) - z(r, c, 2));
        EXPECT_NEAR(v(r, c, 2 * q), 0.5 * (z(r, c, q) - h), 1e-15);
        EXPECT_NEAR(v(r, c, 2 * q + 1), 0.5 * (z(r, c, q) + h), 1e-15);
      }
}

TEST(Bsp, ExactReconstructionThroughSrf) {
  std::mt19937_64 rng(11);
  for (std::size_t tau : {2u, 4u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Tensor3 z = random_tensor(8, 8, 4, rng, 0.5, 1.0);
      const Tensor3 back = mode3_mul(bsp_split_raw(z, tau), build_srf(4, tau));
      double num = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) num += std::pow(back.data()[i] - z.data()[i], 2);
      EXPECT_LE(std::sqrt(num) / z.frobenius_norm(), 1e-12);
    }
  }
}

TEST(Bsp, RejectsUnsupportedInputs) {
  std::mt19937_64 rng(12);
  EXPECT_THROW(bsp_split(random_tensor(2, 2, 4, rng), 3), UnsupportedTau);
  EXPECT_THROW(bsp_split(random_tensor(2, 2, 1, rng), 2), InvalidInput);
}

TEST(Bsp, ClipsOnlyAtTheEnd) {
  // Band 0 tiny next to a large band 1 makes the first virtual band negative.
  Tensor3 z(1, 1, 2, std::vector<double>{0.1, 1.0});
  const BspResult r = bsp_split(z, 2);
  EXPECT_EQ(r.clipped, 1u);
  EXPECT_EQ(r.z_tilde(0, 0, 0), 0.0);
  EXPECT_LT(bsp_split_raw(z, 2)(0, 0, 0), 0.0);
}

TEST(Denoiser, GaussianTapsNormalizedAndSymmetric) {
  const auto taps = gaussian_taps(0.5);
  double s = 0.0;
  for (double t : taps) s += t;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_EQ(taps[0], taps[4]);
  EXPECT_EQ(taps[1], taps[3]);
  EXPECT_GT(taps[2], taps[1]);
}

TEST(Denoiser, GaussianPreservesConstants) {
  Tensor3 t(5, 6, 2, 0.75);
  const Tensor3 out = gaussian_denoiser(0.7)(t);
  EXPECT_LE(gqmu::testing::max_abs_diff(out, t), 1e-15);
}

TEST(Denoiser, GaussianMatchesDirectConvolution) {
  std::mt19937_64 rng(13);
  const Tensor3 t = random_tensor(5, 4, 1, rng);
  const auto taps = gaussian_taps(0.5);
  const Tensor3 out = gaussian_blur(t, 0.5);
  auto clampi = [](long v, long n) { return std::clamp(v, 0L, n - 1); };
  for (long r = 0; r < 5; ++r)
    for (long c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
          s += taps[i + 2] * taps[j + 2] *
               t(static_cast<std::size_t>(clampi(r + i, 5)), static_cast<std::size_t>(clampi(c + j, 4)), 0);
      EXPECT_NEAR(out(static_cast<std::size_t>(r), static_cast<std::size_t>(c), 0), s, 1e-14);
    }
}

TEST(Denoiser, Parsing) {
  EXPECT_EQ(parse_denoiser("identity").name, "identity");
  EXPECT_NO_THROW(parse_denoiser("gaussian"));
  EXPECT_NO_THROW(parse_denoiser("gaussian:1.5"));
  EXPECT_THROW(parse_denoiser("dncnn"), InvalidInput);
  EXPECT_THROW(parse_denoiser("gaussian:-1"), InvalidInput);
  EXPECT_THROW(parse_denoiser("gaussian:abc"), InvalidInput);
}

TEST(Refine, ProjectsAndChecksContract) {
  Tensor3 t(1, 2, 1, std::vector<double>{-0.5, 0.5});
  const Tensor3 out = refine_virtual_hsi(t, identity_denoiser());
  EXPECT_EQ(out.data()[0], 0.0);
  EXPECT_EQ(out.data()[1], 0.5);
  Denoiser bad{"bad", [](const Tensor3&) { return Tensor3(1, 1, 1); }};
  EXPECT_THROW(refine_virtual_hsi(t, bad), ContractViolation);
  Denoiser nan{"nan", [](const Tensor3& x) {
                 Tensor3 y = x;
                 y.data()[0] = std::nan("");
                 return y;
               }};
  EXPECT_THROW(refine_virtual_hsi(t, nan), ContractViolation);
}
