#include <gtest/gtest.h>

#include "gqmu/tensor.hpp"
#include "test_util.hpp"

using namespace gqmu;
using gqmu::testing::random_mat;
using gqmu::testing::random_tensor;

TEST(Tensor3, BandSequentialLayout) {
  Tensor3 t(2, 3, 2);
  t(1, 2, 1) = 7.0;
  EXPECT_EQ(t.data()[1 * 6 + 1 * 3 + 2], 7.0);
  EXPECT_EQ(t.channel(1)[5], 7.0);
  EXPECT_EQ(t.dims_string(), "2x3x2");
  EXPECT_THROW(Tensor3(2, 2, 2, std::vector<double>(7)), InvalidInput);
}

TEST(Tensor3, Mode3ProductMatchesLoops) {
  std::mt19937_64 rng(1);
  const Tensor3 t = random_tensor(3, 4, 5, rng, -1, 1);
  const Mat m = random_mat(2, 5, rng);
  const Tensor3 out = mode3_mul(t, m);
  ASSERT_EQ(out.channels(), 2u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 5; ++k) s += m(j, k) * t(r, c, k);
        EXPECT_NEAR(out(r, c, j), s, 1e-13);
      }
  EXPECT_THROW(mode3_mul(t, random_mat(2, 4, rng)), InvalidInput);
}

TEST(Tensor3, MatricizationColumnOrder) {
  std::mt19937_64 rng(2);
  const Tensor3 t = random_tensor(3, 2, 4, rng);
  const Mat m = mode3_matricize(t);
  ASSERT_EQ(m.rows(), 4);
  ASSERT_EQ(m.cols(), 6);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(unfold_column(r, c, 3))), t(r, c, k));
  EXPECT_EQ(fold3(m, 3, 2), t);
  EXPECT_THROW(fold3(m, 4, 2), InvalidInput);
}

TEST(Tensor3, Mode3ProductIsMatrixProductOfUnfolding) {
  std::mt19937_64 rng(3);
  const Tensor3 t = random_tensor(4, 4, 3, rng);
  const Mat m = random_mat(5, 3, rng);
  const Mat lhs = mode3_matricize(mode3_mul(t, m));
  const Mat rhs = m * mode3_matricize(t);
  EXPECT_LE((lhs - rhs).norm(), 1e-12);
}

TEST(SoftThreshold, ScalarCases) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(-0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(0.5, 0.0), 0.5);
  EXPECT_THROW(soft_threshold(Tensor3(1, 1, 1), -1.0), InvalidInput);
}

TEST(SoftThreshold, IsProximalOperatorOfL1) {
  // eta_c(x) minimizes 1/2 (y - x)^2 + c|y|; check against a dense grid.
  for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9}) {
    const double c = 0.5;
    double best = 0.0, best_v = 1e300;
    for (int i = -40000; i <= 40000; ++i) {
      const double y = i * 1e-4;
      const double v = 0.5 * (y - x) * (y - x) + c * std::abs(y);
      if (v < best_v) best_v = v, best = y;
    }
    EXPECT_NEAR(soft_threshold(x, c), best, 1e-4);
  }
}

TEST(Projection, ClampsNegatives) {
  Tensor3 t(1, 2, 1, std::vector<double>{-1.0, 2.0});
  EXPECT_EQ(project_nonneg(t).data()[0], 0.0);
  EXPECT_EQ(project_nonneg(t).data()[1], 2.0);
  Mat m(1, 2);
  m << -3, 4;
  EXPECT_EQ(project_nonneg(m)(0, 0), 0.0);
}

TEST(Kron, MatchesDefinition) {
  std::mt19937_64 rng(4);
  const Mat a = random_mat(2, 3, rng), b = random_mat(3, 2, rng);
  const Mat k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 2; ++q) EXPECT_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(SolveSpd, MatchesEigenLlt) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat r = random_mat(6, 6, rng);
    const Mat g = r * r.transpose() + Mat::Identity(6, 6);
    const Mat h = random_mat(6, 3, rng);
    const Mat x = solve_spd(g, h);
    const Eigen::MatrixXd ref = Eigen::MatrixXd(g).llt().solve(Eigen::MatrixXd(h));
    EXPECT_LE((Eigen::MatrixXd(x) - ref).norm(), 1e-10 * ref.norm());
  }
  EXPECT_DOUBLE_EQ(solve_spd(2.0 * Mat::Identity(2, 2), Mat::Ones(2, 1))(1, 0), 0.5);
}

TEST(SolveSpd, ReportsFailingPivot) {
  Mat g = Mat::Identity(3, 3);
  g(2, 2) = -1.0;
  try {
    solve_spd(g, Mat::Ones(3, 1));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.pivot(), 2u);
  }
}
