#include "qlbs/numerics.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlbs/kernels.hpp"

namespace qlbs::numerics {
namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(rows, cols);
  for (auto& v : m.reshaped()) v = d(gen);
  return m;
}

TEST(RidgeSolve, MatchesDenseInverseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 30 + static_cast<int>(seed) * 7;
    const int m = 2 + static_cast<int>(seed % 6);
    RidgeProblem p{random_matrix(k, m, seed), random_matrix(k, 1, seed + 100), seed % 2 ? 0.5 : 0.0};
    const auto x = ridge_solve(p);
    const auto ref = oracle::ridge_by_inverse(p.design, p.target, p.regularizer);
    EXPECT_LE((x - ref).cwiseAbs().maxCoeff(), 1e-8) << "seed " << seed;
  }
}

TEST(RidgeSolve, RecoversExactSolution) {
  const auto a = random_matrix(50, 4, 9);
  const Eigen::Vector4d beta(1.0, -2.0, 0.5, 3.0);
  const auto x = ridge_solve({a, a * beta, 0.0});
  EXPECT_LE((x - beta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RidgeSolve, SingularWithoutRegularizerThrows) {
  Eigen::MatrixXd a = random_matrix(10, 3, 1);
  a.col(2) = a.col(0);
  const Eigen::VectorXd b = random_matrix(10, 1, 2);
  EXPECT_THROW(ridge_solve({a, b, 0.0}), RankDeficientError);
  const auto x = ridge_solve({a, b, 1e-6});
  EXPECT_TRUE(x.allFinite());
  EXPECT_LE((x - oracle::ridge_by_inverse(a, b, 1e-6)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RidgeSolve, FewerRowsThanUnknownsNeedsRidge) {
  const auto a = random_matrix(3, 6, 4);
  const Eigen::VectorXd b = random_matrix(3, 1, 5);
  EXPECT_THROW(ridge_solve({a, b, 0.0}), RankDeficientError);
  EXPECT_NO_THROW(ridge_solve({a, b, 1e-3}));
}

TEST(RidgeSolve, RejectsBadInput) {
  EXPECT_THROW(ridge_solve({random_matrix(5, 2, 1), random_matrix(4, 1, 1), 0.0}), std::invalid_argument);
  EXPECT_THROW(ridge_solve({random_matrix(5, 2, 1), random_matrix(5, 1, 1), -1.0}), std::invalid_argument);
}

TEST(RelativeRidge, ScalesWithTrace) {
  Eigen::Matrix3d m = Eigen::Vector3d(1, 2, 3).asDiagonal();
  EXPECT_DOUBLE_EQ(relative_ridge(m, 1e-9), 2e-9);
  EXPECT_EQ(relative_ridge(Eigen::Matrix3d::Zero(), 1e-9), 0.0);
}

TEST(Kernels, WeightedGramMatchesDense) {
  // sparse rows, like a B-spline design
  Eigen::MatrixXd a = random_matrix(1500, 8, 3);
  for (Eigen::Index k = 0; k < a.rows(); ++k)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if ((k + j) % 3) a(k, j) = 0.0;
  const Eigen::VectorXd w = random_matrix(1500, 1, 4).array().square();
  const Eigen::MatrixXd dense = a.transpose() * w.asDiagonal() * a;
  const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
  const auto serial = kernels::weighted_gram(a, ws, Exec::Serial);
  const auto parallel = kernels::weighted_gram(a, ws, Exec::Parallel);
  EXPECT_LE((serial - dense).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((parallel - dense).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(parallel, parallel.transpose());
  EXPECT_LE((kernels::weighted_gram(a, {}, Exec::Parallel) - a.transpose() * a).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kernels, MomentMatchesDense) {
  const auto a = random_matrix(2000, 5, 6);
  const Eigen::VectorXd v = random_matrix(2000, 1, 7);
  const Eigen::VectorXd dense = a.transpose() * v;
  EXPECT_LE((kernels::weighted_moment(a, v, Exec::Serial) - dense).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((kernels::weighted_moment(a, v, Exec::Parallel) - dense).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CrossSection, PopulationStatistics) {
  const Eigen::Vector4d v(1, 2, 3, 6);
  const auto s = cross_sectional_stats(v);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.variance, 3.5);
  EXPECT_DOUBLE_EQ(s.variance, oracle::population_variance(v));
  const auto d = demeaned(v);
  EXPECT_NEAR(d.sum(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(d(3), 3.0);
}

}  // namespace
}  // namespace qlbs::numerics
