#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "qlbs/kernels.hpp"

namespace qlbs::numerics {

/// Thrown when an unregularised system is singular.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default relative ridge scale; the absolute penalty is scale * trace(A^T A) / M.
inline constexpr double kDefaultRidgeScale = 1e-9;

struct RidgeProblem {
  Eigen::MatrixXd design;  // K x M
  Eigen::VectorXd target;  // K
  double regularizer = 0.0;
};

/// Solves (A^T A + reg I) x = A^T b.
Eigen::VectorXd ridge_solve(const RidgeProblem& problem, Exec exec = Exec::Parallel);

/// Solves (normal + reg I) x = rhs for a symmetric positive semidefinite `normal`.
/// With reg == 0 a (numerically) singular matrix raises RankDeficientError.
Eigen::VectorXd solve_normal_equations(const Eigen::Ref<const Eigen::MatrixXd>& normal,
                                       const Eigen::Ref<const Eigen::VectorXd>& rhs, double reg);

/// scale * trace(normal) / M; zero for an all-zero matrix.
double relative_ridge(const Eigen::Ref<const Eigen::MatrixXd>& normal, double scale);

struct CrossSectionStats {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by K)
};

CrossSectionStats cross_sectional_stats(const Eigen::Ref<const Eigen::VectorXd>& values);

Eigen::VectorXd demeaned(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace qlbs::numerics
