#include "qlbs/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qlbs::numerics {

Eigen::VectorXd solve_normal_equations(const Eigen::Ref<const Eigen::MatrixXd>& normal,
                                       const Eigen::Ref<const Eigen::VectorXd>& rhs, double reg) {
  const Eigen::Index m = normal.rows();
  if (normal.cols() != m || rhs.size() != m) throw std::invalid_argument("normal equations: size mismatch");
  if (!(reg >= 0.0) || !std::isfinite(reg)) throw std::invalid_argument("regularizer must be finite and >= 0");
  if (m == 0) return Eigen::VectorXd();

  Eigen::MatrixXd a = normal;
  a.diagonal().array() += reg;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw RankDeficientError("LDLT factorisation failed");

  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double tol = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * d.maxCoeff();
  if (d.maxCoeff() == 0.0 || (reg == 0.0 && d.minCoeff() <= tol)) {
    throw RankDeficientError("normal matrix is singular (pivot " + std::to_string(d.minCoeff()) +
                             "); use a positive regularizer");
  }
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (!x.allFinite()) throw RankDeficientError("normal equations produced a non-finite solution");
  return x;
}

double relative_ridge(const Eigen::Ref<const Eigen::MatrixXd>& normal, double scale) {
  if (normal.rows() == 0) return 0.0;
  return scale * normal.trace() / static_cast<double>(normal.rows());
}

Eigen::VectorXd ridge_solve(const RidgeProblem& problem, Exec exec) {
  if (problem.design.rows() != problem.target.size())
    throw std::invalid_argument("ridge: design rows and target length differ");
  const Eigen::MatrixXd gram = kernels::weighted_gram(problem.design, {}, exec);
  const Eigen::VectorXd rhs = kernels::weighted_moment(problem.design, problem.target, exec);
  return solve_normal_equations(gram, rhs, problem.regularizer);
}

CrossSectionStats cross_sectional_stats(const Eigen::Ref<const Eigen::VectorXd>& values) {
  CrossSectionStats s;
  if (values.size() == 0) return s;
  s.mean = values.mean();
  s.variance = (values.array() - s.mean).square().mean();
  return s;
}

Eigen::VectorXd demeaned(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) return values;
  return (values.array() - values.mean()).matrix();
}

}  // namespace qlbs::numerics
