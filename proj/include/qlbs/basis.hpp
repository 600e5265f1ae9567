#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qlbs/kernels.hpp"

namespace qlbs::basis {

/// Clamped B-spline basis. `order` is polynomial degree + 1, so
/// knots.size() == n_basis + order and the domain is [knots[order-1], knots[n_basis]].
struct BasisSpec {
  int n_basis = 0;
  int order = 0;
  std::vector<double> knots;
  double lo = 0.0;
  double hi = 0.0;

  int degree() const { return order - 1; }
  void validate() const;
};

/// Design matrix at one time step: row k holds the basis evaluated at path k.
struct FeatureMatrix {
  Eigen::MatrixXd values;
};

/// Clamped uniform knots over [data_lo - d, data_hi + d], d = 1e-6 (data_hi - data_lo).
BasisSpec make_spec(double data_lo, double data_hi, int n_basis, int order);

/// make_spec over the global min/max of every entry of `states`.
BasisSpec make_spec_for(const Eigen::Ref<const Eigen::MatrixXd>& states, int n_basis, int order);

/// Writes the n_basis values at x into `out`. Points outside the domain are
/// clamped to the nearest edge.
void eval_basis_into(const BasisSpec& spec, double x, std::span<double> out);

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x);

FeatureMatrix feature_matrix(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& states_at_t,
                             Exec exec = Exec::Parallel);

}  // namespace qlbs::basis
