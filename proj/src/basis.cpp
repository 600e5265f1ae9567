#include "qlbs/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qlbs::basis {

namespace {
constexpr int kMaxOrder = 32;
}

void BasisSpec::validate() const {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("spline order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (n_basis < order) throw std::invalid_argument("n_basis must be at least the spline order");
  if (knots.size() != static_cast<std::size_t>(n_basis + order))
    throw std::invalid_argument("knot vector length must equal n_basis + order");
  if (!std::is_sorted(knots.begin(), knots.end())) throw std::invalid_argument("knots must be nondecreasing");
  if (lo != knots[static_cast<std::size_t>(order - 1)] || hi != knots[static_cast<std::size_t>(n_basis)])
    throw std::invalid_argument("domain must match the clamped knot ends");
  if (!(lo < hi)) throw std::invalid_argument("basis domain is empty");
}

BasisSpec make_spec(double data_lo, double data_hi, int n_basis, int order) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("spline order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (n_basis < order) throw std::invalid_argument("n_basis must be at least the spline order");
  if (!std::isfinite(data_lo) || !std::isfinite(data_hi) || !(data_lo < data_hi))
    throw std::invalid_argument("make_spec needs a finite range with data_lo < data_hi");

  const double pad = 1e-6 * (data_hi - data_lo);
  BasisSpec spec;
  spec.n_basis = n_basis;
  spec.order = order;
  spec.lo = data_lo - pad;
  spec.hi = data_hi + pad;
  const int n_interior = n_basis - order;
  spec.knots.reserve(static_cast<std::size_t>(n_basis + order));
  spec.knots.insert(spec.knots.end(), static_cast<std::size_t>(order), spec.lo);
  const double step = (spec.hi - spec.lo) / (n_interior + 1);
  for (int i = 1; i <= n_interior; ++i) spec.knots.push_back(spec.lo + i * step);
  spec.knots.insert(spec.knots.end(), static_cast<std::size_t>(order), spec.hi);
  return spec;
}

BasisSpec make_spec_for(const Eigen::Ref<const Eigen::MatrixXd>& states, int n_basis, int order) {
  double lo = states.minCoeff();
  double hi = states.maxCoeff();
  // (nearly) constant state, e.g. zero volatility: any small domain around it
  const double min_width = 1e-6 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (hi - lo < min_width) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5 * min_width;
    hi = mid + 0.5 * min_width;
  }
  return make_spec(lo, hi, n_basis, order);
}

void eval_basis_into(const BasisSpec& spec, double x, std::span<double> out) {
  const int p = spec.degree();
  const int last = spec.n_basis - 1;
  const auto& u = spec.knots;
  std::fill(out.begin(), out.end(), 0.0);
  x = std::clamp(x, spec.lo, spec.hi);

  // knot span i with u[i] <= x < u[i+1]; the right end belongs to the last span
  int span = last;
  if (x < u[static_cast<std::size_t>(last + 1)]) {
    const auto first = u.begin() + p;
    const auto end = u.begin() + last + 2;
    span = static_cast<int>(std::upper_bound(first, end, x) - u.begin()) - 1;
  }

  std::array<double, kMaxOrder> n{}, left{}, right{};
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - u[static_cast<std::size_t>(span + 1 - j)];
    right[j] = u[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  for (int r = 0; r <= p; ++r) out[static_cast<std::size_t>(span - p + r)] = n[r];
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x) {
  Eigen::VectorXd v(spec.n_basis);
  eval_basis_into(spec, x, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
  return v;
}

FeatureMatrix feature_matrix(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& states_at_t,
                             Exec exec) {
  FeatureMatrix f;
  f.values.resize(states_at_t.size(), spec.n_basis);
  kernels::eval_features(spec, std::span<const double>(states_at_t.data(), static_cast<std::size_t>(states_at_t.size())),
                         f.values, exec);
  return f;
}

}  // namespace qlbs::basis
