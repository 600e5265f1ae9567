#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace qlbs {

/// Execution policy for the path-parallel kernels. `Serial` is the reference
/// implementation; `Parallel` runs the same arithmetic under OpenMP.
enum class Exec { Serial, Parallel };

namespace basis {
struct BasisSpec;
}

namespace kernels {

/// Fills `log_prices` (n_paths x n_steps+1) with ln S along each path.
/// Path k draws its shocks from its own substream, so the result does not
/// depend on the execution policy or the thread count.
void simulate_log_paths(double s0, double drift_dt, double vol_sqrt_dt, std::uint64_t seed,
                        Eigen::Ref<Eigen::MatrixXd> log_prices, Exec exec);

/// Row k of `out` receives the basis evaluated at x[k].
void eval_features(const basis::BasisSpec& spec, std::span<const double> x,
                   Eigen::Ref<Eigen::MatrixXd> out, Exec exec);

/// sum_k w_k * row_k^T row_k; an empty weight span means unit weights.
/// Rows are scanned for their nonzero entries first, so banded designs
/// (B-spline features) cost O(nnz^2) per row.
Eigen::MatrixXd weighted_gram(const Eigen::Ref<const Eigen::MatrixXd>& design,
                              std::span<const double> weights, Exec exec);

/// design^T * v.
Eigen::VectorXd weighted_moment(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const Eigen::Ref<const Eigen::VectorXd>& v, Exec exec);

/// Multiplicative noise factors u ~ Uniform(1-eta, 1+eta) for every entry of
/// an n_paths x n_cols matrix, one substream per path.
Eigen::MatrixXd uniform_noise(Eigen::Index n_paths, Eigen::Index n_cols, double eta,
                              std::uint64_t seed, Exec exec);

}  // namespace kernels
}  // namespace qlbs
