#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "qlbs/kernels.hpp"

namespace qlbs::market {

/// GBM and simulation parameters. Rates and volatility are annualised.
struct MarketParams {
  double s0 = 100.0;
  double mu = 0.05;
  double sigma = 0.15;
  double r = 0.03;
  double maturity = 1.0;
  int n_steps = 24;
  int n_paths = 10000;
  std::uint64_t seed = 42;

  double dt() const { return maturity / n_steps; }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Simulated (or loaded) stock prices, one row per path, column t = time t*dt.
struct PathSet {
  Eigen::MatrixXd prices;
  double dt = 0.0;
  MarketParams params;

  Eigen::Index n_paths() const { return prices.rows(); }
  int n_steps() const { return static_cast<int>(prices.cols()) - 1; }
};

enum class StateKind { Price, LogPrice, DriftAdjusted };

const char* to_string(StateKind kind);
StateKind state_kind_from_string(const std::string& name);

struct StateSeries {
  Eigen::MatrixXd values;
  StateKind kind = StateKind::Price;
};

/// Price increments net of the risk-free carry, and their per-step
/// cross-sectional demeaned version.
struct Increments {
  Eigen::MatrixXd delta_s;      // n_paths x n_steps
  Eigen::MatrixXd delta_s_hat;  // columns have zero mean
};

/// Exact log-normal stepping: ln S_{t+1} = ln S_t + (mu - sigma^2/2) dt + sigma sqrt(dt) eps.
/// Deterministic for a given seed, independent of `exec`.
PathSet simulate_gbm(const MarketParams& params, Exec exec = Exec::Parallel);

/// Reads a CSV path fixture. The optional metadata line `# dt=...;mu=...;...`
/// supplies dt; `dt_override` takes precedence when given.
PathSet load_paths(std::istream& in, std::optional<double> dt_override = std::nullopt);
PathSet load_paths(const std::filesystem::path& file,
                   std::optional<double> dt_override = std::nullopt);

/// Writes the format read by load_paths, at full double precision.
void save_paths(const PathSet& paths, std::ostream& out);
void save_paths(const PathSet& paths, const std::filesystem::path& file);

StateSeries compute_states(const PathSet& paths, StateKind kind);

Increments price_increments(const PathSet& paths, double r);

}  // namespace qlbs::market
