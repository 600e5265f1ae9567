#include "qlbs/market_sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

namespace qlbs::market {
namespace {

MarketParams small(std::uint64_t seed = 7) {
  MarketParams p;
  p.n_paths = 2000;
  p.n_steps = 12;
  p.seed = seed;
  return p;
}

TEST(SimulateGbm, ShapeAndStart) {
  const auto paths = simulate_gbm(small());
  EXPECT_EQ(paths.n_paths(), 2000);
  EXPECT_EQ(paths.n_steps(), 12);
  EXPECT_TRUE((paths.prices.col(0).array() == 100.0).all());
  EXPECT_TRUE((paths.prices.array() > 0.0).all());
  EXPECT_DOUBLE_EQ(paths.dt, 1.0 / 12);
}

TEST(SimulateGbm, SameSeedSamePaths) {
  EXPECT_EQ(simulate_gbm(small(3)).prices, simulate_gbm(small(3)).prices);
  EXPECT_NE(simulate_gbm(small(3)).prices, simulate_gbm(small(4)).prices);
}

TEST(SimulateGbm, SerialAndParallelAgreeBitwise) {
  EXPECT_EQ(simulate_gbm(small(11), Exec::Serial).prices, simulate_gbm(small(11), Exec::Parallel).prices);
}

TEST(SimulateGbm, PathsDoNotDependOnPathCount) {
  // each path owns its random stream
  auto p = small(5);
  const auto a = simulate_gbm(p);
  p.n_paths = 50;
  const auto b = simulate_gbm(p);
  EXPECT_EQ(a.prices.topRows(50), b.prices);
}

TEST(SimulateGbm, LogReturnMoments) {
  auto p = small(9);
  p.n_paths = 40000;
  p.sigma = 0.3;
  const auto paths = simulate_gbm(p);
  const Eigen::VectorXd lr = (paths.prices.col(p.n_steps).array() / p.s0).log().matrix();
  const double mean = lr.mean();
  const double var = (lr.array() - mean).square().mean();
  const double expected_mean = (p.mu - 0.5 * p.sigma * p.sigma) * p.maturity;
  const double se = p.sigma * std::sqrt(p.maturity / p.n_paths);
  EXPECT_NEAR(mean, expected_mean, 4 * se);
  EXPECT_NEAR(var, p.sigma * p.sigma * p.maturity, 0.03 * p.sigma * p.sigma);
}

TEST(SimulateGbm, ZeroVolatilityIsDeterministic) {
  auto p = small();
  p.sigma = 0.0;
  const auto paths = simulate_gbm(p);
  for (int t = 0; t <= p.n_steps; ++t) {
    EXPECT_NEAR(paths.prices(17, t), p.s0 * std::exp(p.mu * t * paths.dt), 1e-10);
    EXPECT_EQ(paths.prices(0, t), paths.prices(1999, t));
  }
}

TEST(MarketParams, Validation) {
  auto bad = [](auto mutate) {
    MarketParams p;
    mutate(p);
    return p;
  };
  EXPECT_THROW(simulate_gbm(bad([](auto& p) { p.s0 = 0; })), std::invalid_argument);
  EXPECT_THROW(simulate_gbm(bad([](auto& p) { p.sigma = -0.1; })), std::invalid_argument);
  EXPECT_THROW(simulate_gbm(bad([](auto& p) { p.n_steps = 0; })), std::invalid_argument);
  EXPECT_THROW(simulate_gbm(bad([](auto& p) { p.n_paths = 0; })), std::invalid_argument);
  EXPECT_THROW(simulate_gbm(bad([](auto& p) { p.maturity = 0; })), std::invalid_argument);
}

TEST(HedgeFrequencies, StepTimesMaturity) {
  for (int n : {52, 26, 12, 2}) {
    MarketParams p;
    p.n_steps = n;
    EXPECT_EQ(p.dt() * n, p.maturity) << n;
  }
}

TEST(States, DefinitionsAgree) {
  const auto paths = simulate_gbm(small(2));
  const auto s = compute_states(paths, StateKind::Price);
  const auto l = compute_states(paths, StateKind::LogPrice);
  const auto x = compute_states(paths, StateKind::DriftAdjusted);
  const double drift = paths.params.mu - 0.5 * paths.params.sigma * paths.params.sigma;
  for (int t = 0; t <= paths.n_steps(); ++t) {
    EXPECT_EQ(s.values(3, t), paths.prices(3, t));
    EXPECT_NEAR(l.values(3, t), std::log(paths.prices(3, t)), 1e-15);
    EXPECT_NEAR(x.values(3, t), std::log(paths.prices(3, t)) - drift * t * paths.dt, 1e-12);
  }
}

TEST(States, DriftAdjustedIncrementsHaveZeroMean) {
  auto p = small(21);
  p.n_paths = 20000;
  const auto paths = simulate_gbm(p);
  const auto x = compute_states(paths, StateKind::DriftAdjusted);
  for (int t = 0; t < p.n_steps; ++t) {
    const Eigen::VectorXd dx = x.values.col(t + 1) - x.values.col(t);
    const double m = dx.mean();
    const double se = std::sqrt((dx.array() - m).square().sum() / (dx.size() - 1) / dx.size());
    EXPECT_LT(std::abs(m), 3.0 * se) << "t=" << t;
  }
}

TEST(StateKind, NamesRoundTrip) {
  for (auto k : {StateKind::Price, StateKind::LogPrice, StateKind::DriftAdjusted})
    EXPECT_EQ(state_kind_from_string(to_string(k)), k);
  EXPECT_EQ(state_kind_from_string("lnS"), StateKind::LogPrice);
  EXPECT_EQ(state_kind_from_string("X"), StateKind::DriftAdjusted);
  EXPECT_EQ(state_kind_from_string("S"), StateKind::Price);
  EXPECT_THROW(state_kind_from_string("vol"), std::invalid_argument);
}

TEST(Increments, DefinitionAndDemeaning) {
  const auto paths = simulate_gbm(small(8));
  const auto inc = price_increments(paths, 0.03);
  ASSERT_EQ(inc.delta_s.cols(), paths.n_steps());
  const double carry = std::exp(0.03 * paths.dt);
  EXPECT_NEAR(inc.delta_s(4, 2), paths.prices(4, 3) - carry * paths.prices(4, 2), 1e-12);
  for (int t = 0; t < paths.n_steps(); ++t) EXPECT_NEAR(inc.delta_s_hat.col(t).mean(), 0.0, 1e-10);
}

TEST(PathCsv, RoundTripIsExact) {
  auto p = small(13);
  p.n_paths = 20;
  const auto paths = simulate_gbm(p);
  std::stringstream ss;
  save_paths(paths, ss);
  const auto back = load_paths(ss);
  EXPECT_EQ(back.prices, paths.prices);
  EXPECT_EQ(back.dt, paths.dt);
  EXPECT_EQ(back.params.mu, paths.params.mu);
  EXPECT_EQ(back.params.seed, paths.params.seed);
}

TEST(PathCsv, FivePathExample) {
  const auto paths = load_paths(std::filesystem::path(QLBS_FIXTURE_DIR) / "five_path_example.csv");
  EXPECT_EQ(paths.n_paths(), 5);
  EXPECT_EQ(paths.n_steps(), 3);
  EXPECT_NEAR(paths.dt, 1.0 / 3, 1e-15);
  EXPECT_EQ(paths.prices(4, 3), 130.66);
  EXPECT_EQ(paths.params.r, 0.03);
}

TEST(PathCsv, RejectsMalformedInput) {
  auto load = [](const std::string& text, std::optional<double> dt = std::nullopt) {
    std::stringstream ss(text);
    return load_paths(ss, dt);
  };
  EXPECT_THROW(load("# dt=1\n100,101\n100\n"), std::invalid_argument);      // ragged
  EXPECT_THROW(load("# dt=1\n100,-1\n"), std::invalid_argument);            // negative price
  EXPECT_THROW(load("# dt=1\n100\n100\n"), std::invalid_argument);          // no step
  EXPECT_THROW(load("100,101\n"), std::invalid_argument);                   // no dt
  EXPECT_THROW(load("# dt=1\n100,101\n99,101\n"), std::invalid_argument);   // different starts
  EXPECT_THROW(load("# dt=1\n100,101\n100,abc\n"), std::invalid_argument);  // junk
  EXPECT_NO_THROW(load("100,101\n", 0.5));
  EXPECT_EQ(load("# dt=1\n100,101\n", 0.25).dt, 0.25);
}

}  // namespace
}  // namespace qlbs::market
