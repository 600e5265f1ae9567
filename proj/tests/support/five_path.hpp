#pragma once

// The five-path worked example: prices on four dates, quadratic splines over
// the price range, features rounded to two decimals as in the printed tables.

#include <cmath>
#include <filesystem>

#include "qlbs/basis.hpp"
#include "qlbs/market_sim.hpp"
#include "qlbs/qlbs_dp.hpp"

namespace five_path {

inline qlbs::market::PathSet paths() {
  return qlbs::market::load_paths(std::filesystem::path(QLBS_FIXTURE_DIR) / "five_path_example.csv");
}

inline qlbs::basis::BasisSpec spec(const qlbs::market::PathSet& p) {
  // three basis functions of degree two (order 3)
  return qlbs::basis::make_spec_for(p.prices, 3, 3);
}

inline qlbs::dp::FeatureProvider rounded_features(const qlbs::market::PathSet& p) {
  const auto s = spec(p);
  return [prices = p.prices, s](int t) {
    auto f = qlbs::basis::feature_matrix(s, prices.col(t), qlbs::Exec::Serial);
    f.values = (f.values.array() * 100.0).round() / 100.0;
    return f;
  };
}

inline qlbs::dp::RiskParams risk(const qlbs::market::PathSet& p) {
  return qlbs::dp::RiskParams::make(0.001, 0.03, p.dt, true);
}

}  // namespace five_path
