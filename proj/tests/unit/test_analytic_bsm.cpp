#include "qlbs/analytic_bsm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace qlbs::bsm {
namespace {

TEST(NormCdf, MatchesQuadrature) {
  for (double x : {-6.0, -3.1, -1.0, -0.25, 0.0, 0.4, 1.7, 3.0, 5.5}) {
    EXPECT_NEAR(norm_cdf(x), oracle::normal_cdf(x), 1e-10) << "x=" << x;
  }
}

TEST(NormCdf, SymmetryAndTails) {
  for (double x : {0.1, 1.0, 2.5, 8.0}) EXPECT_NEAR(norm_cdf(x) + norm_cdf(-x), 1.0, 1e-15);
  EXPECT_EQ(norm_cdf(0.0), 0.5);
  // erfc keeps relative accuracy deep in the left tail
  EXPECT_GT(norm_cdf(-30.0), 0.0);
  EXPECT_NEAR(norm_cdf(-30.0) / 4.906713927148187e-198, 1.0, 1e-12);
}

TEST(BsmPut, AtTheMoneyPrices) {
  EXPECT_NEAR(bsm_put_price(100, 100, 0.03, 0.15, 1), 4.53, 0.005);
  EXPECT_NEAR(bsm_put_price(100, 100, 0.03, 0.25, 1), 8.39, 0.005);
  EXPECT_NEAR(bsm_put_price(100, 100, 0.03, 0.40, 1), 14.18, 0.005);
}

TEST(BsmPut, AtTheMoneyDeltas) {
  EXPECT_NEAR(bsm_put_delta(100, 100, 0.03, 0.15, 1), -0.39, 0.005);
  EXPECT_NEAR(bsm_put_delta(100, 100, 0.03, 0.25, 1), -0.40, 0.005);
  EXPECT_NEAR(bsm_put_delta(100, 100, 0.03, 0.40, 1), -0.39, 0.005);
}

TEST(BsmPut, MatchesRiskNeutralQuadrature) {
  for (double z : {60.0, 90.0, 100.0, 125.0}) {
    for (double sigma : {0.1, 0.3}) {
      EXPECT_NEAR(bsm_put_price(100, z, 0.03, sigma, 0.75), oracle::put_by_quadrature(100, z, 0.03, sigma, 0.75), 1e-7)
          << "z=" << z << " sigma=" << sigma;
    }
  }
}

TEST(BsmPut, DeltaIsPriceDerivative) {
  const double h = 1e-4;
  for (double s : {80.0, 100.0, 130.0}) {
    const double fd = (bsm_put_price(s + h, 100, 0.03, 0.2, 1) - bsm_put_price(s - h, 100, 0.03, 0.2, 1)) / (2 * h);
    EXPECT_NEAR(bsm_put_delta(s, 100, 0.03, 0.2, 1), fd, 1e-7);
  }
}

TEST(BsmPut, PutCallParity) {
  // C - P = S - Z e^{-rT}; the call follows from N(d1), N(d2)
  const auto q = bsm_put(105, 100, 0.03, 0.2, 1.0);
  const double call = 105 * norm_cdf(q.d1) - 100 * std::exp(-0.03) * norm_cdf(q.d2);
  EXPECT_NEAR(call - q.price, 105 - 100 * std::exp(-0.03), 1e-12);
}

TEST(BsmPut, ZeroVolatilityLimit) {
  const auto itm = bsm_put(90, 100, 0.03, 0.0, 1.0);
  EXPECT_NEAR(itm.price, 100 * std::exp(-0.03) - 90, 1e-12);
  EXPECT_EQ(itm.delta, -1.0);
  const auto otm = bsm_put(100, 100, 0.03, 0.0, 1.0);
  EXPECT_EQ(otm.price, 0.0);
  EXPECT_EQ(otm.delta, 0.0);
}

TEST(BsmPut, ZeroMaturityIsIntrinsic) {
  EXPECT_EQ(bsm_put_price(90, 100, 0.03, 0.2, 0.0), 10.0);
  EXPECT_EQ(bsm_put_price(110, 100, 0.03, 0.2, 0.0), 0.0);
}

TEST(BsmPut, RejectsInvalidInputs) {
  EXPECT_THROW(bsm_put(0, 100, 0.03, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(bsm_put(100, -1, 0.03, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(bsm_put(100, 100, 0.03, -0.2, 1), std::invalid_argument);
  EXPECT_THROW(bsm_put(100, 100, 0.03, 0.2, -1), std::invalid_argument);
  EXPECT_THROW(bsm_put(100, 100, std::numeric_limits<double>::quiet_NaN(), 0.2, 1), std::invalid_argument);
}

TEST(BsmPut, PriceWithinNoArbitrageBounds) {
  for (double s : {50.0, 100.0, 200.0}) {
    const double p = bsm_put_price(s, 100, 0.03, 0.25, 2.0);
    EXPECT_GE(p, std::max(100 * std::exp(-0.06) - s, 0.0) - 1e-12);
    EXPECT_LE(p, 100 * std::exp(-0.06) + 1e-12);
    const double d = bsm_put_delta(s, 100, 0.03, 0.25, 2.0);
    EXPECT_GE(d, -1.0);
    EXPECT_LE(d, 0.0);
  }
}

}  // namespace
}  // namespace qlbs::bsm
