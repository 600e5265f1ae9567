#include "qlbs/analytic_bsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qlbs::bsm {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

BsmQuote bsm_put(double s0, double strike, double r, double sigma, double maturity) {
  if (!std::isfinite(s0) || !std::isfinite(strike) || !std::isfinite(r) || !std::isfinite(sigma) ||
      !std::isfinite(maturity))
    throw std::invalid_argument("bsm_put: inputs must be finite");
  if (s0 <= 0.0 || strike <= 0.0) throw std::invalid_argument("bsm_put: s0 and strike must be positive");
  if (sigma < 0.0 || maturity < 0.0) throw std::invalid_argument("bsm_put: sigma and maturity must be non-negative");

  const double discounted_strike = strike * std::exp(-r * maturity);
  BsmQuote q;
  const double vol_sqrt_t = sigma * std::sqrt(maturity);
  if (vol_sqrt_t == 0.0) {
    // deterministic limit: the put pays the forward intrinsic value
    q.price = std::max(discounted_strike - s0, 0.0);
    q.delta = discounted_strike > s0 ? -1.0 : 0.0;
    const double m = std::log(s0 / discounted_strike);
    const double inf = std::numeric_limits<double>::infinity();
    q.d1 = q.d2 = m > 0.0 ? inf : (m < 0.0 ? -inf : 0.0);
    return q;
  }
  q.d1 = (std::log(s0 / strike) + (r + 0.5 * sigma * sigma) * maturity) / vol_sqrt_t;
  q.d2 = q.d1 - vol_sqrt_t;
  q.price = discounted_strike * norm_cdf(-q.d2) - s0 * norm_cdf(-q.d1);
  q.delta = norm_cdf(q.d1) - 1.0;
  return q;
}

double bsm_put_price(double s0, double strike, double r, double sigma, double maturity) {
  return bsm_put(s0, strike, r, sigma, maturity).price;
}

double bsm_put_delta(double s0, double strike, double r, double sigma, double maturity) {
  return bsm_put(s0, strike, r, sigma, maturity).delta;
}

}  // namespace qlbs::bsm
