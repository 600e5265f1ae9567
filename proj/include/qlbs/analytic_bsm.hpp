#pragma once

namespace qlbs::bsm {

struct BsmQuote {
  double price = 0.0;
  double delta = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Standard normal CDF via erfc; absolute error well below 1e-15 on the real line.
double norm_cdf(double x);

/// European put under Black-Scholes-Merton. sigma == 0 or maturity == 0 are
/// evaluated as their analytic limits (intrinsic value of the forward).
BsmQuote bsm_put(double s0, double strike, double r, double sigma, double maturity);

double bsm_put_price(double s0, double strike, double r, double sigma, double maturity);

/// N(d1) - 1, in [-1, 0].
double bsm_put_delta(double s0, double strike, double r, double sigma, double maturity);

}  // namespace qlbs::bsm
