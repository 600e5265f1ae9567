#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qlbs/experiments.hpp"

namespace qlbs::experiments {

const char* to_string(TwFormula formula) {
  return formula == TwFormula::Literal ? "literal" : "corrected";
}

TwFormula tw_formula_from_string(const std::string& name) {
  if (name == "literal") return TwFormula::Literal;
  if (name == "corrected") return TwFormula::Corrected;
  throw std::invalid_argument("unknown terminal wealth formula: " + name);
}

Eigen::VectorXd terminal_wealth(const market::PathSet& paths, const Eigen::Ref<const Eigen::MatrixXd>& hedges,
                                double strike, double cost_rate, double premium, TwFormula formula) {
  const int n = paths.n_steps();
  const Eigen::Index k = paths.n_paths();
  if (!(cost_rate >= 0.0 && cost_rate < 1.0)) throw std::invalid_argument("cost rate must be in [0, 1)");
  if (hedges.rows() != k || (hedges.cols() != n && hedges.cols() != n + 1))
    throw std::invalid_argument("hedges must have one row per path and n_steps (+1) columns");

  const auto& s = paths.prices;
  // a_T is zero by construction; only a_0 .. a_{T-1} enter
  auto a = [&](Eigen::Index p, int t) { return t >= n ? 0.0 : hedges(p, t); };

  Eigen::VectorXd tw(k);
  for (Eigen::Index p = 0; p < k; ++p) {
    double w = premium - s(p, 0) * a(p, 0);
    if (formula == TwFormula::Corrected) {
      w -= cost_rate * std::abs(a(p, 0)) * s(p, 0);
      for (int t = 1; t < n; ++t)
        w += s(p, t) * (a(p, t - 1) - a(p, t)) - cost_rate * std::abs(a(p, t) - a(p, t - 1)) * s(p, t);
    } else {
      w -= cost_rate * std::abs(s(p, 0) - a(p, 0));
      for (int t = 1; t < n; ++t)
        w += s(p, t) * (a(p, t - 1) - a(p, t)) - cost_rate * std::abs(a(p, t + 1) - a(p, t)) * s(p, t);
    }
    w += s(p, n) * (a(p, n - 1) - a(p, n)) - std::max(strike - s(p, n), 0.0);
    tw(p) = w;
  }
  return tw;
}

double median(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw std::invalid_argument("median of an empty vector");
  std::vector<double> v(values.data(), values.data() + values.size());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

TerminalWealthReport TerminalWealthReport::from(Eigen::VectorXd wealth, market::StateKind state, double cost_rate) {
  TerminalWealthReport r;
  r.mean = wealth.size() ? wealth.mean() : 0.0;
  r.median = wealth.size() ? experiments::median(wealth) : 0.0;
  r.wealth = std::move(wealth);
  r.state = state;
  r.cost_rate = cost_rate;
  return r;
}

}  // namespace qlbs::experiments
