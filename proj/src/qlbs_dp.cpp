#include "qlbs/qlbs_dp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlbs::dp {

RiskParams RiskParams::make(double lambda, double r, double dt, bool pure_risk) {
  RiskParams p;
  p.lambda = lambda;
  p.pure_risk = pure_risk;
  p.gamma = std::exp(-r * dt);
  p.validate();
  return p;
}

void RiskParams::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!pure_risk && lambda <= 0.0)
    throw std::invalid_argument("the full hedge divides by lambda; use pure_risk or lambda > 0");
  if (!std::isfinite(gamma) || gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
}

TerminalState terminal_conditions(const Eigen::Ref<const Eigen::VectorXd>& terminal_prices, double strike,
                                  const RiskParams& risk) {
  TerminalState s;
  s.portfolio = (strike - terminal_prices.array()).max(0.0).matrix();
  s.portfolio_hat = numerics::demeaned(s.portfolio);
  s.hedge = Eigen::VectorXd::Zero(terminal_prices.size());
  const double var = numerics::cross_sectional_stats(s.portfolio).variance;
  s.reward = Eigen::VectorXd::Constant(terminal_prices.size(), -risk.lambda * var);
  s.q = -s.portfolio + s.reward;
  return s;
}

TerminalState terminal_conditions(const market::PathSet& paths, double strike, const RiskParams& risk) {
  return terminal_conditions(paths.prices.col(paths.prices.cols() - 1), strike, risk);
}

Eigen::VectorXd fit_hedge_coefficients(const basis::FeatureMatrix& phi,
                                       const Eigen::Ref<const Eigen::VectorXd>& delta_s,
                                       const Eigen::Ref<const Eigen::VectorXd>& delta_s_hat,
                                       const Eigen::Ref<const Eigen::VectorXd>& portfolio_hat_next,
                                       const RiskParams& risk, double ridge_scale, Exec exec) {
  const Eigen::Index k = phi.values.rows();
  if (delta_s.size() != k || delta_s_hat.size() != k || portfolio_hat_next.size() != k)
    throw std::invalid_argument("hedge fit: inputs must have one entry per path");

  const Eigen::VectorXd w = delta_s_hat.array().square().matrix();
  const Eigen::MatrixXd gram =
      kernels::weighted_gram(phi.values, std::span<const double>(w.data(), static_cast<std::size_t>(k)), exec);
  // no price movement at all: every hedge has the same (zero) variance
  if (gram.trace() == 0.0) return Eigen::VectorXd::Zero(phi.values.cols());

  Eigen::VectorXd v = portfolio_hat_next.cwiseProduct(delta_s_hat);
  if (!risk.pure_risk) v += delta_s / (2.0 * risk.lambda * risk.gamma);
  const Eigen::VectorXd rhs = kernels::weighted_moment(phi.values, v, exec);
  return numerics::solve_normal_equations(gram, rhs, numerics::relative_ridge(gram, ridge_scale));
}

Eigen::VectorXd optimal_hedge_values(const basis::FeatureMatrix& phi,
                                     const Eigen::Ref<const Eigen::VectorXd>& coefficients) {
  return phi.values * coefficients;
}

Eigen::VectorXd rollback_portfolio(const Eigen::Ref<const Eigen::VectorXd>& portfolio_next,
                                   const Eigen::Ref<const Eigen::VectorXd>& hedge,
                                   const Eigen::Ref<const Eigen::VectorXd>& delta_s, double gamma) {
  return gamma * (portfolio_next - hedge.cwiseProduct(delta_s));
}

Eigen::VectorXd compute_rewards(const Eigen::Ref<const Eigen::VectorXd>& portfolio_next,
                                const Eigen::Ref<const Eigen::VectorXd>& portfolio, double gamma,
                                double lambda) {
  const double var = numerics::cross_sectional_stats(portfolio).variance;
  return (gamma * portfolio_next - portfolio).array() - lambda * var;
}

Eigen::VectorXd fit_q_coefficients(const basis::FeatureMatrix& phi,
                                   const Eigen::Ref<const Eigen::VectorXd>& rewards,
                                   const Eigen::Ref<const Eigen::VectorXd>& q_next, double gamma,
                                   double ridge_scale, Exec exec) {
  if (rewards.size() != phi.values.rows() || q_next.size() != phi.values.rows())
    throw std::invalid_argument("Q fit: inputs must have one entry per path");
  const Eigen::VectorXd target = rewards + gamma * q_next;
  const Eigen::MatrixXd gram = kernels::weighted_gram(phi.values, {}, exec);
  const Eigen::VectorXd rhs = kernels::weighted_moment(phi.values, target, exec);
  return numerics::solve_normal_equations(gram, rhs, numerics::relative_ridge(gram, ridge_scale));
}

DPSolution run_model_based(const market::PathSet& paths, const FeatureProvider& features, double strike,
                           const RiskParams& risk, const DpOptions& options) {
  risk.validate();
  if (!(strike > 0.0) || !std::isfinite(strike)) throw std::invalid_argument("strike must be positive");
  const int n_steps = paths.n_steps();
  const Eigen::Index k = paths.n_paths();
  if (n_steps < 1 || k < 1) throw std::invalid_argument("DP needs at least one path and one step");

  const auto inc = market::price_increments(paths, paths.params.r);
  const auto term = terminal_conditions(paths, strike, risk);

  DPSolution sol;
  sol.hedges = Eigen::MatrixXd::Zero(k, n_steps + 1);
  sol.portfolio.resize(k, n_steps + 1);
  sol.rewards.resize(k, n_steps + 1);
  sol.q_values.resize(k, n_steps + 1);
  sol.phi.resize(static_cast<std::size_t>(n_steps));
  sol.omega.resize(static_cast<std::size_t>(n_steps));
  sol.portfolio.col(n_steps) = term.portfolio;
  sol.rewards.col(n_steps) = term.reward;
  sol.q_values.col(n_steps) = term.q;

  for (int t = n_steps - 1; t >= 0; --t) {
    const basis::FeatureMatrix phi = features(t);
    if (phi.values.rows() != k)
      throw std::invalid_argument("feature matrix at t=" + std::to_string(t) + " has the wrong row count");

    const Eigen::VectorXd pi_next = sol.portfolio.col(t + 1);
    auto& coef = sol.phi[static_cast<std::size_t>(t)];
    coef = fit_hedge_coefficients(phi, inc.delta_s.col(t), inc.delta_s_hat.col(t), numerics::demeaned(pi_next),
                                  risk, options.ridge_scale, options.exec);
    const Eigen::VectorXd a = optimal_hedge_values(phi, coef);
    sol.hedges.col(t) = a;
    sol.portfolio.col(t) = rollback_portfolio(pi_next, a, inc.delta_s.col(t), risk.gamma);
    sol.rewards.col(t) = compute_rewards(pi_next, sol.portfolio.col(t), risk.gamma, risk.lambda);

    auto& omega = sol.omega[static_cast<std::size_t>(t)];
    omega = fit_q_coefficients(phi, sol.rewards.col(t), sol.q_values.col(t + 1), risk.gamma, options.ridge_scale,
                               options.exec);
    sol.q_values.col(t) = phi.values * omega;
  }

  sol.cash = sol.portfolio - sol.hedges.cwiseProduct(paths.prices);
  sol.price_t0 = -sol.q_values.col(0).mean();
  sol.hedge_t0 = sol.hedges.col(0).mean();
  return sol;
}

FeatureProvider basis_features(const market::StateSeries& states, const basis::BasisSpec& spec, Exec exec) {
  spec.validate();
  return [values = states.values, spec, exec](int t) {
    return basis::feature_matrix(spec, values.col(t), exec);
  };
}

DPSolution run_model_based(const market::PathSet& paths, market::StateKind state_kind, const basis::BasisSpec& spec,
                           double strike, const RiskParams& risk, const DpOptions& options) {
  const auto states = market::compute_states(paths, state_kind);
  return run_model_based(paths, basis_features(states, spec, options.exec), strike, risk, options);
}

}  // namespace qlbs::dp
