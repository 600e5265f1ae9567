#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qlbs/basis.hpp"
#include "qlbs/market_sim.hpp"
#include "qlbs/numerics.hpp"

namespace qlbs::dp {

/// Risk preferences of the option writer.
///
/// `lambda` weighs the cross-sectional portfolio variance against the mean
/// hedging cost. With `pure_risk` the hedge minimises variance only (the
/// ΔS/(2λγ) drift term is dropped), which is how every Monte Carlo study here
/// is run; the full hedge requires lambda > 0.
struct RiskParams {
  double lambda = 1e-4;
  bool pure_risk = true;
  double gamma = 1.0;  // one-step discount exp(-r dt)

  static RiskParams make(double lambda, double r, double dt, bool pure_risk = true);
  void validate() const;
};

struct TerminalState {
  Eigen::VectorXd portfolio;      // Π_T = max(Z - S_T, 0)
  Eigen::VectorXd portfolio_hat;  // Π_T - mean(Π_T)
  Eigen::VectorXd hedge;          // a_T = 0
  Eigen::VectorXd reward;         // R_T = -λ Var(Π_T), same for every path
  Eigen::VectorXd q;              // Q_T = -Π_T - λ Var(Π_T)
};

TerminalState terminal_conditions(const Eigen::Ref<const Eigen::VectorXd>& terminal_prices,
                                  double strike, const RiskParams& risk);
TerminalState terminal_conditions(const market::PathSet& paths, double strike, const RiskParams& risk);

/// Coefficients ϕ_t of the hedge a_t = Φ_t ϕ_t:
///   [Σ_k Φ Φ^T (ΔŜ)^2]^{-1} Σ_k Φ (ΔS/(2λγ) + Π̂_{t+1} ΔŜ),
/// with the ΔS term omitted under pure_risk.
Eigen::VectorXd fit_hedge_coefficients(const basis::FeatureMatrix& phi,
                                       const Eigen::Ref<const Eigen::VectorXd>& delta_s,
                                       const Eigen::Ref<const Eigen::VectorXd>& delta_s_hat,
                                       const Eigen::Ref<const Eigen::VectorXd>& portfolio_hat_next,
                                       const RiskParams& risk,
                                       double ridge_scale = numerics::kDefaultRidgeScale,
                                       Exec exec = Exec::Parallel);

Eigen::VectorXd optimal_hedge_values(const basis::FeatureMatrix& phi,
                                     const Eigen::Ref<const Eigen::VectorXd>& coefficients);

/// Π_t = γ (Π_{t+1} - a_t ΔS_t).
Eigen::VectorXd rollback_portfolio(const Eigen::Ref<const Eigen::VectorXd>& portfolio_next,
                                   const Eigen::Ref<const Eigen::VectorXd>& hedge,
                                   const Eigen::Ref<const Eigen::VectorXd>& delta_s, double gamma);

/// R_t = γ Π_{t+1} - Π_t - λ Var(Π_t), Var taken across paths.
Eigen::VectorXd compute_rewards(const Eigen::Ref<const Eigen::VectorXd>& portfolio_next,
                                const Eigen::Ref<const Eigen::VectorXd>& portfolio,
                                double gamma, double lambda);

/// Least-squares ω_t for Q_t = Φ_t ω_t against R_t + γ Q_{t+1}.
Eigen::VectorXd fit_q_coefficients(const basis::FeatureMatrix& phi,
                                   const Eigen::Ref<const Eigen::VectorXd>& rewards,
                                   const Eigen::Ref<const Eigen::VectorXd>& q_next, double gamma,
                                   double ridge_scale = numerics::kDefaultRidgeScale,
                                   Exec exec = Exec::Parallel);

struct DpOptions {
  double ridge_scale = numerics::kDefaultRidgeScale;
  Exec exec = Exec::Parallel;
};

/// Output of the backward recursion. Matrices are n_paths x (n_steps + 1);
/// `phi` and `omega` hold one coefficient vector per t < n_steps.
struct DPSolution {
  Eigen::MatrixXd hedges;
  Eigen::MatrixXd portfolio;
  Eigen::MatrixXd rewards;
  Eigen::MatrixXd q_values;
  Eigen::MatrixXd cash;  // Π_t - a_t S_t
  std::vector<Eigen::VectorXd> phi;
  std::vector<Eigen::VectorXd> omega;
  double price_t0 = 0.0;
  double hedge_t0 = 0.0;
};

/// Supplies the design matrix for time step t.
using FeatureProvider = std::function<basis::FeatureMatrix(int t)>;

DPSolution run_model_based(const market::PathSet& paths, const FeatureProvider& features,
                           double strike, const RiskParams& risk, const DpOptions& options = {});

DPSolution run_model_based(const market::PathSet& paths, market::StateKind state_kind,
                           const basis::BasisSpec& spec, double strike, const RiskParams& risk,
                           const DpOptions& options = {});

/// Feature provider evaluating `spec` on column t of `states`.
FeatureProvider basis_features(const market::StateSeries& states, const basis::BasisSpec& spec,
                               Exec exec = Exec::Parallel);

}  // namespace qlbs::dp
