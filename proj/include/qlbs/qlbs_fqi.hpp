#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlbs/basis.hpp"
#include "qlbs/market_sim.hpp"
#include "qlbs/numerics.hpp"
#include "qlbs/qlbs_dp.hpp"

namespace qlbs::fqi {

/// Off-policy experience, one row per path and one column per time step.
/// Column t < T holds (X_t, a_t, R_t) with next state X_{t+1} in column t+1;
/// column T is the terminal record (X_T, a_T = 0, R_T). `portfolio` is the
/// replicating portfolio re-rolled under the stored actions.
struct OfflineDataset {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::MatrixXd rewards;
  Eigen::MatrixXd portfolio;

  Eigen::Index n_paths() const { return states.rows(); }
  int n_steps() const { return static_cast<int>(states.cols()) - 1; }
  void validate() const;
};

/// Q_t(x, a) = [1, a, a^2/2] W_t Φ(x).
using WMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// How the Bellman target values Q_{t+1} at the next state.
enum class ActionPolicy {
  /// Fitted Q evaluated at the action stored in the dataset.
  Observed,
  /// Fitted Q maximised over a (analytic vertex of the quadratic, falling back
  /// to the stored action where the fit is not concave).
  Greedy,
};

const char* to_string(ActionPolicy policy);
ActionPolicy action_policy_from_string(const std::string& name);

struct FqiOptions {
  double ridge_scale = numerics::kDefaultRidgeScale;
  ActionPolicy policy = ActionPolicy::Observed;
  Exec exec = Exec::Parallel;
};

struct FQISolution {
  std::vector<WMatrix> w;    // one per t < T
  Eigen::MatrixXd q_values;  // n_paths x (T+1)
  double price_t0 = 0.0;
  long nonconcave_count = 0;  // greedy fallbacks taken
  std::vector<std::string> warnings;
};

/// a * u with u ~ Uniform(1 - eta, 1 + eta) drawn independently per entry.
Eigen::MatrixXd perturb_actions(const Eigen::Ref<const Eigen::MatrixXd>& a_star, double eta,
                                std::uint64_t seed, Exec exec = Exec::Parallel);

/// Re-rolls the portfolio backward from the payoff under `actions` and records
/// the resulting rewards.
OfflineDataset build_offline_dataset(const market::PathSet& paths, const market::StateSeries& states,
                                     const Eigen::Ref<const Eigen::MatrixXd>& actions, double strike,
                                     const dp::RiskParams& risk);

/// [Φ, a Φ, (a^2/2) Φ], i.e. vec of the outer product [1, a, a^2/2] ⊗ Φ^T taken block by block.
Eigen::VectorXd psi_features(double action, const Eigen::Ref<const Eigen::VectorXd>& phi_x);

struct GreedyChoice {
  double action = 0.0;
  double value = 0.0;
  bool concave = true;
};

GreedyChoice greedy_action(const WMatrix& w, const Eigen::Ref<const Eigen::VectorXd>& phi_x,
                           double fallback_action);

struct BackwardStep {
  WMatrix w;
  Eigen::VectorXd q;
  long nonconcave = 0;
  bool underdetermined = false;  // fewer paths than the 3N unknowns
};

/// Regresses R_t + γ q_{t+1} on Ψ(X_t, a_t) and evaluates the fit per the policy.
BackwardStep fqi_backward_step(const Eigen::Ref<const Eigen::VectorXd>& actions_t,
                               const Eigen::Ref<const Eigen::VectorXd>& rewards_t,
                               const basis::FeatureMatrix& phi_t,
                               const Eigen::Ref<const Eigen::VectorXd>& q_next, double gamma,
                               const FqiOptions& options = {});

FQISolution run_fqi(const OfflineDataset& dataset, const basis::BasisSpec& spec, double gamma,
                    const FqiOptions& options = {});

/// CSV with columns t,k,state,action,reward,next_state,portfolio; next_state is
/// empty on terminal rows.
void save_dataset_csv(const OfflineDataset& dataset, std::ostream& out);
OfflineDataset load_dataset_csv(std::istream& in);

}  // namespace qlbs::fqi
