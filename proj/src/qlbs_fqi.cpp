#include "qlbs/qlbs_fqi.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qlbs::fqi {

void OfflineDataset::validate() const {
  const auto k = states.rows();
  const auto c = states.cols();
  if (k < 1 || c < 2) throw std::invalid_argument("dataset needs at least one path and one step");
  for (const auto* m : {&actions, &rewards, &portfolio}) {
    if (m->rows() != k || m->cols() != c) throw std::invalid_argument("dataset matrices must share one shape");
    if (!m->allFinite()) throw std::invalid_argument("dataset contains non-finite values");
  }
  if (!states.allFinite()) throw std::invalid_argument("dataset contains non-finite states");
}

const char* to_string(ActionPolicy policy) {
  return policy == ActionPolicy::Observed ? "observed" : "greedy";
}

ActionPolicy action_policy_from_string(const std::string& name) {
  if (name == "observed") return ActionPolicy::Observed;
  if (name == "greedy") return ActionPolicy::Greedy;
  throw std::invalid_argument("unknown FQI action policy: " + name);
}

Eigen::MatrixXd perturb_actions(const Eigen::Ref<const Eigen::MatrixXd>& a_star, double eta, std::uint64_t seed,
                                Exec exec) {
  if (!std::isfinite(eta) || eta < 0.0) throw std::invalid_argument("noise level must be finite and >= 0");
  return a_star.cwiseProduct(kernels::uniform_noise(a_star.rows(), a_star.cols(), eta, seed, exec));
}

OfflineDataset build_offline_dataset(const market::PathSet& paths, const market::StateSeries& states,
                                     const Eigen::Ref<const Eigen::MatrixXd>& actions, double strike,
                                     const dp::RiskParams& risk) {
  const int n_steps = paths.n_steps();
  const Eigen::Index k = paths.n_paths();
  if (states.values.rows() != k || states.values.cols() != n_steps + 1 || actions.rows() != k ||
      actions.cols() != n_steps + 1)
    throw std::invalid_argument("states and actions must match the path grid");

  const auto inc = market::price_increments(paths, paths.params.r);
  const auto term = dp::terminal_conditions(paths, strike, risk);

  OfflineDataset d;
  d.states = states.values;
  d.actions = actions;
  d.actions.col(n_steps).setZero();
  d.portfolio.resize(k, n_steps + 1);
  d.rewards.resize(k, n_steps + 1);
  d.portfolio.col(n_steps) = term.portfolio;
  d.rewards.col(n_steps) = term.reward;
  for (int t = n_steps - 1; t >= 0; --t) {
    d.portfolio.col(t) = dp::rollback_portfolio(d.portfolio.col(t + 1), d.actions.col(t), inc.delta_s.col(t), risk.gamma);
    d.rewards.col(t) = dp::compute_rewards(d.portfolio.col(t + 1), d.portfolio.col(t), risk.gamma, risk.lambda);
  }
  return d;
}

Eigen::VectorXd psi_features(double action, const Eigen::Ref<const Eigen::VectorXd>& phi_x) {
  const Eigen::Index n = phi_x.size();
  Eigen::VectorXd psi(3 * n);
  psi.segment(0, n) = phi_x;
  psi.segment(n, n) = action * phi_x;
  psi.segment(2 * n, n) = 0.5 * action * action * phi_x;
  return psi;
}

GreedyChoice greedy_action(const WMatrix& w, const Eigen::Ref<const Eigen::VectorXd>& phi_x, double fallback_action) {
  const Eigen::Vector3d u = w * phi_x;
  GreedyChoice c;
  c.concave = u(2) < 0.0;
  c.action = c.concave ? -u(1) / u(2) : fallback_action;
  c.value = u(0) + c.action * u(1) + 0.5 * c.action * c.action * u(2);
  return c;
}

BackwardStep fqi_backward_step(const Eigen::Ref<const Eigen::VectorXd>& actions_t,
                               const Eigen::Ref<const Eigen::VectorXd>& rewards_t, const basis::FeatureMatrix& phi_t,
                               const Eigen::Ref<const Eigen::VectorXd>& q_next, double gamma,
                               const FqiOptions& options) {
  const Eigen::MatrixXd& phi = phi_t.values;
  const Eigen::Index k = phi.rows();
  const Eigen::Index n = phi.cols();
  if (actions_t.size() != k || rewards_t.size() != k || q_next.size() != k)
    throw std::invalid_argument("FQI step: inputs must have one entry per path");

  Eigen::MatrixXd psi(k, 3 * n);
  psi.leftCols(n) = phi;
  psi.middleCols(n, n) = actions_t.asDiagonal() * phi;
  psi.rightCols(n) = (0.5 * actions_t.array().square()).matrix().asDiagonal() * phi;

  const Eigen::VectorXd target = rewards_t + gamma * q_next;
  const Eigen::MatrixXd gram = kernels::weighted_gram(psi, {}, options.exec);
  const Eigen::VectorXd rhs = kernels::weighted_moment(psi, target, options.exec);
  const Eigen::VectorXd coef =
      numerics::solve_normal_equations(gram, rhs, numerics::relative_ridge(gram, options.ridge_scale));

  BackwardStep step;
  step.underdetermined = k < 3 * n;
  step.w.resize(3, n);
  for (int i = 0; i < 3; ++i) step.w.row(i) = coef.segment(i * n, n).transpose();

  const Eigen::MatrixXd u = phi * step.w.transpose();  // K x 3
  step.q.resize(k);
  if (options.policy == ActionPolicy::Observed) {
    const auto a = actions_t.array();
    step.q = (u.col(0).array() + a * u.col(1).array() + 0.5 * a.square() * u.col(2).array()).matrix();
  } else {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double u2 = u(i, 1);
      const double u3 = u(i, 2);
      double a = actions_t(i);
      if (u3 < 0.0) {
        a = -u2 / u3;
      } else {
        ++step.nonconcave;
      }
      step.q(i) = u(i, 0) + a * u2 + 0.5 * a * a * u3;
    }
  }
  return step;
}

FQISolution run_fqi(const OfflineDataset& dataset, const basis::BasisSpec& spec, double gamma,
                    const FqiOptions& options) {
  dataset.validate();
  spec.validate();
  if (!std::isfinite(gamma) || gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  const int n_steps = dataset.n_steps();
  const Eigen::Index k = dataset.n_paths();

  FQISolution sol;
  sol.w.resize(static_cast<std::size_t>(n_steps));
  sol.q_values.resize(k, n_steps + 1);
  sol.q_values.col(n_steps) = dataset.rewards.col(n_steps) - dataset.portfolio.col(n_steps);

  if (k < 3 * static_cast<Eigen::Index>(spec.n_basis)) {
    std::ostringstream msg;
    msg << "only " << k << " paths for " << 3 * spec.n_basis
        << " coefficients per step; the fit is pinned down by the ridge penalty";
    sol.warnings.push_back(msg.str());
  }

  for (int t = n_steps - 1; t >= 0; --t) {
    const auto phi = basis::feature_matrix(spec, dataset.states.col(t), options.exec);
    auto step = fqi_backward_step(dataset.actions.col(t), dataset.rewards.col(t), phi, sol.q_values.col(t + 1), gamma,
                                  options);
    sol.q_values.col(t) = step.q;
    sol.nonconcave_count += step.nonconcave;
    sol.w[static_cast<std::size_t>(t)] = std::move(step.w);
  }
  if (sol.nonconcave_count > 0) {
    std::ostringstream msg;
    msg << sol.nonconcave_count << " state(s) had a non-concave fitted Q; the stored action was used there";
    sol.warnings.push_back(msg.str());
  }
  sol.price_t0 = -sol.q_values.col(0).mean();
  return sol;
}

void save_dataset_csv(const OfflineDataset& dataset, std::ostream& out) {
  dataset.validate();
  const int n_steps = dataset.n_steps();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "t,k,state,action,reward,next_state,portfolio\n";
  for (int t = 0; t <= n_steps; ++t) {
    for (Eigen::Index k = 0; k < dataset.n_paths(); ++k) {
      out << t << ',' << k << ',' << dataset.states(k, t) << ',' << dataset.actions(k, t) << ','
          << dataset.rewards(k, t) << ',';
      if (t < n_steps) out << dataset.states(k, t + 1);
      out << ',' << dataset.portfolio(k, t) << '\n';
    }
  }
}

namespace {

double cell_value(const std::string& s, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw std::invalid_argument("bad number in dataset at line " + std::to_string(line_no));
  return v;
}

}  // namespace

OfflineDataset load_dataset_csv(std::istream& in) {
  struct Rec {
    long t, k;
    double state, action, reward, portfolio;
  };
  std::vector<Rec> recs;
  std::string line;
  int line_no = 0;
  long max_t = -1, max_k = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("t,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw std::invalid_argument("dataset row needs 7 columns at line " + std::to_string(line_no));
    Rec r{static_cast<long>(cell_value(cells[0], line_no)), static_cast<long>(cell_value(cells[1], line_no)),
          cell_value(cells[2], line_no), cell_value(cells[3], line_no), cell_value(cells[4], line_no),
          cell_value(cells[6], line_no)};
    if (r.t < 0 || r.k < 0) throw std::invalid_argument("negative index in dataset at line " + std::to_string(line_no));
    max_t = std::max(max_t, r.t);
    max_k = std::max(max_k, r.k);
    recs.push_back(r);
  }
  if (recs.empty()) throw std::invalid_argument("dataset is empty");
  const Eigen::Index k = max_k + 1;
  const Eigen::Index c = max_t + 1;
  if (static_cast<Eigen::Index>(recs.size()) != k * c)
    throw std::invalid_argument("dataset does not cover every (t, k) pair exactly once");

  OfflineDataset d;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  d.states = Eigen::MatrixXd::Constant(k, c, nan);
  d.actions = d.states;
  d.rewards = d.states;
  d.portfolio = d.states;
  for (const auto& r : recs) {
    if (!std::isnan(d.states(r.k, r.t))) throw std::invalid_argument("duplicate (t, k) pair in dataset");
    d.states(r.k, r.t) = r.state;
    d.actions(r.k, r.t) = r.action;
    d.rewards(r.k, r.t) = r.reward;
    d.portfolio(r.k, r.t) = r.portfolio;
  }
  d.validate();
  return d;
}

}  // namespace qlbs::fqi
