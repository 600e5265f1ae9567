#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qlbs/analytic_bsm.hpp"
#include "qlbs/basis.hpp"
#include "qlbs/experiments.hpp"
#include "qlbs/market_sim.hpp"
#include "qlbs/qlbs_dp.hpp"
#include "qlbs/qlbs_fqi.hpp"

namespace {

using nlohmann::json;
using namespace qlbs;

struct MarketOpts {
  market::MarketParams p;
  std::string paths_file;
  std::optional<double> dt;

  void add(CLI::App* app, bool allow_file) {
    app->add_option("--s0", p.s0, "initial stock price")->capture_default_str();
    app->add_option("--mu", p.mu, "drift")->capture_default_str();
    app->add_option("--sigma", p.sigma, "volatility")->capture_default_str();
    app->add_option("--r", p.r, "risk-free rate")->capture_default_str();
    app->add_option("--maturity", p.maturity, "maturity in years")->capture_default_str();
    app->add_option("--n-steps", p.n_steps, "time steps")->capture_default_str();
    app->add_option("--n-paths", p.n_paths, "Monte Carlo paths")->capture_default_str();
    app->add_option("--seed", p.seed, "RNG seed")->capture_default_str();
    if (allow_file) {
      app->add_option("--paths", paths_file, "read paths from a CSV file instead of simulating");
      app->add_option("--dt", dt, "time step for --paths files without dt metadata");
    }
  }

  market::PathSet load() const {
    if (paths_file.empty()) return market::simulate_gbm(p);
    auto paths = market::load_paths(paths_file, dt);
    // rate and drift flags take precedence only when the file has none
    if (paths.params.r == 0.0) paths.params.r = p.r;
    return paths;
  }
};

struct ModelOpts {
  double strike = 100.0;
  double lambda = 1e-4;
  bool full_hedge = false;
  std::string state = "X";
  int n_splines = 12;
  int order = 4;
  double ridge = numerics::kDefaultRidgeScale;
  std::string dump;

  void add(CLI::App* app) {
    app->add_option("--strike", strike, "put strike")->capture_default_str();
    app->add_option("--lambda", lambda, "risk aversion")->capture_default_str();
    app->add_flag("--full-hedge", full_hedge, "keep the drift term of the hedge (needs lambda > 0)");
    app->add_option("--state", state, "state variable: X, S or lnS")->capture_default_str();
    app->add_option("--n-splines", n_splines, "number of B-spline basis functions")->capture_default_str();
    app->add_option("--spline-order", order, "B-spline order (degree + 1)")->capture_default_str();
    app->add_option("--ridge", ridge, "relative ridge scale")->capture_default_str();
    app->add_option("--dump", dump, "write per-path matrices to this CSV file");
  }
};

void write_matrix_csv(const std::string& file, const std::vector<std::pair<std::string, Eigen::MatrixXd>>& mats) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "name,k";
  const auto cols = mats.front().second.cols();
  for (Eigen::Index t = 0; t < cols; ++t) out << ",t" << t;
  out << '\n';
  for (const auto& [name, m] : mats) {
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      out << name << ',' << k;
      for (Eigen::Index t = 0; t < m.cols(); ++t) out << ',' << m(k, t);
      out << '\n';
    }
  }
}

json knots_json(const basis::BasisSpec& spec) { return spec.knots; }

int cmd_simulate(const MarketOpts& m, const std::string& out) {
  const auto paths = market::simulate_gbm(m.p);
  if (out.empty() || out == "-") {
    market::save_paths(paths, std::cout);
  } else {
    market::save_paths(paths, std::filesystem::path(out));
  }
  return 0;
}

int cmd_price_bs(const market::MarketParams& p, double strike, const std::string& format) {
  const auto q = bsm::bsm_put(p.s0, strike, p.r, p.sigma, p.maturity);
  if (format == "csv") {
    std::cout << "s0,strike,r,sigma,maturity,price,delta,d1,d2\n"
              << std::setprecision(std::numeric_limits<double>::max_digits10) << p.s0 << ',' << strike << ','
              << p.r << ',' << p.sigma << ',' << p.maturity << ',' << q.price << ',' << q.delta << ',' << q.d1 << ','
              << q.d2 << '\n';
  } else {
    json j{{"s0", p.s0},       {"strike", strike},  {"r", p.r},   {"sigma", p.sigma}, {"maturity", p.maturity},
           {"price", q.price}, {"delta", q.delta}, {"d1", q.d1}, {"d2", q.d2}};
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_price_dp(const MarketOpts& m, const ModelOpts& o) {
  const auto paths = m.load();
  const auto kind = market::state_kind_from_string(o.state);
  const auto states = market::compute_states(paths, kind);
  const auto spec = basis::make_spec_for(states.values, o.n_splines, o.order);
  const auto risk = dp::RiskParams::make(o.lambda, paths.params.r, paths.dt, !o.full_hedge);
  const auto sol = dp::run_model_based(paths, dp::basis_features(states, spec), o.strike, risk, {o.ridge});
  const auto q = bsm::bsm_put(paths.params.s0, o.strike, paths.params.r, paths.params.sigma, paths.dt * paths.n_steps());
  json j{{"method", "dp"},          {"state", market::to_string(kind)},
         {"price", sol.price_t0},   {"hedge_t0", sol.hedge_t0},
         {"bsm_price", q.price},    {"bsm_delta", q.delta},
         {"n_paths", paths.n_paths()}, {"n_steps", paths.n_steps()},
         {"seed", paths.params.seed}, {"knots", knots_json(spec)}};
  std::cout << j.dump(2) << '\n';
  if (!o.dump.empty())
    write_matrix_csv(o.dump, {{"hedge", sol.hedges}, {"portfolio", sol.portfolio}, {"reward", sol.rewards},
                              {"q", sol.q_values}});
  return 0;
}

int cmd_price_fqi(const MarketOpts& m, const ModelOpts& o, double noise, const std::string& policy,
                  const std::string& dataset_in, const std::string& dataset_out) {
  const fqi::FqiOptions opts{o.ridge, fqi::action_policy_from_string(policy)};
  fqi::OfflineDataset data;
  double gamma = 1.0;
  json extra = json::object();
  if (!dataset_in.empty()) {
    std::ifstream in(dataset_in);
    if (!in) throw std::runtime_error("cannot open dataset: " + dataset_in);
    data = fqi::load_dataset_csv(in);
    const double dt = m.dt.value_or(m.p.maturity / data.n_steps());
    gamma = std::exp(-m.p.r * dt);
  } else {
    const auto paths = m.load();
    const auto kind = market::state_kind_from_string(o.state);
    const auto states = market::compute_states(paths, kind);
    const auto spec = basis::make_spec_for(states.values, o.n_splines, o.order);
    const auto risk = dp::RiskParams::make(o.lambda, paths.params.r, paths.dt, !o.full_hedge);
    const auto dp_sol = dp::run_model_based(paths, dp::basis_features(states, spec), o.strike, risk, {o.ridge});
    const auto actions = fqi::perturb_actions(dp_sol.hedges, noise, paths.params.seed);
    data = fqi::build_offline_dataset(paths, states, actions, o.strike, risk);
    gamma = risk.gamma;
    const auto q = bsm::bsm_put(paths.params.s0, o.strike, paths.params.r, paths.params.sigma,
                                paths.dt * paths.n_steps());
    extra = {{"state", market::to_string(kind)}, {"dp_price", dp_sol.price_t0}, {"bsm_price", q.price},
             {"bsm_delta", q.delta}, {"noise", noise}, {"seed", paths.params.seed}};
  }
  if (!dataset_out.empty()) {
    std::ofstream out(dataset_out);
    if (!out) throw std::runtime_error("cannot write dataset: " + dataset_out);
    fqi::save_dataset_csv(data, out);
  }
  const auto spec = basis::make_spec_for(data.states, o.n_splines, o.order);
  const auto sol = fqi::run_fqi(data, spec, gamma, opts);
  for (const auto& w : sol.warnings) std::cerr << "qlbs: warning: " << w << '\n';
  const auto phi0 = basis::eval_basis(spec, data.states(0, 0));
  const auto greedy = fqi::greedy_action(sol.w.front(), phi0, data.actions.col(0).mean());
  json j{{"method", "fqi"},           {"policy", policy},
         {"price", sol.price_t0},     {"hedge_t0", greedy.action},
         {"n_paths", data.n_paths()}, {"n_steps", data.n_steps()},
         {"nonconcave", sol.nonconcave_count}, {"knots", knots_json(spec)}};
  j.update(extra);
  std::cout << j.dump(2) << '\n';
  if (!o.dump.empty())
    write_matrix_csv(o.dump, {{"action", data.actions}, {"reward", data.rewards}, {"q", sol.q_values}});
  return 0;
}

int cmd_experiment(const std::string& name, const std::string& config_file, const std::string& out,
                   const std::string& format, bool strict, const std::string& tw_out, std::optional<int> seeds,
                   bool print_config) {
  experiments::ScenarioConfig config;
  if (!config_file.empty()) {
    config = experiments::load_config(config_file);
    if (experiments::scenario_from_string(name) != config.scenario)
      throw std::invalid_argument("config file is for scenario '" + std::string(to_string(config.scenario)) +
                                  "', not '" + name + "'");
  } else {
    config = experiments::ScenarioConfig::defaults(experiments::scenario_from_string(name));
  }
  if (seeds) config.n_seeds = *seeds;
  if (print_config) {
    config.validate();
    std::cout << experiments::to_json(config).dump(2) << '\n';
    return 0;
  }
  std::string target = out.empty() ? config.output : out;
  config.output = target;
  const auto fmt = experiments::report_format_from_string(format);
  const auto result = experiments::run_scenario(config);
  if (target.empty() || target == "-") {
    experiments::emit_report(result, fmt, std::cout);
  } else {
    experiments::emit_report(result, fmt, std::filesystem::path(target));
  }
  if (!tw_out.empty()) {
    std::ofstream tw(tw_out);
    if (!tw) throw std::runtime_error("cannot write " + tw_out);
    experiments::emit_wealth_csv(result.wealth, tw);
  }
  if (result.failures > 0) {
    std::cerr << "qlbs: " << result.failures << " cell(s) failed\n";
    for (const auto& r : result.rows)
      if (!r.error.empty())
        std::cerr << "  cell " << r.cell << ' ' << r.state << ' ' << r.method << " seed " << r.seed << ": " << r.error
                  << '\n';
    if (strict) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QLBS option pricing and hedging"};
  app.require_subcommand(1);

  MarketOpts sim_m;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "simulate GBM paths to CSV");
  sim_m.add(sim, false);
  sim->add_option("--out,-o", sim_out, "output file (stdout when omitted)");

  market::MarketParams bs_p;
  double bs_strike = 100.0;
  std::string bs_format = "json";
  auto* bs = app.add_subcommand("price-bs", "Black-Scholes-Merton put price and delta");
  bs->add_option("--s0", bs_p.s0)->capture_default_str();
  bs->add_option("--strike", bs_strike)->capture_default_str();
  bs->add_option("--r", bs_p.r)->capture_default_str();
  bs->add_option("--sigma", bs_p.sigma)->capture_default_str();
  bs->add_option("--maturity", bs_p.maturity)->capture_default_str();
  bs->add_option("--format", bs_format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  MarketOpts dp_m;
  ModelOpts dp_o;
  auto* dpc = app.add_subcommand("price-qlbs-dp", "model-based QLBS price by backward recursion");
  dp_m.add(dpc, true);
  dp_o.add(dpc);

  MarketOpts fq_m;
  ModelOpts fq_o;
  double noise = 0.2;
  std::string policy = "observed", dataset_in, dataset_out;
  auto* fq = app.add_subcommand("price-qlbs-fqi", "model-free QLBS price by fitted Q iteration");
  fq_m.add(fq, true);
  fq_o.add(fq);
  fq->add_option("--noise", noise, "multiplicative action noise level")->capture_default_str();
  fq->add_option("--policy", policy, "next-step action: observed or greedy")
      ->check(CLI::IsMember({"observed", "greedy"}))
      ->capture_default_str();
  fq->add_option("--dataset-in", dataset_in, "train on an offline dataset CSV");
  fq->add_option("--dataset-out", dataset_out, "save the offline dataset CSV");

  std::string ex_name, ex_config, ex_out, ex_format = "csv", ex_tw;
  bool ex_strict = false, ex_print = false;
  std::optional<int> ex_seeds;
  auto* ex = app.add_subcommand("experiment", "run a scenario sweep");
  ex->add_option("name", ex_name, "vol_sweep, noise_grid, hedge_frequency, moneyness, transaction_costs, "
                                  "basis_sensitivity or single")
      ->required();
  ex->add_option("--config", ex_config, "scenario config JSON");
  ex->add_option("--out", ex_out, "report file (stdout when omitted)");
  ex->add_option("--format", ex_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  ex->add_flag("--strict", ex_strict, "exit nonzero when any cell fails");
  ex->add_option("--tw-out", ex_tw, "per-path terminal wealth CSV");
  ex->add_option("--seeds", ex_seeds, "override n_seeds");
  ex->add_flag("--print-config", ex_print, "print the effective config as JSON and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_m, sim_out);
    if (*bs) return cmd_price_bs(bs_p, bs_strike, bs_format);
    if (*dpc) return cmd_price_dp(dp_m, dp_o);
    if (*fq) return cmd_price_fqi(fq_m, fq_o, noise, policy, dataset_in, dataset_out);
    if (*ex) return cmd_experiment(ex_name, ex_config, ex_out, ex_format, ex_strict, ex_tw, ex_seeds, ex_print);
  } catch (const std::exception& e) {
    std::cerr << "qlbs: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
