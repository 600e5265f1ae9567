#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qlbs/market_sim.hpp"
#include "qlbs/qlbs_fqi.hpp"

namespace qlbs::experiments {

// ---------------------------------------------------------------------------
// Terminal wealth of the hedged option writer
// ---------------------------------------------------------------------------

enum class TwFormula {
  /// Cost on |a_{t+1} - a_t| at t and c|S_0 - a_0| at inception, as printed.
  Literal,
  /// Cost on the trade executed at t, c |a_t - a_{t-1}| S_t; no cost at expiry.
  Corrected,
};

const char* to_string(TwFormula formula);
TwFormula tw_formula_from_string(const std::string& name);

/// Cash-flow terminal wealth per path: premium, stock trades along the hedge,
/// proportional costs, final liquidation and the put payoff. No interest is
/// accrued on cash.
Eigen::VectorXd terminal_wealth(const market::PathSet& paths, const Eigen::Ref<const Eigen::MatrixXd>& hedges,
                                double strike, double cost_rate, double premium,
                                TwFormula formula = TwFormula::Corrected);

struct TerminalWealthReport {
  Eigen::VectorXd wealth;
  double mean = 0.0;
  double median = 0.0;
  market::StateKind state = market::StateKind::Price;
  double cost_rate = 0.0;

  static TerminalWealthReport from(Eigen::VectorXd wealth, market::StateKind state, double cost_rate);
};

double median(const Eigen::Ref<const Eigen::VectorXd>& values);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

enum class Scenario { VolSweep, NoiseGrid, HedgeFrequency, Moneyness, TransactionCosts, BasisSensitivity, Single };
enum class Method { DP, FQI };

const char* to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);
const char* to_string(Method method);
Method method_from_string(const std::string& name);

/// Axis names accepted in `sweep`.
inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"sigma",  "mu",     "r",         "n_paths", "n_steps", "noise",
                                             "strike", "lambda", "cost_rate", "n_basis", "order"};
  return axes;
}

struct ScenarioConfig {
  market::MarketParams market;
  double strike = 100.0;
  double lambda = 1e-4;
  bool pure_risk = true;
  int n_basis = 12;
  int order = 4;
  std::vector<market::StateKind> state_kinds{market::StateKind::DriftAdjusted, market::StateKind::Price,
                                             market::StateKind::LogPrice};
  double noise = 0.2;
  Scenario scenario = Scenario::Single;
  /// Axis name -> values. Cells are the cartesian product of all axes.
  std::map<std::string, std::vector<double>> sweep;
  std::vector<Method> methods{Method::DP, Method::FQI};
  int n_seeds = 5;
  double ridge_scale = numerics::kDefaultRidgeScale;
  double cost_rate = 0.0;
  TwFormula tw_formula = TwFormula::Corrected;
  fqi::ActionPolicy fqi_policy = fqi::ActionPolicy::Observed;
  std::string output;

  /// Base market parameters with the sweep, methods and risk settings of `scenario`.
  static ScenarioConfig defaults(Scenario scenario);
  void validate() const;
};

nlohmann::json to_json(const ScenarioConfig& config);
/// Fields absent from `j` keep the defaults of the scenario named in `j`.
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& file);

/// One (cell, state, method, seed) outcome.
struct ResultRow {
  std::string scenario;
  int cell = 0;
  std::string state;
  std::string method;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  int n_steps = 0;
  int n_paths = 0;
  double noise = 0.0;
  double strike = 0.0;
  double lambda = 0.0;
  int n_basis = 0;
  int order = 0;
  double cost_rate = 0.0;
  double price = 0.0;
  double hedge_t0 = 0.0;
  double bsm_price = 0.0;
  double bsm_delta = 0.0;
  double tw_mean = 0.0;
  double tw_median = 0.0;
  double runtime_s = 0.0;
  std::string config_hash;
  std::string knots;
  std::string error;

  /// Field-wise equality; NaN entries compare equal to NaN.
  bool operator==(const ResultRow& other) const;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<ResultRow> rows;
  std::vector<TerminalWealthReport> wealth;  // filled when cost_rate is swept or set
  int failures = 0;
};

/// Seed-averaged view of a result table.
struct SummaryRow {
  int cell = 0;
  std::string state;
  std::string method;
  double sigma = 0.0;
  int n_steps = 0;
  int n_paths = 0;
  double noise = 0.0;
  double strike = 0.0;
  double lambda = 0.0;
  int n_basis = 0;
  int order = 0;
  double cost_rate = 0.0;
  double price = 0.0;
  double hedge_t0 = 0.0;
  double bsm_price = 0.0;
  double bsm_delta = 0.0;
  double tw_mean = 0.0;
  double tw_median = 0.0;
  int n_seeds = 0;
};

/// Cell parameters after applying one sweep point.
struct CellParams {
  market::MarketParams market;
  double strike = 0.0;
  double lambda = 0.0;
  double noise = 0.0;
  double cost_rate = 0.0;
  int n_basis = 0;
  int order = 0;
};

std::vector<CellParams> expand_cells(const ScenarioConfig& config);

ScenarioResult run_scenario(const ScenarioConfig& config);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

enum class ReportFormat { CSV, JSON };
ReportFormat report_format_from_string(const std::string& name);

void emit_report(const ScenarioResult& result, ReportFormat format, const std::filesystem::path& file);
void emit_report(const ScenarioResult& result, ReportFormat format, std::ostream& out);

/// Reads a JSON report back into its config and rows.
ScenarioResult load_report_json(std::istream& in);

/// Per-path terminal wealth, one column per report, for histogram plots.
void emit_wealth_csv(const std::vector<TerminalWealthReport>& reports, std::ostream& out);

}  // namespace qlbs::experiments
