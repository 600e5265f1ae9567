#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qlbs/analytic_bsm.hpp"
#include "qlbs/experiments.hpp"

namespace qlbs::experiments {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NamedScenario {
  Scenario value;
  const char* name;
};

constexpr NamedScenario kScenarioNames[] = {
    {Scenario::VolSweep, "vol_sweep"},
    {Scenario::NoiseGrid, "noise_grid"},
    {Scenario::HedgeFrequency, "hedge_frequency"},
    {Scenario::Moneyness, "moneyness"},
    {Scenario::TransactionCosts, "transaction_costs"},
    {Scenario::BasisSensitivity, "basis_sensitivity"},
    {Scenario::Single, "single"},
};

std::string normalize(const std::string& s) {
  // accept VolSweep, vol-sweep and vol_sweep alike
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_integer_axis(const std::string& axis) {
  return axis == "n_paths" || axis == "n_steps" || axis == "n_basis" || axis == "order";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string knot_string(const basis::BasisSpec& spec) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < spec.knots.size(); ++i) os << (i ? " " : "") << spec.knots[i];
  return os.str();
}

json market_json(const market::MarketParams& m) {
  return {{"s0", m.s0},       {"mu", m.mu},           {"sigma", m.sigma},     {"r", m.r},
          {"maturity", m.maturity}, {"n_steps", m.n_steps}, {"n_paths", m.n_paths}, {"seed", m.seed}};
}

market::MarketParams market_from_json(const json& j, market::MarketParams m) {
  static const std::set<std::string> keys{"s0", "mu", "sigma", "r", "maturity", "n_steps", "n_paths", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw std::invalid_argument("unknown market field: " + k);
  }
  m.s0 = j.value("s0", m.s0);
  m.mu = j.value("mu", m.mu);
  m.sigma = j.value("sigma", m.sigma);
  m.r = j.value("r", m.r);
  m.maturity = j.value("maturity", m.maturity);
  m.n_steps = j.value("n_steps", m.n_steps);
  m.n_paths = j.value("n_paths", m.n_paths);
  m.seed = j.value("seed", m.seed);
  return m;
}

json cell_json(const CellParams& c) {
  return {{"market", market_json(c.market)}, {"strike", c.strike},     {"lambda", c.lambda},
          {"noise", c.noise},                {"cost_rate", c.cost_rate}, {"n_basis", c.n_basis},
          {"order", c.order}};
}

}  // namespace

const char* to_string(Scenario scenario) {
  for (const auto& n : kScenarioNames)
    if (n.value == scenario) return n.name;
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  const std::string key = normalize(name);
  for (const auto& n : kScenarioNames)
    if (normalize(n.name) == key) return n.value;
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* to_string(Method method) { return method == Method::DP ? "dp" : "fqi"; }

Method method_from_string(const std::string& name) {
  const std::string key = normalize(name);
  if (key == "dp") return Method::DP;
  if (key == "fqi") return Method::FQI;
  throw std::invalid_argument("unknown method: " + name);
}

ScenarioConfig ScenarioConfig::defaults(Scenario scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::VolSweep:
      c.sweep["sigma"] = {0.15, 0.25, 0.40};
      break;
    case Scenario::NoiseGrid:
      c.market.sigma = 0.2;
      c.sweep["n_paths"] = {100, 1000, 5000, 10000};
      c.sweep["noise"] = {0.4, 0.8};
      c.methods = {Method::FQI};
      break;
    case Scenario::HedgeFrequency:
      // weekly, bi-weekly, monthly, semi-annual over one year
      c.sweep["n_steps"] = {52, 26, 12, 2};
      break;
    case Scenario::Moneyness: {
      auto& z = c.sweep["strike"];
      for (int k = 60; k <= 140; k += 5) z.push_back(k);
      c.sweep["lambda"] = {1e-4, 1e-3};
      c.methods = {Method::DP};
      break;
    }
    case Scenario::TransactionCosts:
      c.lambda = 0.002;
      c.cost_rate = 0.01;
      c.sweep["cost_rate"] = {0.01};
      c.methods = {Method::DP};
      break;
    case Scenario::BasisSensitivity:
      c.sweep["n_basis"] = {15, 20, 50, 100};
      c.sweep["order"] = {1, 3, 10};
      c.methods = {Method::DP};
      break;
    case Scenario::Single:
      c.state_kinds = {market::StateKind::DriftAdjusted};
      c.methods = {Method::DP};
      c.n_seeds = 1;
      break;
  }
  return c;
}

void ScenarioConfig::validate() const {
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be at least 1");
  if (state_kinds.empty()) throw std::invalid_argument("state_kinds must not be empty");
  if (methods.empty()) throw std::invalid_argument("methods must not be empty");
  if (!(ridge_scale >= 0.0) || !std::isfinite(ridge_scale)) throw std::invalid_argument("ridge_scale must be >= 0");
  const auto& axes = sweep_axes();
  for (const auto& [axis, values] : sweep) {
    if (std::find(axes.begin(), axes.end(), axis) == axes.end())
      throw std::invalid_argument("unknown sweep axis: " + axis);
    if (values.empty()) throw std::invalid_argument("sweep axis '" + axis + "' has no values");
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("sweep axis '" + axis + "' has a non-finite value");
      if (is_integer_axis(axis) && (v != std::floor(v) || v < 1.0))
        throw std::invalid_argument("sweep axis '" + axis + "' needs positive integers");
    }
  }
  for (const auto& cell : expand_cells(*this)) {
    cell.market.validate();
    if (!(cell.strike > 0.0)) throw std::invalid_argument("strike must be positive");
    if (!(cell.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    if (!pure_risk && !(cell.lambda > 0.0)) throw std::invalid_argument("the full hedge needs lambda > 0");
    if (!(cell.noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
    if (!(cell.cost_rate >= 0.0 && cell.cost_rate < 1.0)) throw std::invalid_argument("cost_rate must be in [0, 1)");
    if (cell.order < 1 || cell.n_basis < cell.order)
      throw std::invalid_argument("need 1 <= order <= n_basis (got n_basis=" + std::to_string(cell.n_basis) +
                                  ", order=" + std::to_string(cell.order) + ")");
  }
}

nlohmann::json to_json(const ScenarioConfig& c) {
  json states = json::array();
  for (auto k : c.state_kinds) states.push_back(market::to_string(k));
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  json sweep = json::object();
  for (const auto& [axis, values] : c.sweep) sweep[axis] = values;
  return {{"scenario", to_string(c.scenario)},
          {"market", market_json(c.market)},
          {"strike", c.strike},
          {"lambda", c.lambda},
          {"pure_risk", c.pure_risk},
          {"n_basis", c.n_basis},
          {"order", c.order},
          {"state_kinds", states},
          {"noise", c.noise},
          {"sweep", sweep},
          {"methods", methods},
          {"n_seeds", c.n_seeds},
          {"ridge_scale", c.ridge_scale},
          {"cost_rate", c.cost_rate},
          {"tw_formula", to_string(c.tw_formula)},
          {"fqi_policy", fqi::to_string(c.fqi_policy)},
          {"output", c.output}};
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario config must be a JSON object");
  static const std::set<std::string> keys{"scenario", "market",   "strike",      "lambda",    "pure_risk",
                                          "n_basis",  "order",    "state_kinds", "noise",     "sweep",
                                          "methods",  "n_seeds",  "ridge_scale", "cost_rate", "tw_formula",
                                          "fqi_policy", "output"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw std::invalid_argument("unknown config field: " + k);
  }
  const Scenario scenario = j.contains("scenario") ? scenario_from_string(j.at("scenario").get<std::string>())
                                                   : Scenario::Single;
  ScenarioConfig c = ScenarioConfig::defaults(scenario);
  if (j.contains("market")) c.market = market_from_json(j.at("market"), c.market);
  c.strike = j.value("strike", c.strike);
  c.lambda = j.value("lambda", c.lambda);
  c.pure_risk = j.value("pure_risk", c.pure_risk);
  c.n_basis = j.value("n_basis", c.n_basis);
  c.order = j.value("order", c.order);
  c.noise = j.value("noise", c.noise);
  c.n_seeds = j.value("n_seeds", c.n_seeds);
  c.ridge_scale = j.value("ridge_scale", c.ridge_scale);
  c.cost_rate = j.value("cost_rate", c.cost_rate);
  c.output = j.value("output", c.output);
  if (j.contains("tw_formula")) c.tw_formula = tw_formula_from_string(j.at("tw_formula").get<std::string>());
  if (j.contains("fqi_policy")) c.fqi_policy = fqi::action_policy_from_string(j.at("fqi_policy").get<std::string>());
  if (j.contains("state_kinds")) {
    c.state_kinds.clear();
    for (const auto& s : j.at("state_kinds")) c.state_kinds.push_back(market::state_kind_from_string(s.get<std::string>()));
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
  }
  if (j.contains("sweep")) {
    c.sweep.clear();
    for (const auto& [axis, values] : j.at("sweep").items()) c.sweep[axis] = values.get<std::vector<double>>();
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config: " + file.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
}

std::vector<CellParams> expand_cells(const ScenarioConfig& config) {
  CellParams base;
  base.market = config.market;
  base.strike = config.strike;
  base.lambda = config.lambda;
  base.noise = config.noise;
  base.cost_rate = config.cost_rate;
  base.n_basis = config.n_basis;
  base.order = config.order;

  std::vector<CellParams> cells{base};
  for (const auto& [axis, values] : config.sweep) {
    std::vector<CellParams> next;
    next.reserve(cells.size() * values.size());
    for (const auto& c : cells) {
      for (double v : values) {
        CellParams x = c;
        if (axis == "sigma") x.market.sigma = v;
        else if (axis == "mu") x.market.mu = v;
        else if (axis == "r") x.market.r = v;
        else if (axis == "n_paths") x.market.n_paths = static_cast<int>(v);
        else if (axis == "n_steps") x.market.n_steps = static_cast<int>(v);
        else if (axis == "noise") x.noise = v;
        else if (axis == "strike") x.strike = v;
        else if (axis == "lambda") x.lambda = v;
        else if (axis == "cost_rate") x.cost_rate = v;
        else if (axis == "n_basis") x.n_basis = static_cast<int>(v);
        else if (axis == "order") x.order = static_cast<int>(v);
        else throw std::invalid_argument("unknown sweep axis: " + axis);
        next.push_back(x);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult result;
  result.config = config;
  const auto cells = expand_cells(config);
  const bool track_wealth =
      config.scenario == Scenario::TransactionCosts || config.cost_rate > 0.0 || config.sweep.count("cost_rate");

  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const CellParams& cell = cells[ci];
    const auto quote = bsm::bsm_put(cell.market.s0, cell.strike, cell.market.r, cell.market.sigma,
                                       cell.market.maturity);
    for (int s = 0; s < config.n_seeds; ++s) {
      market::MarketParams mp = cell.market;
      mp.seed = cell.market.seed + static_cast<std::uint64_t>(s);
      std::optional<market::PathSet> paths;
      std::string sim_error;
      try {
        paths = market::simulate_gbm(mp);
      } catch (const std::exception& e) {
        sim_error = e.what();
      }

      for (auto kind : config.state_kinds) {
        ResultRow proto;
        proto.scenario = to_string(config.scenario);
        proto.cell = static_cast<int>(ci);
        proto.state = market::to_string(kind);
        proto.seed = mp.seed;
        proto.sigma = mp.sigma;
        proto.n_steps = mp.n_steps;
        proto.n_paths = mp.n_paths;
        proto.noise = cell.noise;
        proto.strike = cell.strike;
        proto.lambda = cell.lambda;
        proto.n_basis = cell.n_basis;
        proto.order = cell.order;
        proto.cost_rate = cell.cost_rate;
        proto.bsm_price = quote.price;
        proto.bsm_delta = quote.delta;
        proto.price = proto.hedge_t0 = proto.tw_mean = proto.tw_median = kNaN;

        std::optional<dp::DPSolution> dp_sol;
        std::optional<basis::BasisSpec> spec;
        std::optional<market::StateSeries> states;
        std::string dp_error = sim_error;
        double dp_runtime = 0.0;
        const auto risk_or = [&]() { return dp::RiskParams::make(cell.lambda, mp.r, mp.dt(), config.pure_risk); };

        if (paths) {
          const auto t0 = clock::now();
          try {
            states = market::compute_states(*paths, kind);
            spec = basis::make_spec_for(states->values, cell.n_basis, cell.order);
            proto.knots = knot_string(*spec);
            dp_sol = dp::run_model_based(*paths, dp::basis_features(*states, *spec), cell.strike, risk_or(),
                                         {config.ridge_scale, Exec::Parallel});
          } catch (const std::exception& e) {
            dp_error = e.what();
          }
          dp_runtime = seconds_since(t0);
        }

        for (auto method : config.methods) {
          ResultRow row = proto;
          row.method = to_string(method);
          json id = cell_json(cell);
          id["market"]["seed"] = mp.seed;
          id["state"] = row.state;
          id["method"] = row.method;
          id["pure_risk"] = config.pure_risk;
          id["ridge_scale"] = config.ridge_scale;
          id["fqi_policy"] = fqi::to_string(config.fqi_policy);
          id["tw_formula"] = to_string(config.tw_formula);
          row.config_hash = fnv1a_hex(id.dump());

          if (!dp_sol) {
            row.error = (method == Method::FQI ? "optimal actions unavailable: " : "") + dp_error;
            row.runtime_s = dp_runtime;
            ++result.failures;
            result.rows.push_back(row);
            continue;
          }
          if (method == Method::DP) {
            row.price = dp_sol->price_t0;
            row.hedge_t0 = dp_sol->hedge_t0;
            row.runtime_s = dp_runtime;
            if (track_wealth) {
              try {
                auto tw = terminal_wealth(*paths, dp_sol->hedges, cell.strike, cell.cost_rate, dp_sol->price_t0,
                                          config.tw_formula);
                auto report = TerminalWealthReport::from(std::move(tw), kind, cell.cost_rate);
                row.tw_mean = report.mean;
                row.tw_median = report.median;
                result.wealth.push_back(std::move(report));
              } catch (const std::exception& e) {
                row.error = e.what();
                ++result.failures;
              }
            }
          } else {
            const auto t0 = clock::now();
            try {
              const auto risk = risk_or();
              const auto noisy = fqi::perturb_actions(dp_sol->hedges, cell.noise, mp.seed);
              const auto data = fqi::build_offline_dataset(*paths, *states, noisy, cell.strike, risk);
              const auto sol = fqi::run_fqi(data, *spec, risk.gamma, {config.ridge_scale, config.fqi_policy});
              row.price = sol.price_t0;
              const auto phi0 = basis::eval_basis(*spec, states->values(0, 0));
              row.hedge_t0 = fqi::greedy_action(sol.w.front(), phi0, noisy.col(0).mean()).action;
            } catch (const std::exception& e) {
              row.error = e.what();
              ++result.failures;
            }
            // the FQI row includes the DP pass that produced its behaviour actions
            row.runtime_s = dp_runtime + seconds_since(t0);
          }
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<int, std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const auto key = std::make_tuple(r.cell, r.state, r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      SummaryRow s;
      s.cell = r.cell;
      s.state = r.state;
      s.method = r.method;
      s.sigma = r.sigma;
      s.n_steps = r.n_steps;
      s.n_paths = r.n_paths;
      s.noise = r.noise;
      s.strike = r.strike;
      s.lambda = r.lambda;
      s.n_basis = r.n_basis;
      s.order = r.order;
      s.cost_rate = r.cost_rate;
      s.bsm_price = r.bsm_price;
      s.bsm_delta = r.bsm_delta;
      it = index.emplace(key, out.size()).first;
      out.push_back(s);
    }
    auto& s = out[it->second];
    s.price += r.price;
    s.hedge_t0 += r.hedge_t0;
    s.tw_mean += r.tw_mean;
    s.tw_median += r.tw_median;
    ++s.n_seeds;
  }
  for (auto& s : out) {
    s.price /= s.n_seeds;
    s.hedge_t0 /= s.n_seeds;
    s.tw_mean /= s.n_seeds;
    s.tw_median /= s.n_seeds;
  }
  return out;
}

}  // namespace qlbs::experiments
