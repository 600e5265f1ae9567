#include "qlbs/market_sim.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qlbs::market {

void MarketParams::validate() const {
  for (double v : {s0, mu, sigma, r, maturity}) {
    if (!std::isfinite(v)) throw std::invalid_argument("market parameters must be finite");
  }
  if (s0 <= 0.0) throw std::invalid_argument("s0 must be positive");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (maturity <= 0.0) throw std::invalid_argument("maturity must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be at least 1");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
}

const char* to_string(StateKind kind) {
  switch (kind) {
    case StateKind::Price: return "price";
    case StateKind::LogPrice: return "log_price";
    case StateKind::DriftAdjusted: return "drift_adjusted";
  }
  return "?";
}

StateKind state_kind_from_string(const std::string& name) {
  if (name == "price" || name == "S") return StateKind::Price;
  if (name == "log_price" || name == "lnS") return StateKind::LogPrice;
  if (name == "drift_adjusted" || name == "X") return StateKind::DriftAdjusted;
  throw std::invalid_argument("unknown state kind: " + name);
}

PathSet simulate_gbm(const MarketParams& params, Exec exec) {
  params.validate();
  const double dt = params.dt();
  PathSet out;
  out.dt = dt;
  out.params = params;
  out.prices.resize(params.n_paths, params.n_steps + 1);
  kernels::simulate_log_paths(params.s0, (params.mu - 0.5 * params.sigma * params.sigma) * dt,
                              params.sigma * std::sqrt(dt), params.seed, out.prices, exec);
  out.prices = out.prices.array().exp().matrix();
  // exp(log(s0)) can differ from s0 in the last ulp
  out.prices.col(0).setConstant(params.s0);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(t, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == t.size();
}

}  // namespace

PathSet load_paths(std::istream& in, std::optional<double> dt_override) {
  std::map<std::string, double> meta;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      for (const auto& kv : split(t.substr(1), ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        double v = 0.0;
        if (parse_double(kv.substr(eq + 1), v)) meta[trim(kv.substr(0, eq))] = v;
      }
      continue;
    }
    std::vector<double> row;
    bool numeric = true;
    for (const auto& cell : split(t, ',')) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty()) continue;  // column labels
      throw std::invalid_argument("non-numeric value in path file at line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("ragged row in path file at line " + std::to_string(line_no));
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("non-positive price in path file at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("path file has no rows");
  const auto n_cols = rows.front().size();
  if (n_cols < 2) throw std::invalid_argument("path file needs at least two time columns (n_steps >= 1)");

  double dt = 0.0;
  if (dt_override) {
    dt = *dt_override;
  } else if (auto it = meta.find("dt"); it != meta.end()) {
    dt = it->second;
  } else {
    throw std::invalid_argument("path file has no dt metadata and no dt was given");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

  PathSet out;
  out.dt = dt;
  out.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t t = 0; t < n_cols; ++t)
      out.prices(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = rows[k][t];

  const double s0 = out.prices(0, 0);
  if ((out.prices.col(0).array() != s0).any())
    throw std::invalid_argument("all paths must start from the same price");

  auto get = [&](const char* key, double fallback) {
    auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second;
  };
  out.params.s0 = s0;
  out.params.mu = get("mu", 0.0);
  out.params.sigma = get("sigma", 0.0);
  out.params.r = get("r", 0.0);
  out.params.n_steps = static_cast<int>(n_cols) - 1;
  out.params.n_paths = static_cast<int>(rows.size());
  out.params.maturity = dt * out.params.n_steps;
  out.params.seed = static_cast<std::uint64_t>(get("seed", 0.0));
  return out;
}

PathSet load_paths(const std::filesystem::path& file, std::optional<double> dt_override) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open path file: " + file.string());
  return load_paths(in, dt_override);
}

void save_paths(const PathSet& paths, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# dt=" << paths.dt << ";mu=" << paths.params.mu << ";sigma=" << paths.params.sigma
      << ";r=" << paths.params.r << ";seed=" << paths.params.seed << '\n';
  for (Eigen::Index t = 0; t < paths.prices.cols(); ++t) out << (t ? "," : "") << 't' << t;
  out << '\n';
  for (Eigen::Index k = 0; k < paths.prices.rows(); ++k) {
    for (Eigen::Index t = 0; t < paths.prices.cols(); ++t) out << (t ? "," : "") << paths.prices(k, t);
    out << '\n';
  }
}

void save_paths(const PathSet& paths, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write path file: " + file.string());
  save_paths(paths, out);
  if (!out) throw std::runtime_error("error writing path file: " + file.string());
}

StateSeries compute_states(const PathSet& paths, StateKind kind) {
  StateSeries s;
  s.kind = kind;
  switch (kind) {
    case StateKind::Price:
      s.values = paths.prices;
      break;
    case StateKind::LogPrice:
      s.values = paths.prices.array().log().matrix();
      break;
    case StateKind::DriftAdjusted: {
      const double drift = paths.params.mu - 0.5 * paths.params.sigma * paths.params.sigma;
      s.values = paths.prices.array().log().matrix();
      for (Eigen::Index t = 0; t < s.values.cols(); ++t)
        s.values.col(t).array() -= drift * static_cast<double>(t) * paths.dt;
      break;
    }
  }
  return s;
}

Increments price_increments(const PathSet& paths, double r) {
  const Eigen::Index n_steps = paths.prices.cols() - 1;
  if (n_steps < 1) throw std::invalid_argument("price_increments needs at least one step");
  const double carry = std::exp(r * paths.dt);
  Increments inc;
  inc.delta_s = paths.prices.rightCols(n_steps) - carry * paths.prices.leftCols(n_steps);
  inc.delta_s_hat = inc.delta_s;
  for (Eigen::Index t = 0; t < n_steps; ++t) inc.delta_s_hat.col(t).array() -= inc.delta_s.col(t).mean();
  return inc;
}

}  // namespace qlbs::market
