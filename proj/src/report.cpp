#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "qlbs/experiments.hpp"

namespace qlbs::experiments {

namespace {

using nlohmann::json;

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols{
      "scenario", "cell",     "state",     "method",   "seed",      "sigma",     "n_steps",   "n_paths",
      "noise",    "strike",   "lambda",    "n_basis",  "order",     "cost_rate", "price",     "hedge_t0",
      "bsm_price", "bsm_delta", "tw_mean", "tw_median", "runtime_s", "config_hash", "knots",  "error"};
  return cols;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string fmt6(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json row_json(const ResultRow& r) {
  return {{"scenario", r.scenario},   {"cell", r.cell},
          {"state", r.state},         {"method", r.method},
          {"seed", r.seed},           {"sigma", num(r.sigma)},
          {"n_steps", r.n_steps},     {"n_paths", r.n_paths},
          {"noise", num(r.noise)},    {"strike", num(r.strike)},
          {"lambda", num(r.lambda)},  {"n_basis", r.n_basis},
          {"order", r.order},         {"cost_rate", num(r.cost_rate)},
          {"price", num(r.price)},    {"hedge_t0", num(r.hedge_t0)},
          {"bsm_price", num(r.bsm_price)}, {"bsm_delta", num(r.bsm_delta)},
          {"tw_mean", num(r.tw_mean)}, {"tw_median", num(r.tw_median)},
          {"runtime_s", num(r.runtime_s)}, {"config_hash", r.config_hash},
          {"knots", r.knots},         {"error", r.error}};
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.scenario = j.at("scenario").get<std::string>();
  r.cell = j.at("cell").get<int>();
  r.state = j.at("state").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.sigma = num(j.at("sigma"));
  r.n_steps = j.at("n_steps").get<int>();
  r.n_paths = j.at("n_paths").get<int>();
  r.noise = num(j.at("noise"));
  r.strike = num(j.at("strike"));
  r.lambda = num(j.at("lambda"));
  r.n_basis = j.at("n_basis").get<int>();
  r.order = j.at("order").get<int>();
  r.cost_rate = num(j.at("cost_rate"));
  r.price = num(j.at("price"));
  r.hedge_t0 = num(j.at("hedge_t0"));
  r.bsm_price = num(j.at("bsm_price"));
  r.bsm_delta = num(j.at("bsm_delta"));
  r.tw_mean = num(j.at("tw_mean"));
  r.tw_median = num(j.at("tw_median"));
  r.runtime_s = num(j.at("runtime_s"));
  r.config_hash = j.at("config_hash").get<std::string>();
  r.knots = j.at("knots").get<std::string>();
  r.error = j.at("error").get<std::string>();
  return r;
}

void write_csv(const ScenarioResult& result, std::ostream& out) {
  out << "# qlbs scenario report\n";
  out << "# config: " << to_json(result.config).dump() << '\n';
  out << "# failures: " << result.failures << '\n';
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : result.rows) {
    out << csv_text(r.scenario) << ',' << r.cell << ',' << r.state << ',' << r.method << ',' << r.seed << ','
        << fmt6(r.sigma) << ',' << r.n_steps << ',' << r.n_paths << ',' << fmt6(r.noise) << ',' << fmt6(r.strike)
        << ',' << fmt6(r.lambda) << ',' << r.n_basis << ',' << r.order << ',' << fmt6(r.cost_rate) << ','
        << fmt6(r.price) << ',' << fmt6(r.hedge_t0) << ',' << fmt6(r.bsm_price) << ',' << fmt6(r.bsm_delta) << ','
        << fmt6(r.tw_mean) << ',' << fmt6(r.tw_median) << ',' << fmt6(r.runtime_s) << ',' << r.config_hash << ','
        << csv_text(r.knots) << ',' << csv_text(r.error) << '\n';
  }
}

void write_json(const ScenarioResult& result, std::ostream& out) {
  json rows = json::array();
  for (const auto& r : result.rows) rows.push_back(row_json(r));
  json doc{{"config", to_json(result.config)}, {"columns", columns()}, {"failures", result.failures}, {"rows", rows}};
  out << doc.dump(2) << '\n';
}

}  // namespace

bool ResultRow::operator==(const ResultRow& o) const {
  return scenario == o.scenario && cell == o.cell && state == o.state && method == o.method && seed == o.seed &&
         same(sigma, o.sigma) && n_steps == o.n_steps && n_paths == o.n_paths && same(noise, o.noise) &&
         same(strike, o.strike) && same(lambda, o.lambda) && n_basis == o.n_basis && order == o.order &&
         same(cost_rate, o.cost_rate) && same(price, o.price) && same(hedge_t0, o.hedge_t0) &&
         same(bsm_price, o.bsm_price) && same(bsm_delta, o.bsm_delta) && same(tw_mean, o.tw_mean) &&
         same(tw_median, o.tw_median) && same(runtime_s, o.runtime_s) && config_hash == o.config_hash &&
         knots == o.knots && error == o.error;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::CSV;
  if (name == "json") return ReportFormat::JSON;
  throw std::invalid_argument("unknown report format: " + name + " (expected csv or json)");
}

void emit_report(const ScenarioResult& result, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::CSV) {
    write_csv(result, out);
  } else {
    write_json(result, out);
  }
}

void emit_report(const ScenarioResult& result, ReportFormat format, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open report for writing: " + file.string());
  emit_report(result, format, out);
  out.flush();
  if (!out) throw std::runtime_error("error writing report: " + file.string());
}

ScenarioResult load_report_json(std::istream& in) {
  const json doc = json::parse(in);
  ScenarioResult r;
  r.config = config_from_json(doc.at("config"));
  r.failures = doc.value("failures", 0);
  for (const auto& row : doc.at("rows")) r.rows.push_back(row_from_json(row));
  return r;
}

void emit_wealth_csv(const std::vector<TerminalWealthReport>& reports, std::ostream& out) {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << (i ? "," : "") << market::to_string(reports[i].state) << "_c" << fmt6(reports[i].cost_rate) << '_' << i;
    n = std::max(n, reports[i].wealth.size());
  }
  out << '\n';
  out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) out << ',';
      if (k < reports[i].wealth.size()) out << reports[i].wealth(k);
    }
    out << '\n';
  }
}

}  // namespace qlbs::experiments
