#include "cdslab/report.hpp"

#include <charconv>
#include <ostream>

namespace cdslab {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json to_json(const PriceEstimate& e) {
  return json{{"c_hat", e.c_hat},     {"mean_f1", e.mean_f1}, {"mean_f2", e.mean_f2}, {"se_f1", e.se_f1},
              {"se_f2", e.se_f2},     {"cov_f12", e.cov_f12}, {"se_c", e.se_c},       {"n_paths", e.n_paths},
              {"h", e.h},             {"steps", e.steps},     {"faults", e.faults}};
}

std::string price_csv_row(const PriceEstimate& e) {
  std::string row;
  for (double v : {e.c_hat, e.mean_f1, e.mean_f2, e.se_f1, e.se_f2, e.cov_f12, e.se_c}) {
    row += format_double(v);
    row += ',';
  }
  row += std::to_string(e.n_paths) + ',' + format_double(e.h) + ',' + std::to_string(e.steps) + ',' +
         std::to_string(e.faults);
  return row;
}

json to_json(const SweepReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    json j{{"steps", l.steps},
           {"h", l.h},
           {"estimate", to_json(l.estimate)},
           {"abs_delta", l.abs_delta ? json(*l.abs_delta) : json(nullptr)},
           {"delta_se", l.delta_se ? json(*l.delta_se) : json(nullptr)},
           {"mean_jump", l.mean_jump},
           {"moment4", l.moment4},
           {"simultaneous_rate", l.simultaneous_rate},
           {"premium_hit_rate", l.premium_hit_rate},
           {"faults", l.faults}};
    levels.push_back(j);
  }
  return json{{"fingerprint", r.fingerprint},
              {"seed", r.seed},
              {"paths", r.paths},
              {"delta_decreasing", r.delta_decreasing()},
              {"levels", levels}};
}

void write_sweep_csv(std::ostream& os, const SweepReport& r) {
  os << kSweepCsvHeader << '\n';
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const auto& l = r.levels[i];
    os << i << ',' << l.steps << ',' << format_double(l.h) << ',' << format_double(l.estimate.c_hat) << ','
       << format_double(l.estimate.se_c) << ',' << (l.abs_delta ? format_double(*l.abs_delta) : "") << ','
       << (l.delta_se ? format_double(*l.delta_se) : "") << ',' << format_double(l.mean_jump) << ','
       << format_double(l.moment4) << ',' << format_double(l.simultaneous_rate) << ','
       << format_double(l.premium_hit_rate) << ',' << l.faults << ',' << l.estimate.n_paths << '\n';
  }
}

void write_tangency_csv(std::ostream& os, const TangencyResult& t) {
  os << kTangencyCsvHeader << '\n';
  for (const auto& row : t.table) {
    const double expected = row.n == 0 ? 0.5 : t.horizon;
    os << row.n << ',' << format_double(row.shift) << ',' << format_double(row.hitting_time) << ','
       << format_double(expected) << '\n';
  }
}

json to_json(const ValidationReport& r) {
  return json{{"ok", r.ok()},
              {"convergence_applies", r.convergence_applies()},
              {"assumptions",
               {{"A1_bounds", to_string(r.bounds)},
                {"A2_nondegenerate", to_string(r.nondegenerate)},
                {"A3_continuity", to_string(r.continuity)},
                {"A4_zero_correlation", to_string(r.zero_correlation)},
                {"A5_piecewise_constant", to_string(r.piecewise_constant)}}},
              {"min_eigenvalue", r.min_eigenvalue},
              {"lambda", r.lambda},
              {"counterparty_default_free", r.counterparty_default_free},
              {"errors", r.errors}};
}

json to_json(const OracleComparison& c) {
  return json{{"name", c.name}, {"closed_form", c.closed_form}, {"mc", c.mc},
              {"se", c.se},     {"steps", c.steps},             {"consistent", c.consistent}};
}

}  // namespace cdslab
