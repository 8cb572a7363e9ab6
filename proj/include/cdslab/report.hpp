#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdslab/model.hpp"
#include "cdslab/pricer.hpp"
#include "cdslab/validation.hpp"

namespace cdslab {

// CSV column orders are part of the output contract; see README.md.
inline constexpr const char* kPriceCsvHeader = "c_hat,mean_f1,mean_f2,se_f1,se_f2,cov_f12,se_c,n_paths,h,steps,faults";
inline constexpr const char* kSweepCsvHeader =
    "level,steps,h,c_hat,se_c,abs_delta,delta_se,mean_jump,moment4,simultaneous_rate,premium_hit_rate,faults,"
    "n_paths";
inline constexpr const char* kTangencyCsvHeader = "n,shift,hitting_time,expected";

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

nlohmann::json to_json(const PriceEstimate& e);
std::string price_csv_row(const PriceEstimate& e);

nlohmann::json to_json(const SweepReport& r);
void write_sweep_csv(std::ostream& os, const SweepReport& r);

void write_tangency_csv(std::ostream& os, const TangencyResult& t);

nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const OracleComparison& c);

}  // namespace cdslab
