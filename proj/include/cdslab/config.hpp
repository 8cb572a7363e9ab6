#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "cdslab/model.hpp"

namespace cdslab {

/// Model, contract and simulation settings ingested from one JSON document.
/// The schema is described in README.md.
struct RunConfig {
  MarketModel model;
  ContractSpec contract;
  SimConfig sim;
};

/// Throws ConfigError naming the offending field (or the parse position).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

std::string read_file(const std::string& path);

/// FNV-1a 64-bit hex digest of the canonical model + contract JSON.
std::string fingerprint(const MarketModel& model, const ContractSpec& contract);

}  // namespace cdslab
