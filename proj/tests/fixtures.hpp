#pragma once

#include <string>

#include "cdslab/config.hpp"

namespace cdslab::fixture {

inline RunConfig load_named(const std::string& name) {
  return load_config(std::string(CDSLAB_CONFIG_DIR) + "/" + name + ".json");
}

inline std::string config_path(const std::string& name) {
  return std::string(CDSLAB_CONFIG_DIR) + "/" + name + ".json";
}

// Two names, default-free counterparty, annual premiums over T = 2.
inline RunConfig small_config(double recovery = 0.4, double reference_barrier = 80.0) {
  std::string text = R"({
    "model": {"v0": [100, 100], "drift": 0.03, "base_vol": [0.2, 0.3],
              "correlation": [[1, 0], [0, 1]]},
    "contract": {"maturity": 2, "premium_dates": [1, 2], "recovery": )" +
                     std::to_string(recovery) + R"(, "seniority": 1,
                 "barriers": [{"level": 0}, {"level": )" +
                     std::to_string(reference_barrier) + R"(}],
                 "discount": {"mode": "constant", "r": 0.03}},
    "sim": {"steps": 32, "paths": 4000, "seed": 5, "chunk_size": 256}
  })";
  return parse_config(text);
}

}  // namespace cdslab::fixture
