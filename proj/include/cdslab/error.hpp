#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cdslab {

// Malformed or missing configuration input. `field` is a JSON-pointer-like
// path ("/contract/premium_dates") or empty when the document failed to parse.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  // `minor` is the 1-based order of the first leading minor that fails.
  explicit NotPositiveDefinite(int minor)
      : std::runtime_error("matrix is not positive definite (leading minor " + std::to_string(minor) +
                           ")"),
        minor_(minor) {}
  int minor() const noexcept { return minor_; }

 private:
  int minor_;
};

class DegeneratePremiumLeg : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBatch : public std::runtime_error {
 public:
  InvalidBatch(std::int64_t faults, std::int64_t paths)
      : std::runtime_error("simulation faults " + std::to_string(faults) + " of " +
                           std::to_string(paths) + " paths exceed the 0.1% limit"),
        faults_(faults),
        paths_(paths) {}
  std::int64_t faults() const noexcept { return faults_; }
  std::int64_t paths() const noexcept { return paths_; }

 private:
  std::int64_t faults_;
  std::int64_t paths_;
};

}  // namespace cdslab
