#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cdslab/engine.hpp"
#include "cdslab/model.hpp"
#include "cdslab/pathops.hpp"
#include "cdslab/stats.hpp"

namespace cdslab {

struct PriceEstimate {
  double c_hat = 0.0;
  double mean_f1 = 0.0;
  double mean_f2 = 0.0;
  double se_f1 = 0.0;
  double se_f2 = 0.0;
  double cov_f12 = 0.0;  // per-path sample covariance of the two legs
  double se_c = 0.0;     // delta method
  std::int64_t n_paths = 0;
  double h = 0.0;
  int steps = 0;
  std::int64_t faults = 0;
};

struct PricingOptions {
  /// Accept a singular correlation matrix (negative controls only).
  bool allow_degenerate = false;
  /// Treat the counterparty as surviving regardless of its path.
  bool ignore_counterparty_default = false;
};

struct PathLegs {
  double protection = 0.0;  // F1
  double premium = 0.0;     // F2
};

PathLegs path_legs(const PathGrid& path, const ContractSpec& contract, bool ignore_counterparty_default = false);

/// Legs of a single path index, simulated standalone.
PathLegs evaluate_path(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       std::int64_t path_index, const PricingOptions& opts = {});

/// Ratio-of-means swap rate E[F1] / E[F2] over sim.paths Euler paths.
/// Throws DegeneratePremiumLeg or InvalidBatch.
PriceEstimate estimate_swap_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                                 const PricingOptions& opts = {});

/// Extra per-path, per-level scalars collected alongside the legs.
using LevelObserver = std::function<void(std::size_t level, const PathGrid&, const DefaultTimes&, std::span<double>)>;

/// All levels of a common-random-number run over the same Brownian paths.
struct CoupledRun {
  std::vector<int> steps;          // steps per maturity, one per level
  Moments legs;                    // F1, F2 of level 0, then level 1, ...
  std::vector<Moments> observed;   // observer outputs per level
  std::int64_t paths = 0;
  std::int64_t faulted_paths = 0;  // paths excluded because some level faulted
  std::vector<std::int64_t> level_faults;

  std::size_t levels() const { return steps.size(); }
  bool valid() const;
};

/// Simulates every level from the normals of the finest grid: a level with
/// `ratio` times fewer steps uses sums of `ratio` consecutive fine draws over
/// sqrt(ratio). Every steps[l] must divide the largest entry.
CoupledRun run_coupled(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       const std::vector<int>& steps, const PricingOptions& opts = {},
                       const LevelObserver& observer = nullptr, int observed_dim = 0);

PriceEstimate level_estimate(const CoupledRun& run, std::size_t level, const ContractSpec& contract);
/// Delta-method SE of c(level) - c(level + 1) using the coupled samples.
double coupled_difference_se(const CoupledRun& run, std::size_t level);

/// Step counts must be non-decreasing with each entry dividing the finest one.
std::vector<PriceEstimate> coupled_estimates(const MarketModel& model, const ContractSpec& contract,
                                             const SimConfig& sim, const std::vector<int>& steps,
                                             const PricingOptions& opts = {});

/// Premium-leg mean below which a ratio is never reported.
double degenerate_premium_threshold(const ContractSpec& contract);

}  // namespace cdslab
