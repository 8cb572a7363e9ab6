#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdslab/engine.hpp"
#include "cdslab/model.hpp"
#include "cdslab/pathops.hpp"
#include "cdslab/pricer.hpp"

namespace cdslab {

double normal_cdf(double x);

/// P(first passage of a GBM below the barrier K e^{gamma t} before T), with
/// x0 = ln(v0/K) and nu = mu - sigma^2/2 - gamma:
///   Phi((-x0 - nu T)/(sigma sqrt T)) + exp(-2 nu x0 / sigma^2) Phi((-x0 + nu T)/(sigma sqrt T)).
/// Requires v0 > K > 0, sigma > 0, T > 0.
double fpt_probability(double v0, double K, double gamma, double mu, double sigma, double T);

// ---------------------------------------------------------------------------
// Tangency counterexample: x(t) = |t - 1/2| against the zero barrier.

struct TangencyRow {
  std::int64_t n = 0;  // 0 marks the unshifted path
  double shift = 0.0;
  double hitting_time = 0.0;
};

struct TangencyResult {
  double horizon = 0.0;
  double unshifted_time = 0.0;
  std::int64_t checked = 0;
  std::int64_t failures = 0;
  std::vector<TangencyRow> table;  // unshifted row, then n = 1..9, 10..90, ... and n_max

  bool passed() const { return failures == 0 && unshifted_time == 0.5; }
};

/// Evaluates pi(x + 1/n, 0) for every n in [1, n_max] on a dyadic grid over
/// [0, 2] (maturity 1) that contains t = 1/2, asserting exact values.
TangencyResult tangency_demo(std::int64_t n_max);

// ---------------------------------------------------------------------------
// Path diagnostics

/// Largest Euclidean norm of a one-step increment at grid times in (0, T].
double jump_statistic(const PathGrid& path);
/// max_n |V_n|^4 (Euclidean norm) over grid times up to the horizon.
double sup_norm_fourth(const PathGrid& path);
/// tau_0 and tau_(i) fall on the same grid step, at or before maturity.
bool simultaneous_default(const DefaultTimes& tau, const ContractSpec& contract);
/// tau_0 or tau_(i) coincides with a premium date.
bool premium_date_hit(const DefaultTimes& tau, const ContractSpec& contract);

/// Batch frequency of simultaneous_default at sim.steps.
double simultaneous_default_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                                 const PricingOptions& opts = {});
/// Batch frequency of premium_date_hit at sim.steps.
double premium_date_hit_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                             const PricingOptions& opts = {});

// ---------------------------------------------------------------------------
// Single-name default probability against the closed form

struct DefaultProbabilityLevel {
  int steps = 0;
  double h = 0.0;
  double probability = 0.0;
  double se = 0.0;
};

/// MC estimate of P(tau_name <= T) on each level, coupled by common random numbers.
std::vector<DefaultProbabilityLevel> mc_default_probability(const MarketModel& model, const ContractSpec& contract,
                                                            const SimConfig& sim, int name,
                                                            const std::vector<int>& steps);

struct OracleComparison {
  int name = 0;
  double closed_form = 0.0;
  double mc = 0.0;
  double se = 0.0;
  int steps = 0;
  /// closed_form - mc lies in [-2 se, kOracleTolerance + 2 se]
  bool consistent = false;
};

inline constexpr double kOracleTolerance = 0.015;

/// Whether name i's marginal first-passage law is the single-name closed form.
bool single_name_reducible(const MarketModel& model, const ContractSpec& contract, int name);
std::vector<OracleComparison> oracle_comparison(const MarketModel& model, const ContractSpec& contract,
                                                const SimConfig& sim);

// ---------------------------------------------------------------------------
// Convergence sweep

struct SweepLevel {
  int steps = 0;
  double h = 0.0;
  PriceEstimate estimate;
  std::optional<double> abs_delta;  // |c(h) - c(h/2)|, absent on the finest level
  std::optional<double> delta_se;   // coupled delta-method SE of that difference
  double mean_jump = 0.0;
  double moment4 = 0.0;
  double simultaneous_rate = 0.0;
  double premium_hit_rate = 0.0;
  std::int64_t faults = 0;
};

struct SweepReport {
  std::vector<SweepLevel> levels;  // descending h
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::int64_t paths = 0;

  /// |delta| column strictly decreasing (vacuous with fewer than three levels).
  bool delta_decreasing() const;
};

/// steps: ascending step counts, each dividing the last (typically doubling).
SweepReport run_sweep(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                      const std::vector<int>& steps, const PricingOptions& opts = {});

/// steps, 2 steps, ..., 2^(levels-1) steps.
std::vector<int> halving_levels(int coarsest_steps, int levels);

}  // namespace cdslab
