#pragma once

#include <span>
#include <vector>

#include "cdslab/engine.hpp"
#include "cdslab/model.hpp"

namespace cdslab {

/// Default times of every firm (censored at the horizon) and the sorted
/// default times of the reference names.
struct DefaultTimes {
  std::vector<double> tau;          // size k + 1, index 0 the counterparty
  std::vector<double> tau_ordered;  // size k, ascending
  double horizon = 0.0;

  static DefaultTimes from(std::vector<double> tau, double horizon);
  int n_ref() const { return static_cast<int>(tau.size()) - 1; }
  /// Time of the j-th reference default (1-based).
  double ordered(int j) const { return tau_ordered.at(static_cast<std::size_t>(j - 1)); }
};

/// First grid time with value <= barrier value, or the horizon if none.
/// `barrier_values` holds the barrier at each grid point.
double hitting_time(std::span<const double> values, std::span<const double> barrier_values, const TimeGrid& grid);
/// Same for an exponential barrier; a zero barrier level is never hit.
double hitting_time(std::span<const double> values, const Barrier& barrier, const TimeGrid& grid);

DefaultTimes default_times(const PathGrid& path);

/// j-th smallest element (1-based), ties kept. Throws std::out_of_range.
double order_statistic(std::span<const double> values, int j);

/// Number of reference names with tau_i <= t; the counterparty is excluded.
int default_count(const DefaultTimes& tau, double t);

/// Discounting for one path. For vasicek discounting `rate_path` and `h` come
/// from the simulated path; other modes ignore them.
struct DiscountContext {
  const DiscountRule* rule = nullptr;
  std::span<const double> rate_path;
  double h = 0.0;

  static DiscountContext deterministic(const DiscountRule& rule) { return {&rule, {}, 0.0}; }
  static DiscountContext for_path(const DiscountRule& rule, const PathGrid& path) {
    return {&rule, path.rate_path, path.grid.h};
  }
};

double discount_factor(const DiscountContext& ctx, double t);

/// Protection leg: D(tau_(i)) (1 - delta_i) 1(tau_(i) <= T) 1(tau_0 > tau_(i) ^ T).
double protection_value(const DefaultTimes& tau, const ContractSpec& contract, const DiscountContext& ctx);
/// Premium leg: sum_j D(t_j) dt_j 1(tau_(i) > t_j) 1(tau_0 > t_j).
double premium_value(const DefaultTimes& tau, const ContractSpec& contract, const DiscountContext& ctx);

}  // namespace cdslab
