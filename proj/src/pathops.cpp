#include "cdslab/pathops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdslab {

DefaultTimes DefaultTimes::from(std::vector<double> tau, double horizon) {
  DefaultTimes out;
  out.tau = std::move(tau);
  out.horizon = horizon;
  out.tau_ordered.assign(out.tau.begin() + 1, out.tau.end());
  std::sort(out.tau_ordered.begin(), out.tau_ordered.end());
  return out;
}

double hitting_time(std::span<const double> values, std::span<const double> barrier_values, const TimeGrid& grid) {
  const std::size_t last = std::min<std::size_t>({values.size(), barrier_values.size(),
                                                  static_cast<std::size_t>(grid.last_monitored()) + 1});
  for (std::size_t n = 0; n < last; ++n) {
    if (values[n] <= barrier_values[n]) return grid.time(static_cast<int>(n));
  }
  return grid.horizon;
}

double hitting_time(std::span<const double> values, const Barrier& barrier, const TimeGrid& grid) {
  if (barrier.default_free()) return grid.horizon;
  const std::size_t last = std::min<std::size_t>(values.size(), static_cast<std::size_t>(grid.last_monitored()) + 1);
  for (std::size_t n = 0; n < last; ++n) {
    if (values[n] <= barrier.value(grid.time(static_cast<int>(n)))) return grid.time(static_cast<int>(n));
  }
  return grid.horizon;
}

DefaultTimes default_times(const PathGrid& path) {
  std::vector<double> tau(static_cast<std::size_t>(path.dim));
  for (int i = 0; i < path.dim; ++i) {
    int s = path.default_step[static_cast<std::size_t>(i)];
    tau[static_cast<std::size_t>(i)] = s < 0 ? path.grid.horizon : path.grid.time(s);
  }
  return DefaultTimes::from(std::move(tau), path.grid.horizon);
}

double order_statistic(std::span<const double> values, int j) {
  if (j < 1 || static_cast<std::size_t>(j) > values.size()) {
    throw std::out_of_range("order_statistic: rank " + std::to_string(j) + " outside [1, " +
                            std::to_string(values.size()) + "]");
  }
  std::vector<double> copy(values.begin(), values.end());
  auto nth = copy.begin() + (j - 1);
  std::nth_element(copy.begin(), nth, copy.end());
  return *nth;
}

int default_count(const DefaultTimes& tau, double t) {
  int count = 0;
  for (std::size_t i = 1; i < tau.tau.size(); ++i) {
    // a time equal to the horizon is a censoring marker, not a default
    if (tau.tau[i] <= t && tau.tau[i] < tau.horizon) ++count;
  }
  return count;
}

double discount_factor(const DiscountContext& ctx, double t) {
  const DiscountRule& rule = *ctx.rule;
  switch (rule.mode) {
    case DiscountMode::Constant:
      return std::exp(-rule.rate * t);
    case DiscountMode::Curve:
      return std::exp(-rule.curve.integral(t));
    case DiscountMode::Vasicek: {
      // exact integral of the piecewise-constant interpolation of the rate path
      const auto& r = ctx.rate_path;
      if (r.empty()) throw std::logic_error("discount_factor: vasicek mode needs a simulated rate path");
      const double h = ctx.h;
      const std::size_t last = r.size() - 1;
      std::size_t full = static_cast<std::size_t>(std::floor(t / h));
      double integral = 0.0;
      std::size_t cells = std::min(full, last);
      for (std::size_t n = 0; n < cells; ++n) integral += r[n] * h;
      double rest = t - static_cast<double>(cells) * h;
      if (rest > 0.0) integral += r[cells] * rest;
      return std::exp(-integral);
    }
  }
  return 1.0;
}

double protection_value(const DefaultTimes& tau, const ContractSpec& contract, const DiscountContext& ctx) {
  const double t_i = tau.ordered(contract.seniority);
  const double T = contract.maturity;
  const double lgd = 1.0 - contract.recovery_rate();
  if (!(t_i <= T) || lgd == 0.0) return 0.0;
  if (!(tau.tau[0] > std::min(t_i, T))) return 0.0;
  return discount_factor(ctx, t_i) * lgd;
}

double premium_value(const DefaultTimes& tau, const ContractSpec& contract, const DiscountContext& ctx) {
  const double t_i = tau.ordered(contract.seniority);
  const double t_0 = tau.tau[0];
  double total = 0.0;
  double prev = 0.0;
  for (double t_j : contract.premium_dates) {
    const double dt = t_j - prev;
    prev = t_j;
    if (t_i > t_j && t_0 > t_j) total += discount_factor(ctx, t_j) * dt;
  }
  return total;
}

}  // namespace cdslab
