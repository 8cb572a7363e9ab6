#include "cdslab/validation.hpp"

#include <cmath>
#include <stdexcept>

#include "cdslab/config.hpp"
#include "cdslab/error.hpp"

namespace cdslab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double fpt_probability(double v0, double K, double gamma, double mu, double sigma, double T) {
  if (!(K > 0.0) || !(v0 > K)) throw std::invalid_argument("fpt_probability: requires v0 > K > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("fpt_probability: requires sigma > 0");
  if (!(T > 0.0)) throw std::invalid_argument("fpt_probability: requires T > 0");
  const double x0 = std::log(v0 / K);
  const double nu = mu - 0.5 * sigma * sigma - gamma;
  const double s = sigma * std::sqrt(T);
  const double first = normal_cdf((-x0 - nu * T) / s);
  const double tail = normal_cdf((-x0 + nu * T) / s);
  double second = 0.0;
  if (tail > 0.0) second = std::exp(-2.0 * nu * x0 / (sigma * sigma) + std::log(tail));
  return std::clamp(first + second, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

TangencyResult tangency_demo(std::int64_t n_max) {
  if (n_max < 1) throw std::invalid_argument("tangency_demo: n_max must be >= 1");
  // maturity 1, h = 1/16: every grid value |n/16 - 1/2| is exact in binary
  const TimeGrid grid = TimeGrid::make(1.0, 16);
  const int points = grid.last_monitored() + 1;
  std::vector<double> x(static_cast<std::size_t>(points));
  for (int n = 0; n < points; ++n) x[static_cast<std::size_t>(n)] = std::abs(grid.time(n) - 0.5);
  const std::vector<double> zero(static_cast<std::size_t>(points), 0.0);

  TangencyResult result;
  result.horizon = grid.horizon;
  result.unshifted_time = hitting_time(x, zero, grid);
  result.table.push_back({0, 0.0, result.unshifted_time});

  std::vector<double> shifted(x.size());
  std::int64_t next_row = 1;
  std::int64_t decade = 1;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double shift = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + shift;
    const double t = hitting_time(shifted, zero, grid);
    ++result.checked;
    if (t != grid.horizon) ++result.failures;
    if (n == next_row || n == n_max) {
      result.table.push_back({n, shift, t});
      if (n == next_row) {
        if (n == 10 * decade) decade *= 10;
        next_row = n + decade;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

double jump_statistic(const PathGrid& path) {
  const TimeGrid& g = path.grid;
  double best = 0.0;
  for (int n = 0; n < g.n_steps && g.time(n + 1) <= g.maturity * (1.0 + 1e-12); ++n) {
    double sq = 0.0;
    for (int i = 0; i < path.dim; ++i) {
      double dv = path.value(n + 1, i) - path.value(n, i);
      sq += dv * dv;
    }
    best = std::max(best, sq);
  }
  return std::sqrt(best);
}

double sup_norm_fourth(const PathGrid& path) {
  double best = 0.0;
  const int last = path.grid.last_monitored();
  for (int n = 0; n <= last; ++n) {
    double sq = 0.0;
    for (int i = 0; i < path.dim; ++i) sq += path.value(n, i) * path.value(n, i);
    best = std::max(best, sq);
  }
  return best * best;
}

bool simultaneous_default(const DefaultTimes& tau, const ContractSpec& contract) {
  const double t_i = tau.ordered(contract.seniority);
  return tau.tau[0] == t_i && t_i <= contract.maturity;
}

bool premium_date_hit(const DefaultTimes& tau, const ContractSpec& contract) {
  auto on_date = [&](double t) {
    if (t >= tau.horizon) return false;
    for (double d : contract.premium_dates) {
      if (std::abs(t - d) <= 1e-12 * std::max(1.0, d)) return true;
    }
    return false;
  };
  return on_date(tau.tau[0]) || on_date(tau.ordered(contract.seniority));
}

namespace {

template <class Indicator>
double indicator_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                      const PricingOptions& opts, Indicator indicator) {
  struct Fold {
    const ContractSpec* contract;
    Indicator* indicator;
    std::int64_t init() const { return 0; }
    void add(std::int64_t& hits, const PathGrid& path, std::int64_t) const {
      if ((*indicator)(default_times(path), *contract)) ++hits;
    }
    void merge(std::int64_t& into, const std::int64_t& from) const { into += from; }
  };
  Fold fold{&contract, &indicator};
  auto batch = simulate_batch(model, contract, sim, fold, opts.allow_degenerate);
  const std::int64_t good = batch.paths - batch.faults;
  return good > 0 ? static_cast<double>(batch.value) / static_cast<double>(good) : 0.0;
}

}  // namespace

double simultaneous_default_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                                 const PricingOptions& opts) {
  return indicator_rate(model, contract, sim, opts, simultaneous_default);
}

double premium_date_hit_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                             const PricingOptions& opts) {
  return indicator_rate(model, contract, sim, opts, premium_date_hit);
}

// ---------------------------------------------------------------------------

std::vector<DefaultProbabilityLevel> mc_default_probability(const MarketModel& model, const ContractSpec& contract,
                                                            const SimConfig& sim, int name,
                                                            const std::vector<int>& steps) {
  if (name < 0 || name > model.n_ref) throw std::out_of_range("mc_default_probability: name index out of range");
  const double T = contract.maturity;
  LevelObserver observer = [name, T](std::size_t, const PathGrid&, const DefaultTimes& tau, std::span<double> out) {
    out[0] = tau.tau[static_cast<std::size_t>(name)] <= T ? 1.0 : 0.0;
  };
  CoupledRun run = run_coupled(model, contract, sim, steps, {}, observer, 1);
  std::vector<DefaultProbabilityLevel> out;
  for (std::size_t l = 0; l < run.levels(); ++l) {
    const Moments& m = run.observed[l];
    DefaultProbabilityLevel level;
    level.steps = run.steps[l];
    level.h = T / run.steps[l];
    level.probability = m.mean(0);
    level.se = std::sqrt(m.variance(0) / static_cast<double>(std::max<std::int64_t>(1, m.count())));
    out.push_back(level);
  }
  return out;
}

bool single_name_reducible(const MarketModel& model, const ContractSpec& contract, int name) {
  if (name < 1 || name > model.n_ref) return false;
  const auto i = static_cast<std::size_t>(name);
  const Barrier& b = contract.barriers[i];
  if (!(b.level > 0.0) || !(model.v0[name] > b.level)) return false;
  if (!model.drift[i].is_constant()) return false;
  // contagion raises this name's volatility whenever another name defaults first
  if (model.contagion.mode == ContagionMode::LinearInDefaults && model.contagion.jump_coeff[name] != 0.0)
    return false;
  return model.base_vol[name] > 0.0;
}

std::vector<OracleComparison> oracle_comparison(const MarketModel& model, const ContractSpec& contract,
                                                const SimConfig& sim) {
  std::vector<OracleComparison> out;
  for (int i = 1; i <= model.n_ref; ++i) {
    if (!single_name_reducible(model, contract, i)) continue;
    const auto& b = contract.barriers[static_cast<std::size_t>(i)];
    OracleComparison c;
    c.name = i;
    c.steps = sim.steps;
    c.closed_form = fpt_probability(model.v0[i], b.level, b.growth, model.drift[static_cast<std::size_t>(i)].value(0.0),
                                    model.base_vol[i], contract.maturity);
    auto level = mc_default_probability(model, contract, sim, i, {sim.steps}).front();
    c.mc = level.probability;
    c.se = level.se;
    const double gap = c.closed_form - c.mc;
    c.consistent = gap >= -2.0 * c.se && gap <= kOracleTolerance + 2.0 * c.se;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------

bool SweepReport::delta_decreasing() const {
  double prev = INFINITY;
  for (const auto& level : levels) {
    if (!level.abs_delta) continue;
    if (!(*level.abs_delta < prev)) return false;
    prev = *level.abs_delta;
  }
  return true;
}

std::vector<int> halving_levels(int coarsest_steps, int levels) {
  if (coarsest_steps < 1 || levels < 1) throw std::invalid_argument("halving_levels: need positive arguments");
  std::vector<int> out;
  int s = coarsest_steps;
  for (int l = 0; l < levels; ++l) {
    out.push_back(s);
    if (l + 1 < levels) {
      if (s > (1 << 29)) throw std::overflow_error("halving_levels: too many levels");
      s *= 2;
    }
  }
  return out;
}

SweepReport run_sweep(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                      const std::vector<int>& steps, const PricingOptions& opts) {
  for (std::size_t l = 1; l < steps.size(); ++l) {
    if (steps[l] < steps[l - 1]) throw std::invalid_argument("run_sweep: step counts must not decrease");
  }
  LevelObserver observer = [&contract](std::size_t, const PathGrid& path, const DefaultTimes& tau,
                                       std::span<double> out) {
    out[0] = jump_statistic(path);
    out[1] = sup_norm_fourth(path);
    out[2] = simultaneous_default(tau, contract) ? 1.0 : 0.0;
    out[3] = premium_date_hit(tau, contract) ? 1.0 : 0.0;
  };
  CoupledRun run = run_coupled(model, contract, sim, steps, opts, observer, 4);
  if (!run.valid()) throw InvalidBatch(run.faulted_paths, run.paths);

  SweepReport rep;
  rep.fingerprint = fingerprint(model, contract);
  rep.seed = sim.seed;
  rep.paths = sim.paths;
  for (std::size_t l = 0; l < run.levels(); ++l) {
    SweepLevel level;
    level.steps = run.steps[l];
    level.h = contract.maturity / run.steps[l];
    level.estimate = level_estimate(run, l, contract);
    const Moments& m = run.observed[l];
    level.mean_jump = m.mean(0);
    level.moment4 = m.mean(1);
    level.simultaneous_rate = m.mean(2);
    level.premium_hit_rate = m.mean(3);
    level.faults = run.level_faults[l];
    rep.levels.push_back(level);
  }
  for (std::size_t l = 0; l + 1 < rep.levels.size(); ++l) {
    rep.levels[l].abs_delta = std::abs(rep.levels[l].estimate.c_hat - rep.levels[l + 1].estimate.c_hat);
    rep.levels[l].delta_se = coupled_difference_se(run, l);
  }
  return rep;
}

}  // namespace cdslab
