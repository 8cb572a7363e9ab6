#include "cdslab/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "cdslab/error.hpp"

namespace cdslab {

PathLegs path_legs(const PathGrid& path, const ContractSpec& contract, bool ignore_counterparty_default) {
  DefaultTimes tau = default_times(path);
  if (ignore_counterparty_default) tau.tau[0] = tau.horizon;
  const auto ctx = DiscountContext::for_path(contract.discount, path);
  return {protection_value(tau, contract, ctx), premium_value(tau, contract, ctx)};
}

PathLegs evaluate_path(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       std::int64_t path_index, const PricingOptions& opts) {
  PathGrid path = simulate_path(model, contract, sim, RngSubstream(sim.seed, static_cast<std::uint64_t>(path_index)),
                                opts.allow_degenerate);
  if (path.fault) throw std::runtime_error("evaluate_path: path " + std::to_string(path_index) + " faulted");
  return path_legs(path, contract, opts.ignore_counterparty_default);
}

double degenerate_premium_threshold(const ContractSpec& contract) {
  double annuity = 0.0;
  for (double dt : contract.delta_t()) annuity += dt;
  return 1e-12 * annuity;
}

namespace {

PriceEstimate make_estimate(const Moments& m, int i1, int i2, std::int64_t faults, const TimeGrid& grid,
                            const ContractSpec& contract) {
  PriceEstimate e;
  e.n_paths = m.count();
  e.faults = faults;
  e.h = grid.h;
  e.steps = grid.steps_per_maturity;
  e.mean_f1 = m.mean(i1);
  e.mean_f2 = m.mean(i2);
  if (!(e.mean_f2 >= degenerate_premium_threshold(contract))) {
    throw DegeneratePremiumLeg("premium leg mean " + std::to_string(e.mean_f2) +
                               " is below the degeneracy threshold; survival to the first premium date is "
                               "essentially impossible");
  }
  const double n = static_cast<double>(std::max<std::int64_t>(1, e.n_paths));
  e.se_f1 = std::sqrt(m.variance(i1) / n);
  e.se_f2 = std::sqrt(m.variance(i2) / n);
  e.cov_f12 = m.covariance(i1, i2);
  e.c_hat = e.mean_f1 / e.mean_f2;
  e.se_c = ratio_standard_error(e.mean_f1, e.mean_f2, m.variance(i1), m.variance(i2), e.cov_f12, e.n_paths);
  return e;
}

struct LegFold {
  const ContractSpec* contract;
  bool ignore_counterparty;

  Moments init() const { return Moments(2); }
  void add(Moments& m, const PathGrid& path, std::int64_t) const {
    PathLegs legs = path_legs(path, *contract, ignore_counterparty);
    const double x[2] = {legs.protection, legs.premium};
    m.add(x);
  }
  void merge(Moments& into, const Moments& from) const { into.merge(from); }
};

}  // namespace

PriceEstimate estimate_swap_rate(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                                 const PricingOptions& opts) {
  LegFold fold{&contract, opts.ignore_counterparty_default};
  auto batch = simulate_batch(model, contract, sim, fold, opts.allow_degenerate);
  if (!batch.valid()) throw InvalidBatch(batch.faults, batch.paths);
  return make_estimate(batch.value, 0, 1, batch.faults, TimeGrid::make(contract.maturity, sim.steps), contract);
}

bool CoupledRun::valid() const {
  return static_cast<double>(faulted_paths) <= kMaxFaultRate * static_cast<double>(paths);
}

CoupledRun run_coupled(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       const std::vector<int>& steps, const PricingOptions& opts, const LevelObserver& observer,
                       int observed_dim) {
  if (steps.empty()) throw std::invalid_argument("run_coupled: at least one level is required");
  const int finest = *std::max_element(steps.begin(), steps.end());
  std::vector<int> ratio;
  std::vector<std::unique_ptr<PathSimulator>> sims;
  int fine_needed = 0;
  for (int s : steps) {
    if (s < 1 || finest % s != 0) {
      throw std::invalid_argument("run_coupled: every level's step count must divide the finest (" +
                                  std::to_string(finest) + ")");
    }
    ratio.push_back(finest / s);
    sims.push_back(std::make_unique<PathSimulator>(model, contract, TimeGrid::make(contract.maturity, s),
                                                   opts.allow_degenerate));
    fine_needed = std::max(fine_needed, sims.back()->grid().n_steps * ratio.back());
  }
  const std::size_t L = steps.size();
  const int noise_dim = sims.front()->noise_dim();

  struct Partial {
    Moments legs;
    std::vector<Moments> observed;
    std::int64_t paths = 0;
    std::int64_t faulted = 0;
    std::vector<std::int64_t> level_faults;
  };
  Partial init{Moments(static_cast<int>(2 * L)),
               std::vector<Moments>(L, Moments(std::max(observed_dim, 0))),
               0,
               0,
               std::vector<std::int64_t>(L, 0)};

  auto make_worker = [&]() {
    struct State {
      FineNormals fine;
      std::vector<PathGrid> paths;
      std::vector<double> legs;
      std::vector<double> extra;
    };
    auto state = std::make_shared<State>();
    state->paths.resize(L);
    state->legs.resize(2 * L);
    state->extra.resize(L * static_cast<std::size_t>(std::max(observed_dim, 0)));
    return [&, state](Partial& part, std::int64_t p) {
      State& st = *state;
      st.fine.fill(RngSubstream(sim.seed, static_cast<std::uint64_t>(p)), fine_needed, noise_dim);
      ++part.paths;
      bool faulted = false;
      for (std::size_t l = 0; l < L; ++l) {
        const int r = ratio[l];
        sims[l]->run([&](int n, std::span<double> z) { st.fine.coarse(r, n, z); }, st.paths[l]);
        if (st.paths[l].fault) {
          ++part.level_faults[l];
          faulted = true;
        }
      }
      if (faulted) {
        ++part.faulted;
        return;
      }
      for (std::size_t l = 0; l < L; ++l) {
        const PathGrid& path = st.paths[l];
        DefaultTimes tau = default_times(path);
        if (opts.ignore_counterparty_default) tau.tau[0] = tau.horizon;
        const auto ctx = DiscountContext::for_path(contract.discount, path);
        st.legs[2 * l] = protection_value(tau, contract, ctx);
        st.legs[2 * l + 1] = premium_value(tau, contract, ctx);
        if (observer && observed_dim > 0) {
          std::span<double> out(st.extra.data() + l * static_cast<std::size_t>(observed_dim),
                                static_cast<std::size_t>(observed_dim));
          observer(l, path, tau, out);
          part.observed[l].add(out);
        }
      }
      part.legs.add(st.legs);
    };
  };
  auto merge = [](Partial& into, const Partial& from) {
    into.legs.merge(from.legs);
    for (std::size_t l = 0; l < into.observed.size(); ++l) into.observed[l].merge(from.observed[l]);
    into.paths += from.paths;
    into.faulted += from.faulted;
    for (std::size_t l = 0; l < into.level_faults.size(); ++l) into.level_faults[l] += from.level_faults[l];
  };
  Partial total = run_chunked(sim.paths, sim.chunk_size, sim.workers, init, make_worker, merge);

  CoupledRun run;
  run.steps = steps;
  run.legs = std::move(total.legs);
  run.observed = std::move(total.observed);
  run.paths = total.paths;
  run.faulted_paths = total.faulted;
  run.level_faults = std::move(total.level_faults);
  return run;
}

PriceEstimate level_estimate(const CoupledRun& run, std::size_t level, const ContractSpec& contract) {
  const int i = static_cast<int>(2 * level);
  return make_estimate(run.legs, i, i + 1, run.level_faults.at(level),
                       TimeGrid::make(contract.maturity, run.steps.at(level)), contract);
}

double coupled_difference_se(const CoupledRun& run, std::size_t level) {
  const int a = static_cast<int>(2 * level);
  return ratio_difference_standard_error(run.legs, a, a + 1, a + 2, a + 3);
}

std::vector<PriceEstimate> coupled_estimates(const MarketModel& model, const ContractSpec& contract,
                                             const SimConfig& sim, const std::vector<int>& steps,
                                             const PricingOptions& opts) {
  for (std::size_t l = 1; l < steps.size(); ++l) {
    if (steps[l] < steps[l - 1]) throw std::invalid_argument("coupled_estimates: step counts must not decrease");
  }
  CoupledRun run = run_coupled(model, contract, sim, steps, opts);
  if (!run.valid()) throw InvalidBatch(run.faulted_paths, run.paths);
  std::vector<PriceEstimate> out;
  for (std::size_t l = 0; l < run.levels(); ++l) out.push_back(level_estimate(run, l, contract));
  return out;
}

}  // namespace cdslab
