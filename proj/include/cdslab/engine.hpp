#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "cdslab/model.hpp"
#include "cdslab/rng.hpp"

namespace cdslab {

/// One Euler path of all firms on the grid, plus the default bookkeeping
/// the path functionals need.
struct PathGrid {
  TimeGrid grid;
  int dim = 0;
  std::vector<double> values;     // (n_steps + 1) x dim, row-major
  std::vector<int> default_step;  // per name, -1 when no breach up to the horizon
  std::vector<int> alpha_path;    // reference-name default count at each grid index
  std::vector<double> rate_path;  // simulated short rate, empty unless vasicek discounting
  bool fault = false;
  int fault_step = -1;            // first index that came out non-finite

  double value(int n, int i) const { return values[static_cast<std::size_t>(n * dim + i)]; }
  std::span<const double> row(int n) const {
    return {values.data() + static_cast<std::size_t>(n) * dim, static_cast<std::size_t>(dim)};
  }
  /// Values of one firm along the whole grid.
  std::vector<double> column(int i) const;
  std::optional<int> default_index(int i) const {
    int s = default_step[static_cast<std::size_t>(i)];
    return s < 0 ? std::nullopt : std::optional<int>(s);
  }
};

/// v_{n+1} = v_n + diag(v_n) (mu h + sigma sqrt(h) z). No positivity clamp.
void euler_step(std::span<const double> v, std::span<const double> mu, const Matrix& sigma,
                std::span<const double> z, double h, std::span<double> out);
Vector euler_step(const Vector& v, const Vector& mu, const Matrix& sigma, const Vector& z, double h);

/// Default count after scanning values[0..n] of a stored path; recomputed from
/// scratch so it can audit what the simulator used at step n.
int defaults_observed(const PathGrid& path, const std::vector<Barrier>& barriers, int n);

/// Model and contract prepared for simulation on one grid: Cholesky factor,
/// barrier and drift tables. Immutable and shareable across threads.
class PathSimulator {
 public:
  PathSimulator(const MarketModel& model, const ContractSpec& contract, const TimeGrid& grid,
                bool allow_degenerate = false);

  const TimeGrid& grid() const { return grid_; }
  const Matrix& factor() const { return factor_; }
  const MarketModel& model() const { return *model_; }
  const ContractSpec& contract() const { return *contract_; }
  int dim() const { return dim_; }
  /// Dimension of each normal draw: firms plus the short rate when simulated.
  int noise_dim() const { return noise_dim_; }

  /// `normals(n, span)` must fill the innovations of step n -> n+1.
  template <class Normals>
    requires std::invocable<Normals&, int, std::span<double>>
  void run(Normals&& normals, PathGrid& out) const;

  void run(const RngSubstream& stream, PathGrid& out) const {
    run([&](int n, std::span<double> z) { stream.normals(static_cast<std::uint64_t>(n), z); }, out);
  }

 private:
  void reset(PathGrid& out) const;
  bool detect(PathGrid& out, int n, int& alpha) const;

  const MarketModel* model_;
  const ContractSpec* contract_;
  TimeGrid grid_;
  int dim_;
  int noise_dim_;
  int last_monitored_;
  bool vasicek_;
  Matrix factor_;
  std::vector<double> barrier_table_;  // (last_monitored + 1) x dim
  std::vector<double> drift_table_;    // n_steps x dim
};

PathGrid simulate_path(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       const RngSubstream& stream, bool allow_degenerate = false);

/// Fine-grid normals of one path, aggregated on demand into the innovations
/// of a grid `ratio` times coarser (sum of `ratio` consecutive draws / sqrt(ratio)).
class FineNormals {
 public:
  void fill(const RngSubstream& stream, int fine_steps, int noise_dim);
  void coarse(int ratio, int n, std::span<double> out) const;

 private:
  int noise_dim_ = 0;
  int fine_steps_ = 0;
  std::vector<double> z_;
};

// ---------------------------------------------------------------------------
// Deterministic chunked parallel reduction

/// Evaluates paths [0, n_paths) in fixed chunks. `make_worker()` is called once
/// per thread and returns `f(Partial&, std::int64_t path)`. Chunk partials are
/// merged in ascending chunk order, so the result does not depend on `workers`.
template <class Partial, class MakeWorker, class Merge>
Partial run_chunked(std::int64_t n_paths, int chunk_size, int workers, const Partial& init,
                    MakeWorker make_worker, Merge merge) {
  const std::int64_t chunk = std::max(1, chunk_size);
  const std::int64_t n_chunks = (n_paths + chunk - 1) / chunk;
  std::vector<Partial> partials(static_cast<std::size_t>(n_chunks), init);
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, workers)));

  auto body = [&](std::size_t worker_id) {
    try {
      auto work = make_worker();
      for (std::int64_t c = next++; c < n_chunks; c = next++) {
        Partial& part = partials[static_cast<std::size_t>(c)];
        const std::int64_t end = std::min(n_paths, (c + 1) * chunk);
        for (std::int64_t p = c * chunk; p < end; ++p) work(part, p);
      }
    } catch (...) {
      errors[worker_id] = std::current_exception();
      next = n_chunks;
    }
  };

  const int n_threads = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(1, n_chunks)));
  if (n_threads == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(body, static_cast<std::size_t>(t));
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Partial result = init;
  for (const auto& part : partials) merge(result, part);
  return result;
}

/// Fault rate above which a batch is flagged invalid.
inline constexpr double kMaxFaultRate = 1e-3;

template <class Partial>
struct BatchResult {
  Partial value;
  std::int64_t paths = 0;
  std::int64_t faults = 0;
  bool valid() const { return static_cast<double>(faults) <= kMaxFaultRate * static_cast<double>(paths); }
};

/// A fold supplies `Partial init()`, `add(Partial&, const PathGrid&, path)` and
/// `merge(Partial&, const Partial&)`. Faulted paths are counted, not folded.
template <class Fold>
auto simulate_batch(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                    const Fold& fold, bool allow_degenerate = false) {
  using Partial = decltype(fold.init());
  struct Acc {
    Partial value;
    std::int64_t paths = 0;
    std::int64_t faults = 0;
  };
  const PathSimulator simulator(model, contract, TimeGrid::make(contract.maturity, sim.steps), allow_degenerate);
  Acc init{fold.init(), 0, 0};
  auto make_worker = [&]() {
    return [&, path = PathGrid{}](Acc& acc, std::int64_t p) mutable {
      simulator.run(RngSubstream(sim.seed, static_cast<std::uint64_t>(p)), path);
      ++acc.paths;
      if (path.fault) {
        ++acc.faults;
        return;
      }
      fold.add(acc.value, path, p);
    };
  };
  auto merge = [&](Acc& into, const Acc& from) {
    fold.merge(into.value, from.value);
    into.paths += from.paths;
    into.faults += from.faults;
  };
  Acc acc = run_chunked(sim.paths, sim.chunk_size, sim.workers, init, make_worker, merge);
  return BatchResult<Partial>{std::move(acc.value), acc.paths, acc.faults};
}

// ---------------------------------------------------------------------------
// Binary path dump: little-endian f64 h, u64 n_steps, u64 n_ref, then
// (n_steps + 1) * (n_ref + 1) f64 firm values, row-major.

void write_path_dump(std::ostream& os, const PathGrid& path);

struct DumpedPath {
  double h = 0.0;
  std::uint64_t n_steps = 0;
  std::uint64_t n_ref = 0;
  std::vector<double> values;
};

/// Returns nullopt at a clean end of stream; throws on a truncated record.
std::optional<DumpedPath> read_path_dump(std::istream& is);

// ---------------------------------------------------------------------------

template <class Normals>
  requires std::invocable<Normals&, int, std::span<double>>
void PathSimulator::run(Normals&& normals, PathGrid& out) const {
  reset(out);
  const int d = dim_;
  const double h = grid_.h;
  const double sqrt_h = std::sqrt(h);
  Matrix sigma(d, d);
  double z_buf[64];
  std::vector<double> z_heap;
  std::span<double> z;
  if (noise_dim_ <= 64) {
    z = std::span<double>(z_buf, static_cast<std::size_t>(noise_dim_));
  } else {
    z_heap.resize(static_cast<std::size_t>(noise_dim_));
    z = z_heap;
  }
  const VasicekParams& vp = contract_->discount.vasicek;
  int alpha = 0;
  int sigma_alpha = -1;
  for (int n = 0; n < grid_.n_steps; ++n) {
    detect(out, n, alpha);
    out.alpha_path[static_cast<std::size_t>(n)] = alpha;
    if (alpha != sigma_alpha) {
      instantaneous_sigma(*model_, factor_, alpha, sigma);
      sigma_alpha = alpha;
    }
    normals(n, z);
    const std::size_t base = static_cast<std::size_t>(n) * d;
    std::span<const double> v(out.values.data() + base, static_cast<std::size_t>(d));
    std::span<double> next(out.values.data() + base + d, static_cast<std::size_t>(d));
    euler_step(v, std::span<const double>(drift_table_.data() + base, static_cast<std::size_t>(d)), sigma,
               z.first(static_cast<std::size_t>(d)), h, next);
    bool finite = std::all_of(next.begin(), next.end(), [](double x) { return std::isfinite(x); });
    if (vasicek_) {
      double r = out.rate_path[static_cast<std::size_t>(n)];
      double r_next = r + vp.speed * (vp.long_run - r) * h + vp.vol * sqrt_h * z[static_cast<std::size_t>(d)];
      out.rate_path[static_cast<std::size_t>(n) + 1] = r_next;
      finite = finite && std::isfinite(r_next);
    }
    if (!finite) {
      out.fault = true;
      out.fault_step = n + 1;
      return;
    }
  }
  detect(out, grid_.n_steps, alpha);
  out.alpha_path[static_cast<std::size_t>(grid_.n_steps)] = alpha;
}

}  // namespace cdslab
