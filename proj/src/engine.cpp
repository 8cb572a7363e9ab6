#include "cdslab/engine.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cdslab {

std::vector<double> PathGrid::column(int i) const {
  std::vector<double> out(static_cast<std::size_t>(grid.n_steps) + 1);
  for (int n = 0; n <= grid.n_steps; ++n) out[static_cast<std::size_t>(n)] = value(n, i);
  return out;
}

void euler_step(std::span<const double> v, std::span<const double> mu, const Matrix& sigma,
                std::span<const double> z, double h, std::span<double> out) {
  const std::size_t d = v.size();
  const double sqrt_h = std::sqrt(h);
  for (std::size_t i = 0; i < d; ++i) {
    double diffusion = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      diffusion += sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
    }
    out[i] = v[i] + v[i] * (mu[i] * h + sqrt_h * diffusion);
  }
}

Vector euler_step(const Vector& v, const Vector& mu, const Matrix& sigma, const Vector& z, double h) {
  if (mu.size() != v.size() || sigma.rows() != v.size() || sigma.cols() != z.size()) {
    throw std::invalid_argument("euler_step: inconsistent dimensions");
  }
  Vector out(v.size());
  euler_step(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
             std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())), sigma,
             std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), h,
             std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

int defaults_observed(const PathGrid& path, const std::vector<Barrier>& barriers, int n) {
  int count = 0;
  const int last = std::min(n, path.grid.last_monitored());
  for (int i = 1; i < path.dim; ++i) {
    const Barrier& b = barriers[static_cast<std::size_t>(i)];
    if (b.default_free()) continue;
    for (int m = 0; m <= last; ++m) {
      if (path.value(m, i) <= b.value(path.grid.time(m))) {
        ++count;
        break;
      }
    }
  }
  return count;
}

PathSimulator::PathSimulator(const MarketModel& model, const ContractSpec& contract, const TimeGrid& grid,
                             bool allow_degenerate)
    : model_(&model),
      contract_(&contract),
      grid_(grid),
      dim_(model.dim()),
      noise_dim_(model.dim() + (contract.discount.mode == DiscountMode::Vasicek ? 1 : 0)),
      last_monitored_(grid.last_monitored()),
      vasicek_(contract.discount.mode == DiscountMode::Vasicek),
      factor_(allow_degenerate ? chol_factor_semidefinite(model.correlation) : chol_factor(model.correlation)) {
  if (static_cast<int>(contract.barriers.size()) != dim_ || static_cast<int>(model.drift.size()) != dim_) {
    throw std::invalid_argument("PathSimulator: barrier and drift counts must match the model dimension");
  }
  barrier_table_.resize(static_cast<std::size_t>(last_monitored_ + 1) * dim_);
  for (int n = 0; n <= last_monitored_; ++n) {
    for (int i = 0; i < dim_; ++i) {
      barrier_table_[static_cast<std::size_t>(n * dim_ + i)] =
          contract.barriers[static_cast<std::size_t>(i)].value(grid_.time(n));
    }
  }
  drift_table_.resize(static_cast<std::size_t>(grid_.n_steps) * dim_);
  for (int n = 0; n < grid_.n_steps; ++n) {
    for (int i = 0; i < dim_; ++i) {
      drift_table_[static_cast<std::size_t>(n * dim_ + i)] = model.drift[static_cast<std::size_t>(i)].value(grid_.time(n));
    }
  }
}

void PathSimulator::reset(PathGrid& out) const {
  out.grid = grid_;
  out.dim = dim_;
  out.values.resize(static_cast<std::size_t>(grid_.n_steps + 1) * dim_);
  for (int i = 0; i < dim_; ++i) out.values[static_cast<std::size_t>(i)] = model_->v0[i];
  out.default_step.assign(static_cast<std::size_t>(dim_), -1);
  out.alpha_path.assign(static_cast<std::size_t>(grid_.n_steps) + 1, 0);
  if (vasicek_) {
    out.rate_path.assign(static_cast<std::size_t>(grid_.n_steps) + 1, 0.0);
    out.rate_path[0] = contract_->discount.vasicek.r0;
  } else {
    out.rate_path.clear();
  }
  out.fault = false;
  out.fault_step = -1;
}

bool PathSimulator::detect(PathGrid& out, int n, int& alpha) const {
  if (n > last_monitored_) return false;
  bool any = false;
  const double* v = out.values.data() + static_cast<std::size_t>(n) * dim_;
  const double* barrier = barrier_table_.data() + static_cast<std::size_t>(n) * dim_;
  for (int i = 0; i < dim_; ++i) {
    int& step = out.default_step[static_cast<std::size_t>(i)];
    if (step >= 0 || contract_->barriers[static_cast<std::size_t>(i)].default_free()) continue;
    if (v[i] <= barrier[i]) {
      step = n;
      any = true;
      if (i >= 1) ++alpha;
    }
  }
  return any;
}

PathGrid simulate_path(const MarketModel& model, const ContractSpec& contract, const SimConfig& sim,
                       const RngSubstream& stream, bool allow_degenerate) {
  PathSimulator simulator(model, contract, TimeGrid::make(contract.maturity, sim.steps), allow_degenerate);
  PathGrid out;
  simulator.run(stream, out);
  return out;
}

void FineNormals::fill(const RngSubstream& stream, int fine_steps, int noise_dim) {
  noise_dim_ = noise_dim;
  fine_steps_ = fine_steps;
  z_.resize(static_cast<std::size_t>(fine_steps) * noise_dim);
  for (int n = 0; n < fine_steps; ++n) {
    stream.normals(static_cast<std::uint64_t>(n),
                   std::span<double>(z_.data() + static_cast<std::size_t>(n) * noise_dim, static_cast<std::size_t>(noise_dim)));
  }
}

void FineNormals::coarse(int ratio, int n, std::span<double> out) const {
  if ((n + 1) * ratio > fine_steps_) throw std::out_of_range("FineNormals: step beyond the filled range");
  const double scale = std::sqrt(static_cast<double>(ratio));
  const double* base = z_.data() + static_cast<std::size_t>(n) * ratio * noise_dim_;
  for (int j = 0; j < noise_dim_; ++j) {
    double sum = 0.0;
    for (int q = 0; q < ratio; ++q) sum += base[q * noise_dim_ + j];
    out[static_cast<std::size_t>(j)] = sum / scale;
  }
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

template <class T>
bool get_le(std::istream& is, T& value) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) return false;
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  std::memcpy(&value, &bits, 8);
  return true;
}

}  // namespace

void write_path_dump(std::ostream& os, const PathGrid& path) {
  put_le(os, path.grid.h);
  put_le(os, static_cast<std::uint64_t>(path.grid.n_steps));
  put_le(os, static_cast<std::uint64_t>(path.dim - 1));
  for (double v : path.values) put_le(os, v);
}

std::optional<DumpedPath> read_path_dump(std::istream& is) {
  DumpedPath p;
  if (!get_le(is, p.h)) {
    if (is.gcount() == 0) return std::nullopt;
    throw std::runtime_error("path dump: truncated header");
  }
  if (!get_le(is, p.n_steps) || !get_le(is, p.n_ref)) throw std::runtime_error("path dump: truncated header");
  const std::uint64_t count = (p.n_steps + 1) * (p.n_ref + 1);
  p.values.resize(count);
  for (auto& v : p.values) {
    if (!get_le(is, v)) throw std::runtime_error("path dump: truncated values");
  }
  return p;
}

}  // namespace cdslab
