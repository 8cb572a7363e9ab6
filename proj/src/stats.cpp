#include "cdslab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace cdslab {

Moments::Moments(int dim)
    : dim_(dim),
      mean_(static_cast<std::size_t>(dim), 0.0),
      comoment_(static_cast<std::size_t>(dim) * dim, 0.0),
      scratch_(static_cast<std::size_t>(dim), 0.0) {}

void Moments::add(std::span<const double> x) {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("Moments::add: dimension mismatch");
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (int i = 0; i < dim_; ++i) {
    scratch_[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - mean_[static_cast<std::size_t>(i)];
    mean_[static_cast<std::size_t>(i)] += scratch_[static_cast<std::size_t>(i)] * inv_n;
  }
  for (int i = 0; i < dim_; ++i) {
    const double after = x[static_cast<std::size_t>(i)] - mean_[static_cast<std::size_t>(i)];
    double* row = comoment_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j < dim_; ++j) row[j] += after * scratch_[static_cast<std::size_t>(j)];
  }
}

void Moments::merge(const Moments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  if (other.dim_ != dim_) throw std::invalid_argument("Moments::merge: dimension mismatch");
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  for (int i = 0; i < dim_; ++i) {
    scratch_[static_cast<std::size_t>(i)] = other.mean_[static_cast<std::size_t>(i)] - mean_[static_cast<std::size_t>(i)];
  }
  const double w = na * nb / n;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      std::size_t ij = static_cast<std::size_t>(i) * dim_ + j;
      comoment_[ij] += other.comoment_[ij] + scratch_[static_cast<std::size_t>(i)] * scratch_[static_cast<std::size_t>(j)] * w;
    }
  }
  for (int i = 0; i < dim_; ++i) mean_[static_cast<std::size_t>(i)] += scratch_[static_cast<std::size_t>(i)] * nb / n;
  n_ += other.n_;
}

double Moments::covariance(int i, int j) const {
  if (n_ < 2) return 0.0;
  return comoment_[static_cast<std::size_t>(i) * dim_ + j] / static_cast<double>(n_ - 1);
}

double ratio_standard_error(double m1, double m2, double v1, double v2, double c12, std::int64_t n) {
  if (n < 2 || m2 == 0.0) return 0.0;
  double var = v1 / (m2 * m2) - 2.0 * m1 * c12 / (m2 * m2 * m2) + m1 * m1 * v2 / (m2 * m2 * m2 * m2);
  return std::sqrt(std::max(0.0, var) / static_cast<double>(n));
}

double ratio_difference_standard_error(const Moments& m, int num_a, int den_a, int num_b, int den_b) {
  if (m.count() < 2) return 0.0;
  const int idx[4] = {num_a, den_a, num_b, den_b};
  const double ma = m.mean(den_a);
  const double mb = m.mean(den_b);
  if (ma == 0.0 || mb == 0.0) return 0.0;
  const double grad[4] = {1.0 / ma, -m.mean(num_a) / (ma * ma), -1.0 / mb, m.mean(num_b) / (mb * mb)};
  double var = 0.0;
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) var += grad[p] * grad[q] * m.covariance(idx[p], idx[q]);
  }
  return std::sqrt(std::max(0.0, var) / static_cast<double>(m.count()));
}

}  // namespace cdslab
