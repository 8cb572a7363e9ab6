#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cdslab {

/// Streaming mean and co-moment matrix of a fixed-length sample vector.
/// Partials merge with Chan's pairwise update, so chunked accumulation
/// merged in a fixed order is reproducible.
class Moments {
 public:
  Moments() = default;
  explicit Moments(int dim);

  void add(std::span<const double> x);
  void merge(const Moments& other);

  int dim() const { return dim_; }
  std::int64_t count() const { return n_; }
  double mean(int i) const { return mean_[static_cast<std::size_t>(i)]; }
  /// Unbiased sample covariance; 0 with fewer than two samples.
  double covariance(int i, int j) const;
  double variance(int i) const { return covariance(i, i); }

 private:
  int dim_ = 0;
  std::int64_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
  std::vector<double> scratch_;
};

/// Delta-method standard error of mean1 / mean2 from per-sample moments.
double ratio_standard_error(double mean1, double mean2, double var1, double var2, double cov12, std::int64_t n);

/// Delta-method standard error of (ratio a) - (ratio b) when both ratios are
/// estimated on the same samples. `moments` indexes: num_a, den_a, num_b, den_b.
double ratio_difference_standard_error(const Moments& moments, int num_a, int den_a, int num_b, int den_b);

}  // namespace cdslab
