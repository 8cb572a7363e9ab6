#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "cdslab/stats.hpp"

using namespace cdslab;

namespace {

std::vector<std::array<double, 2>> sample_pairs(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> z;
  std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
  for (auto& p : out) {
    double a = z(gen), b = z(gen);
    p = {2.0 + 0.5 * a, 4.0 + 0.3 * a + 0.4 * b};
  }
  return out;
}

}  // namespace

TEST(Moments, MatchesTwoPass) {
  std::mt19937_64 gen(1);
  auto xs = sample_pairs(gen, 1000);
  Moments m(2);
  for (auto& x : xs) m.add(x);
  double mean[2] = {0, 0};
  for (auto& x : xs) {
    mean[0] += x[0];
    mean[1] += x[1];
  }
  mean[0] /= 1000;
  mean[1] /= 1000;
  double c[2][2] = {{0, 0}, {0, 0}};
  for (auto& x : xs)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
  EXPECT_EQ(m.count(), 1000);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(m.mean(i), mean[i], 1e-13);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(m.covariance(i, j), c[i][j] / 999, 1e-12);
  }
}

TEST(Moments, MergeEqualsSequential) {
  std::mt19937_64 gen(2);
  auto xs = sample_pairs(gen, 777);
  Moments all(2), a(2), b(2), empty(2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.add(xs[i]);
    (i < 300 ? a : b).add(xs[i]);
  }
  a.merge(b);
  a.merge(empty);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR(a.mean(1), all.mean(1), 1e-13);
  EXPECT_NEAR(a.covariance(0, 1), all.covariance(0, 1), 1e-12);
  Moments into(2);
  into.merge(all);
  EXPECT_EQ(into.mean(0), all.mean(0));
}

TEST(Moments, DegenerateCounts) {
  Moments m(1);
  EXPECT_EQ(m.variance(0), 0.0);
  double x = 3.0;
  m.add(std::span<const double>(&x, 1));
  EXPECT_EQ(m.variance(0), 0.0);
  EXPECT_EQ(m.mean(0), 3.0);
  EXPECT_THROW(m.add(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

// The delta-method SE must match the spread of the ratio over independent replications.
TEST(RatioStandardError, MatchesReplicationSpread) {
  std::mt19937_64 gen(3);
  const int reps = 400, n = 2000;
  std::vector<double> ratios;
  double se_sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    Moments m(2);
    for (auto& x : sample_pairs(gen, n)) m.add(x);
    ratios.push_back(m.mean(0) / m.mean(1));
    se_sum += ratio_standard_error(m.mean(0), m.mean(1), m.variance(0), m.variance(1), m.covariance(0, 1), n);
  }
  double mean = 0.0, var = 0.0;
  for (double q : ratios) mean += q / reps;
  for (double q : ratios) var += (q - mean) * (q - mean) / (reps - 1);
  EXPECT_NEAR(se_sum / reps, std::sqrt(var), 0.1 * std::sqrt(var));
}

TEST(RatioStandardError, ZeroVarianceNumerator) {
  EXPECT_EQ(ratio_standard_error(0.0, 2.0, 0.0, 1.0, 0.0, 100), 0.0);
  EXPECT_EQ(ratio_standard_error(1.0, 0.0, 1.0, 1.0, 0.0, 100), 0.0);
}

TEST(RatioDifferenceStandardError, IdenticalRatiosHaveZeroSpread) {
  std::mt19937_64 gen(4);
  Moments m(4);
  for (auto& x : sample_pairs(gen, 500)) m.add(std::vector<double>{x[0], x[1], x[0], x[1]});
  EXPECT_NEAR(ratio_difference_standard_error(m, 0, 1, 2, 3), 0.0, 1e-12);
}

TEST(RatioDifferenceStandardError, MatchesReplicationSpread) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  const int reps = 300, n = 2000;
  std::vector<double> diffs;
  double se_sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    Moments m(4);
    for (int i = 0; i < n; ++i) {
      double a = z(gen), b = z(gen), e = z(gen);
      double num_a = 1.0 + 0.4 * a, den_a = 3.0 + 0.3 * b;
      m.add(std::vector<double>{num_a, den_a, num_a + 0.1 * e, den_a + 0.05 * a});
    }
    diffs.push_back(m.mean(0) / m.mean(1) - m.mean(2) / m.mean(3));
    se_sum += ratio_difference_standard_error(m, 0, 1, 2, 3);
  }
  double mean = 0.0, var = 0.0;
  for (double q : diffs) mean += q / reps;
  for (double q : diffs) var += (q - mean) * (q - mean) / (reps - 1);
  EXPECT_NEAR(se_sum / reps, std::sqrt(var), 0.12 * std::sqrt(var));
}
