#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cdslab/engine.hpp"
#include "cdslab/stats.hpp"
#include "fixtures.hpp"

using namespace cdslab;

TEST(EulerStep, ZeroCoefficientsKeepValue) {
  Vector v(1), mu(1), z(1);
  v << 100.0;
  mu << 0.0;
  z << 1.7;
  EXPECT_DOUBLE_EQ(euler_step(v, mu, Matrix::Zero(1, 1), z, 0.01)[0], 100.0);
}

TEST(EulerStep, HandArithmetic) {
  Vector v(1), mu(1), z(1);
  v << 100.0;
  mu << 0.05;
  z << 1.0;
  Matrix s(1, 1);
  s << 0.2;
  EXPECT_NEAR(euler_step(v, mu, s, z, 0.01)[0], 102.05, 1e-12);

  Vector v2(2), z2(2);
  v2 << 50.0, 80.0;
  z2 << -1.0, 2.0;
  Matrix s2 = Vector((Vector(2) << 0.3, 0.4).finished()).asDiagonal();
  Vector out = euler_step(v2, Vector::Zero(2), s2, z2, 0.04);
  EXPECT_NEAR(out[0], 47.0, 1e-12);
  EXPECT_NEAR(out[1], 92.8, 1e-12);
}

TEST(SimulatePath, StartsAtV0AndRunsToHorizon) {
  RunConfig c = fixture::small_config();
  PathGrid p = simulate_path(c.model, c.contract, c.sim, RngSubstream(1, 0));
  EXPECT_EQ(p.grid.n_steps, 48);
  EXPECT_DOUBLE_EQ(p.value(0, 0), 100.0);
  EXPECT_DOUBLE_EQ(p.value(0, 1), 100.0);
  EXPECT_FALSE(p.fault);
}

TEST(SimulatePath, ZeroBarriersNeverDefault) {
  RunConfig c = fixture::small_config(0.4, 0.0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    PathGrid p = simulate_path(c.model, c.contract, c.sim, RngSubstream(2, i));
    EXPECT_FALSE(p.default_index(0).has_value());
    EXPECT_FALSE(p.default_index(1).has_value());
    for (int a : p.alpha_path) EXPECT_EQ(a, 0);
  }
}

TEST(SimulatePath, BreachAtInception) {
  RunConfig c = fixture::small_config(0.4, 100.0);
  PathGrid p = simulate_path(c.model, c.contract, c.sim, RngSubstream(2, 0));
  ASSERT_TRUE(p.default_index(1).has_value());
  EXPECT_EQ(*p.default_index(1), 0);
  EXPECT_EQ(p.alpha_path[0], 1);
}

TEST(SimulatePath, AlphaPathIsNondecreasingCount) {
  RunConfig c = fixture::load_named("benchmark");
  c.sim.steps = 32;
  for (std::uint64_t i = 0; i < 200; ++i) {
    PathGrid p = simulate_path(c.model, c.contract, c.sim, RngSubstream(3, i));
    for (std::size_t n = 1; n < p.alpha_path.size(); ++n) {
      EXPECT_GE(p.alpha_path[n], p.alpha_path[n - 1]);
      EXPECT_LE(p.alpha_path[n], c.model.n_ref);
    }
  }
}

// Replays each stored path step by step, rebuilding sigma only from
// values[0..n]; the replay must reproduce the stored path exactly.
TEST(SimulatePathProperty, Nonanticipative) {
  RunConfig c = fixture::load_named("benchmark");
  c.sim.steps = 32;
  const Matrix factor = chol_factor(c.model.correlation);
  const int d = c.model.dim();
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngSubstream stream(4, i);
    PathGrid p = simulate_path(c.model, c.contract, c.sim, stream);
    std::vector<double> z(static_cast<std::size_t>(d)), mu(static_cast<std::size_t>(d)),
        next(static_cast<std::size_t>(d));
    for (int n = 0; n < p.grid.n_steps; ++n) {
      const int alpha = defaults_observed(p, c.contract.barriers, n);
      ASSERT_EQ(alpha, p.alpha_path[static_cast<std::size_t>(n)]);
      Matrix sigma = instantaneous_sigma(c.model, factor, alpha);
      for (int k = 0; k < d; ++k) mu[static_cast<std::size_t>(k)] = c.model.drift[static_cast<std::size_t>(k)].value(p.grid.time(n));
      stream.normals(static_cast<std::uint64_t>(n), z);
      euler_step(p.row(n), mu, sigma, z, p.grid.h, next);
      for (int k = 0; k < d; ++k) ASSERT_EQ(next[static_cast<std::size_t>(k)], p.value(n + 1, k));
    }
  }
}

namespace {

struct TerminalFold {
  Moments init() const { return Moments(1); }
  void add(Moments& m, const PathGrid& p, std::int64_t) const {
    double x = p.value(p.grid.n_steps, 0);
    m.add(std::span<const double>(&x, 1));
  }
  void merge(Moments& a, const Moments& b) const { a.merge(b); }
};

struct CollectFold {
  std::vector<std::vector<double>> init() const { return {}; }
  void add(std::vector<std::vector<double>>& acc, const PathGrid& p, std::int64_t) const { acc.push_back(p.values); }
  void merge(std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) const {
    a.insert(a.end(), b.begin(), b.end());
  }
};

}  // namespace

TEST(SimulateBatch, SinglePathMatchesSimulatePath) {
  RunConfig c = fixture::small_config();
  c.sim.paths = 1;
  auto r = simulate_batch(c.model, c.contract, c.sim, CollectFold{});
  ASSERT_EQ(r.value.size(), 1u);
  EXPECT_EQ(r.value[0], simulate_path(c.model, c.contract, c.sim, RngSubstream(c.sim.seed, 0)).values);
}

TEST(SimulateBatchProperty, BatchEqualsStandaloneAndIgnoresWorkers) {
  RunConfig c = fixture::load_named("benchmark");
  c.sim.steps = 16;
  c.sim.paths = 300;
  c.sim.chunk_size = 7;
  auto one = simulate_batch(c.model, c.contract, c.sim, CollectFold{});
  for (int w : {4, 16}) {
    c.sim.workers = w;
    auto many = simulate_batch(c.model, c.contract, c.sim, CollectFold{});
    EXPECT_EQ(one.value, many.value) << "workers=" << w;
  }
  for (std::uint64_t i : {0u, 13u, 299u}) {
    EXPECT_EQ(one.value[i], simulate_path(c.model, c.contract, c.sim, RngSubstream(c.sim.seed, i)).values);
  }
}

TEST(SimulateBatch, MomentsBitIdenticalAcrossWorkers) {
  RunConfig c = fixture::small_config();
  c.sim.paths = 5000;
  c.sim.chunk_size = 100;
  auto a = simulate_batch(c.model, c.contract, c.sim, TerminalFold{});
  c.sim.workers = 4;
  auto b = simulate_batch(c.model, c.contract, c.sim, TerminalFold{});
  EXPECT_EQ(a.value.mean(0), b.value.mean(0));
  EXPECT_EQ(a.value.variance(0), b.value.variance(0));
}

TEST(SimulateBatch, DriftMatchesExpectedGrowth) {
  // counterparty is default-free and uncontaminated: E[V_0(n h)] = v0 (1 + r h)^n
  RunConfig c = fixture::small_config();
  c.sim.paths = 40000;
  auto r = simulate_batch(c.model, c.contract, c.sim, TerminalFold{});
  const TimeGrid g = TimeGrid::make(c.contract.maturity, c.sim.steps);
  const double expected = 100.0 * std::pow(1.0 + 0.03 * g.h, g.n_steps);
  const double se = std::sqrt(r.value.variance(0) / 40000.0);
  EXPECT_NEAR(r.value.mean(0), expected, 3.0 * se);
  EXPECT_NEAR(expected, 100.0 * std::exp(0.03 * 3.0), 0.01);
}

TEST(SimulateBatch, CountsFaults) {
  RunConfig c = fixture::small_config();
  c.model.drift[1] = Curve(1e300);
  c.sim.paths = 10;
  auto r = simulate_batch(c.model, c.contract, c.sim, TerminalFold{});
  EXPECT_EQ(r.faults, 10);
  EXPECT_FALSE(r.valid());
  EXPECT_EQ(r.value.count(), 0);
}

TEST(RunChunked, PropagatesWorkerExceptions) {
  auto make = [] { return [](int&, std::int64_t p) { if (p == 5) throw std::runtime_error("boom"); }; };
  auto merge = [](int&, const int&) {};
  EXPECT_THROW(run_chunked(20, 3, 4, 0, make, merge), std::runtime_error);
}

TEST(FineNormals, CoarseIsScaledSum) {
  FineNormals f;
  RngSubstream s(9, 1);
  f.fill(s, 8, 2);
  std::vector<double> fine(2), sum(2, 0.0), out(2);
  for (int n = 4; n < 8; ++n) {
    s.normals(static_cast<std::uint64_t>(n), fine);
    sum[0] += fine[0];
    sum[1] += fine[1];
  }
  f.coarse(4, 1, out);
  EXPECT_NEAR(out[0], sum[0] / 2.0, 1e-15);
  EXPECT_NEAR(out[1], sum[1] / 2.0, 1e-15);
  f.coarse(1, 3, out);
  s.normals(3, fine);
  EXPECT_EQ(out, fine);
  EXPECT_THROW(f.coarse(4, 2, out), std::out_of_range);
}

TEST(PathDump, RoundTrip) {
  RunConfig c = fixture::small_config();
  std::stringstream buf;
  PathGrid a = simulate_path(c.model, c.contract, c.sim, RngSubstream(1, 0));
  PathGrid b = simulate_path(c.model, c.contract, c.sim, RngSubstream(1, 1));
  write_path_dump(buf, a);
  write_path_dump(buf, b);
  EXPECT_EQ(buf.str().size(), 2 * (24 + a.values.size() * 8));
  auto ra = read_path_dump(buf);
  auto rb = read_path_dump(buf);
  ASSERT_TRUE(ra && rb);
  EXPECT_EQ(ra->h, a.grid.h);
  EXPECT_EQ(ra->n_steps, static_cast<std::uint64_t>(a.grid.n_steps));
  EXPECT_EQ(ra->n_ref, 1u);
  EXPECT_EQ(ra->values, a.values);
  EXPECT_EQ(rb->values, b.values);
  EXPECT_FALSE(read_path_dump(buf).has_value());
  std::stringstream full;
  write_path_dump(full, a);
  std::stringstream cut(full.str().substr(0, 40));
  EXPECT_THROW(read_path_dump(cut), std::runtime_error);
}
