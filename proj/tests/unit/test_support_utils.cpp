#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "gibbsmix/parallel.hpp"
#include "gibbsmix/rng.hpp"
#include "gibbsmix/stats.hpp"
#include "test_support.hpp"

using namespace gibbsmix;

TEST(RandomStream, DeterministicPerKey) {
  RandomStream a(7, 3);
  RandomStream b(7, 3);
  RandomStream c(7, 4);
  RandomStream d(8, 3);
  bool differs_c = false;
  bool differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs_c |= x != c.uniform();
    differs_d |= x != d.uniform();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
}

TEST(RandomStream, UniformIsOpenInterval) {
  RandomStream r(1, 0);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(RandomStream, NormalMoments) {
  RandomStream r(2, 0);
  std::vector<double> xs(200000);
  for (double& x : xs) x = r.normal(0.3);
  const auto m = stats::moments(xs);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * 0.3 / std::sqrt(xs.size()));
  EXPECT_NEAR(std::sqrt(m.variance), 0.3, 0.003);
}

TEST(Parallel, EveryChunkOnceAtAnyThreadCount) {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    set_max_threads(threads);
    std::vector<std::atomic<int>> hits(257);
    parallel_chunks(hits.size(), [&](std::size_t c) { hits[c]++; });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
  set_max_threads(0);
  EXPECT_GE(max_threads(), 1u);
}

TEST(Parallel, PropagatesExceptions) {
  set_max_threads(4);
  EXPECT_THROW(parallel_chunks(16,
                               [](std::size_t c) {
                                 if (c == 5) throw std::runtime_error("boom");
                               }),
               std::runtime_error);
  set_max_threads(0);
}

TEST(Parallel, ChunkCount) {
  EXPECT_EQ(chunk_count(0, 16), 0u);
  EXPECT_EQ(chunk_count(16, 16), 1u);
  EXPECT_EQ(chunk_count(17, 16), 2u);
}

TEST(CompensatedSum, RecoversLostDigits) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000000; ++i) s += 1e-16;
  EXPECT_NEAR(s.value(), 1.0 + 1e-10, 1e-22);
}

TEST(Stats, MomentsOfKnownSample) {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const auto m = stats::moments(xs);
  EXPECT_EQ(m.count, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.standard_error(), std::sqrt(5.0 / 3.0 / 4.0));
}

TEST(Stats, KolmogorovSmirnov) {
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1, 2}, {3, 4}), 1.0);
  testing_support::Gen gen(5);
  std::vector<double> xs(5000);
  for (double& x : xs) x = gen.uniform(0.0, 1.0);
  const double d = stats::ks_one_sample(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(d, stats::ks_critical_one_sample(0.01, xs.size()));
  EXPECT_NEAR(stats::ks_critical_two_sample(0.05, 100, 100), 1.358 * std::sqrt(0.02), 1e-12);
  EXPECT_THROW(stats::ks_critical_one_sample(0.2, 10), std::invalid_argument);
}

TEST(Stats, Quantile) {
  EXPECT_DOUBLE_EQ(stats::quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(stats::quantile({0.0, 10.0}, 0.25), 2.5);
}
