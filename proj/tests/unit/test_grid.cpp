#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gibbsmix/grid.hpp"
#include "gibbsmix/parallel.hpp"
#include "test_support.hpp"

using namespace gibbsmix;
using testing_support::Gen;

namespace {

// Cell mass oracle: direct 2-D quadrature of exp(-a^2 (u-v)^2) over a cell.
double cell_integral(std::size_t i, std::size_t j, std::size_t n, double a) {
  const double h = 1.0 / static_cast<double>(n);
  return testing_support::quad(
      [&](double u) {
        // Inner integral in closed form through erf.
        const double lo = a * (j * h - u);
        const double hi = a * ((j + 1) * h - u);
        return std::sqrt(M_PI) / (2.0 * a) * (std::erf(hi) - std::erf(lo));
      },
      i * h, (i + 1) * h);
}

GridDistribution random_distribution(std::size_t n, Gen& gen) {
  std::vector<double> w(n * n);
  for (double& x : w) x = gen.uniform(0.0, 1.0);
  auto g = GridDistribution::from_weights(n, 2, std::move(w));
  g.renormalize();
  return g;
}

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
  std::vector<std::uint16_t> pixels;
};

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  Pgm img;
  in >> magic >> img.width >> img.height >> img.maxval;
  in.get();
  EXPECT_EQ(magic, "P5");
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(raw.size(), 2 * img.width * img.height);
  for (std::size_t k = 0; k + 1 < raw.size(); k += 2) {
    img.pixels.push_back(static_cast<std::uint16_t>(raw[k] << 8 | raw[k + 1]));
  }
  return img;
}

}  // namespace

TEST(GridDistribution, FactoriesAndCells) {
  EXPECT_EQ(GridDistribution::cell_of(0.0, 10), 0u);
  EXPECT_EQ(GridDistribution::cell_of(0.25, 4), 1u);
  EXPECT_EQ(GridDistribution::cell_of(1.0, 10), 9u);
  EXPECT_THROW(GridDistribution::cell_of(1.1, 10), std::invalid_argument);
  const auto u = GridDistribution::uniform(8, 2);
  EXPECT_NEAR(u.total(), 1.0, 1e-15);
  const auto pm = GridDistribution::point_mass(8, {1.0, 0.0});
  EXPECT_EQ(pm(7, 0), 1.0);
  EXPECT_THROW(GridDistribution::from_weights(3, 2, {1.0}), std::invalid_argument);
  EXPECT_THROW(GridDistribution::from_weights(2, 1, {1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(GridDistribution::zeros(4, 3), std::invalid_argument);
}

TEST(DiscretizedTarget, CellsMatchQuadrature) {
  for (double a : {0.5, 3.0, 10.0, 40.0}) {
    const std::size_t n = 20;
    const DiagonalTarget t(n, ModelParams(a));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) total += cell_integral(i, j, n, a);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = cell_integral(k, 0, n, a) / total;
      ASSERT_NEAR(t.joint(k, 0), expected, 1e-13 + 1e-10 * expected) << "a=" << a << " k=" << k;
    }
  }
}

TEST(DiscretizedTarget, UniformLimit) {
  const auto t = build_discretized_target(50, ModelParams(1e-8));
  for (double w : t.weights()) ASSERT_NEAR(w, 1.0 / 2500.0, 1e-10);
}

TEST(DiscretizedTarget, SymmetriesAreExact) {
  const std::size_t n = 37;
  const auto t = build_discretized_target(n, ModelParams(6.0));
  EXPECT_NEAR(t.total(), 1.0, 1e-14);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_EQ(t(i, j), t(j, i));
      ASSERT_EQ(t(i, j), t(n - 1 - i, n - 1 - j));
    }
  }
}

TEST(DiscretizedTarget, CornerSetAtLeastOneEighth) {
  const auto t = build_discretized_target(500, ModelParams(10.0));
  const auto s = corner_set();
  EXPECT_GE(set_probability(t, s), 0.125);
}

TEST(DiscretizedTarget, MarginalIsColumnSum) {
  const DiagonalTarget t(30, ModelParams(4.0));
  const auto v = t.joint_distribution().v_marginal();
  for (std::size_t j = 0; j < 30; ++j) EXPECT_NEAR(v[j], t.marginal()[j], 1e-16);
  EXPECT_THROW(DiagonalTarget(1, ModelParams(1.0)), std::invalid_argument);
}

TEST(Evolve2D, TargetIsFixedPoint) {
  for (double a : {1.0, 10.0, 50.0}) {
    for (std::size_t n : {100u, 500u}) {
      const RandomScanOperator op(n, ModelParams(a));
      const auto target = op.target().joint_distribution();
      EXPECT_LT(tv_distance(op.apply(target), target), 1e-12) << "a=" << a << " n=" << n;
    }
  }
}

TEST(Evolve2D, OneStepFromCornerMovesOneCoordinate) {
  const std::size_t n = 60;
  const auto next = evolve_2d(GridDistribution::point_mass(n, {0.0, 0.0}), 1, ModelParams(10.0));
  double cross = 0.0;
  for (std::size_t k = 0; k < n; ++k) cross += next(0, k) + next(k, 0);
  cross -= next(0, 0);
  EXPECT_NEAR(cross, 1.0, 1e-14);
}

TEST(Evolve2D, MatchesDenseReferenceOperator) {
  // Dense O(n^3) application of the two conditional updates.
  const std::size_t n = 24;
  const ModelParams p(8.0);
  const DiagonalTarget t(n, p);
  Gen gen(3);
  const auto in = random_distribution(n, gen);
  std::vector<double> expected(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        // u-update: (k, j) -> (i, j) with prob J(i, j) / m(j).
        expected[i * n + j] += 0.5 * in(k, j) * t.joint(i, j) / t.marginal()[j];
        // v-update: (i, k) -> (i, j) with prob J(i, j) / m(i).
        expected[i * n + j] += 0.5 * in(i, k) * t.joint(i, j) / t.marginal()[i];
      }
    }
  }
  const auto out = RandomScanOperator(n, p).apply(in);
  for (std::size_t k = 0; k < n * n; ++k) ASSERT_NEAR(out[k], expected[k], 1e-15);
}

TEST(Evolve2DProperty, MassConservedAndTvMonotone) {
  Gen gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 20 + gen.index(60);
    const ModelParams p(gen.log_uniform(0.5, 40.0));
    const RandomScanOperator op(n, p);
    const auto in = random_distribution(n, gen);
    double prev = tv_distance(in, op.target().joint_distribution());
    std::size_t seen = 0;
    const auto out = op.evolve(in, 30, [&](const StepStats& s) {
      ++seen;
      EXPECT_LT(std::abs(s.mass_before_renormalization - 1.0), 1e-15);
      EXPECT_LE(s.tv_to_target, prev + 1e-10);
      prev = s.tv_to_target;
    });
    EXPECT_EQ(seen, 30u);
    EXPECT_NEAR(out.total(), 1.0, 1e-12);
    for (double w : out.weights()) ASSERT_GE(w, 0.0);
  }
}

TEST(Evolve2D, BitStableAcrossThreadCounts) {
  const ModelParams p(10.0);
  const auto start = GridDistribution::point_mass(120, {0.1, 0.2});
  set_max_threads(1);
  const auto one = evolve_2d(start, 20, p);
  set_max_threads(3);
  const auto three = evolve_2d(start, 20, p);
  set_max_threads(0);
  for (std::size_t k = 0; k < one.size(); ++k) ASSERT_EQ(one[k], three[k]);
}

TEST(Evolve2D, RejectsShapeMismatch) {
  const RandomScanOperator op(10, ModelParams(1.0));
  EXPECT_THROW(op.apply(GridDistribution::uniform(11, 2)), std::invalid_argument);
  EXPECT_THROW(op.apply(GridDistribution::uniform(10, 1)), std::invalid_argument);
}

TEST(TvDistance, Examples) {
  const auto p = GridDistribution::uniform(5, 2);
  EXPECT_EQ(tv_distance(p, p), 0.0);
  EXPECT_EQ(tv_distance(GridDistribution::point_mass(5, {0, 0}),
                        GridDistribution::point_mass(5, {1, 1})),
            1.0);
  auto a = GridDistribution::zeros(7, 1);
  auto b = GridDistribution::zeros(7, 1);
  a.weights()[2] = a.weights()[3] = 0.5;
  b.weights()[3] = b.weights()[4] = 0.5;
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 0.5);
  EXPECT_THROW(tv_distance(a, GridDistribution::zeros(8, 1)), std::invalid_argument);
  EXPECT_THROW(tv_distance(a, GridDistribution::zeros(7, 2)), std::invalid_argument);
}

TEST(MixingTime, AtTenNearSeventyOne) {
  const auto r = find_mixing_time({0.0, 0.0}, 0.25, ModelParams(10.0), 500, 1000);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.t_mix, 64u);
  EXPECT_LE(r.t_mix, 78u);
  ASSERT_EQ(r.tv_curve.size(), r.t_mix + 1);
  EXPECT_LE(r.tv_curve.back().second, 0.25);
  EXPECT_GT(r.tv_curve[r.t_mix - 1].second, 0.25);
  for (std::size_t k = 2; k < r.tv_curve.size(); ++k) {
    ASSERT_LE(r.tv_curve[k].second, r.tv_curve[k - 1].second + 1e-10);
  }
}

TEST(MixingTime, StableUnderGridRefinement) {
  const ModelParams p(10.0);
  const auto coarse = find_mixing_time({0.0, 0.0}, 0.25, p, 500, 1000);
  const auto fine = find_mixing_time({0.0, 0.0}, 0.25, p, 1000, 1000);
  const double rel = std::abs(static_cast<double>(fine.t_mix) - static_cast<double>(coarse.t_mix)) /
                     static_cast<double>(coarse.t_mix);
  EXPECT_LT(rel, 0.03) << coarse.t_mix << " vs " << fine.t_mix;
}

TEST(MixingTime, NonConvergenceCarriesCurve) {
  try {
    find_mixing_time({0.0, 0.0}, 0.25, ModelParams(10.0), 100, 5);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_FALSE(e.partial().converged);
    EXPECT_EQ(e.partial().tv_curve.size(), 6u);
  }
  EXPECT_THROW(find_mixing_time({0, 0}, 1.0, ModelParams(1.0), 10, 5), std::invalid_argument);
}

TEST(SetProbability, Examples) {
  const std::vector<Box> full = {{0.0, 1.0, 0.0, 1.0}};
  EXPECT_NEAR(set_probability(GridDistribution::uniform(13, 2), full), 1.0, 1e-14);
  EXPECT_EQ(set_probability(GridDistribution::uniform(500, 2), corner_set()), 0.125);
  // n not divisible by 4: partial cells split by area.
  EXPECT_NEAR(set_probability(GridDistribution::uniform(7, 2), corner_set()), 0.125, 1e-15);
  const std::vector<Box> overlapping = {{0.0, 0.5, 0.0, 0.5}, {0.25, 1.0, 0.25, 1.0}};
  EXPECT_THROW(set_probability(GridDistribution::uniform(4, 2), overlapping),
               std::invalid_argument);
  const std::vector<Box> outside = {{0.0, 1.5, 0.0, 1.0}};
  EXPECT_THROW(set_probability(GridDistribution::uniform(4, 2), outside), std::invalid_argument);
}

TEST(SetProbability, CornerMassGrowsWithConcentration) {
  double prev = 0.0;
  for (double a : {0.01, 1.0, 5.0, 10.0, 50.0, 250.0}) {
    const double ps = set_probability(build_discretized_target(500, ModelParams(a)), corner_set());
    EXPECT_GE(ps, 0.125) << "a=" << a;
    EXPECT_GE(ps, prev);
    prev = ps;
  }
}

TEST(SetProbability, CentreStartStaysOutOfCorners) {
  const ModelParams p(50.0);
  const auto law = evolve_2d(GridDistribution::point_mass(500, {0.5, 0.5}), 125, p);
  EXPECT_LT(set_probability(law, corner_set()), 1.0 / 16.0);
  EXPECT_GT(set_probability(build_discretized_target(500, p), corner_set()), 0.125);
}

TEST(Heatmap, FormatAndOrientation) {
  const auto dir = std::filesystem::temp_directory_path() / "gibbsmix_heatmap_test";
  std::filesystem::create_directories(dir);
  const std::size_t n = 6;
  auto g = GridDistribution::zeros(n, 2);
  g(1, 4) = 1.0;  // u cell 1, v cell 4
  export_heatmap(g, dir / "a.pgm");
  const Pgm img = read_pgm(dir / "a.pgm");
  EXPECT_EQ(img.width, n);
  EXPECT_EQ(img.height, n);
  EXPECT_EQ(img.maxval, 65535u);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const bool hot = (r == n - 1 - 4 && c == 1);
      ASSERT_EQ(img.pixels[r * n + c], hot ? 0 : 65535);
    }
  }
  export_heatmap(GridDistribution::uniform(n, 2), dir / "u.pgm");
  const Pgm flat = read_pgm(dir / "u.pgm");
  for (auto px : flat.pixels) ASSERT_EQ(px, flat.pixels[0]);
  EXPECT_THROW(export_heatmap(g, dir / "missing" / "x.pgm"), std::runtime_error);
  EXPECT_THROW(export_heatmap(GridDistribution::uniform(4, 1), dir / "b.pgm"),
               std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Heatmap, RidgeFollowsDiagonal) {
  const auto dir = std::filesystem::temp_directory_path() / "gibbsmix_ridge_test";
  std::filesystem::create_directories(dir);
  const auto law = evolve_2d(GridDistribution::point_mass(500, {0.0, 0.0}), 10000,
                             ModelParams(250.0));
  export_heatmap(law, dir / "r.pgm");
  const Pgm img = read_pgm(dir / "r.pgm");
  const std::size_t n = img.width;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t v = n - 1 - r;
    if (v < n / 4 || v >= 3 * n / 4) continue;  // middle rows
    std::size_t best = 0;
    for (std::size_t c = 1; c < n; ++c) {
      if (img.pixels[r * n + c] < img.pixels[r * n + best]) best = c;
    }
    ASSERT_LE(best > v ? best - v : v - best, 3u) << "row v=" << v;
  }
  std::filesystem::remove_all(dir);
}
