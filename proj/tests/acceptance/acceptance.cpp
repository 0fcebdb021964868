// Acceptance checks. Each criterion prints one line:
//   [PASS|FAIL] criterion NN: <summary> | <measured values>
// and the process exits non-zero if any selected criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbsmix/chain.hpp"
#include "gibbsmix/constants.hpp"
#include "gibbsmix/coupling.hpp"
#include "gibbsmix/grid.hpp"
#include "gibbsmix/parallel.hpp"

using namespace gibbsmix;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

constexpr std::size_t kGrid = 500;

Verdict mixing_table() {
  const std::vector<std::pair<double, double>> rows = {{10.0, 71.0}, {50.0, 1858.0}, {250.0, 47233.0}};
  Verdict v{true, ""};
  for (auto [a, reference] : rows) {
    const auto r = find_mixing_time({0.0, 0.0}, 0.25, ModelParams(a), kGrid, 200000);
    const double rel = (static_cast<double>(r.t_mix) - reference) / reference;
    v.pass = v.pass && std::abs(rel) <= 0.10;
    v.detail += fmt("a=%g t=%zu (ref %g, %+.2f%%) ", a, r.t_mix, reference, 100.0 * rel);
  }
  return v;
}

Verdict constants() {
  const ConstantsConfig c{0.10, 0.0, 0.0};
  const double b = beta4(c);
  const double g = gamma_const(c);
  const bool pass = b >= 0.0501 && b <= 0.0511 && g >= 0.260 && g <= 0.264 && b + g < 1.0 / 3.0;
  return {pass, fmt("beta4=%.6f gamma=%.6f sum=%.6f", b, g, b + g)};
}

Verdict lower_bound_structure() {
  const auto region = corner_set();
  Verdict v{true, ""};
  for (double a : {0.01, 1.0, 10.0, 50.0, 250.0}) {
    const double pi_s = set_probability(build_discretized_target(kGrid, ModelParams(a)), region);
    v.pass = v.pass && pi_s >= 0.125;
    v.detail += fmt("pi(S)[a=%g]=%.4f ", a, pi_s);
  }
  const ModelParams p(50.0);
  const auto law = evolve_2d(GridDistribution::point_mass(kGrid, {0.5, 0.5}), 125, p);
  const double ps = set_probability(law, region);
  const double tv = tv_distance(law, build_discretized_target(kGrid, p));
  v.pass = v.pass && ps < 1.0 / 16.0 && tv > 1.0 / 16.0;
  v.detail += fmt("P(X(125) in S)=%.3e TV=%.4f", ps, tv);
  return v;
}

Verdict coupling_ordering() {
  Verdict v{true, ""};
  for (double a : {10.0, 50.0}) {
    const auto r = couple_z_yprime(0.0, 1000, ModelParams(a), 20240, 10000);
    v.pass = v.pass && r.ordering_violations == 0;
    v.detail += fmt("a=%g violations=%zu/%zu ", a, r.ordering_violations, r.trajectories);
  }
  return v;
}

Verdict dominance() {
  Verdict v{true, ""};
  for (double a : {1.0, 10.0, 100.0}) {
    const double gap = verify_dominance_inequality(200, 200, ModelParams(a));
    v.pass = v.pass && gap >= -1e-12;
    v.detail += fmt("a=%g min_gap=%.3e ", a, gap);
  }
  return v;
}

Verdict decoupling_frequency() {
  const double a = 100.0;
  const auto horizon = static_cast<std::size_t>(0.10 * a * a);
  const auto r = couple_y_w(0.5, horizon, ModelParams(a), 77, 100000);
  const double f = r.decoupled_before(horizon);
  return {f >= 0.041 && f <= 0.061, fmt("P(nu_c2 < %zu) = %.5f over %zu runs", horizon, f, r.trajectories)};
}

Verdict sandwich() {
  const ModelParams p(10.0);
  const std::size_t n = 100;
  Verdict v{true, ""};
  for (std::size_t t : {10u, 100u}) {
    const double d = worst_case_distance_d(t, p, n);
    const double dbar = worst_case_distance_dbar(t, t, p, n).dbar_s;
    v.pass = v.pass && d <= dbar && dbar <= 2.0 * d;
    v.detail += fmt("t=%zu d=%.6f dbar=%.6f ", t, d, dbar);
  }
  for (auto [s, t] : {std::pair<std::size_t, std::size_t>{50, 50}, {100, 200}}) {
    const auto d = worst_case_distance_dbar(s, t, p, n);
    v.pass = v.pass && d.dbar_s_plus_t <= d.dbar_s * d.dbar_t * (1.0 + 1e-9);
    v.detail += fmt("dbar(%zu)=%.6f <= %.6f ", s + t, d.dbar_s_plus_t, d.dbar_s * d.dbar_t);
  }
  return v;
}

Verdict stationarity() {
  Verdict v{true, ""};
  for (double a : {1.0, 10.0, 50.0}) {
    for (std::size_t n : {100u, 500u}) {
      const ModelParams p(a);
      const auto target = build_discretized_target(n, p);
      const double tv = tv_distance(evolve_2d(target, 1, p), target);
      v.pass = v.pass && tv < 1e-12;
      v.detail += fmt("(a=%g,n=%zu) %.1e ", a, n, tv);
    }
  }
  return v;
}

// Terminal cells of `count` X trajectories from (0, 0), binned on n x n.
std::vector<double> sample_histogram(double a, std::size_t steps, std::size_t count, std::size_t n) {
  const ModelParams p(a);
  std::vector<double> counts(n * n, 0.0);
  const std::size_t chunk = 100000;
  for (std::size_t offset = 0; offset < count; offset += chunk) {
    const std::size_t m = std::min(chunk, count - offset);
    const auto cells = run_batch<std::size_t>(m, [&](std::size_t i) {
      const auto rec = run_x({0.0, 0.0}, steps, p, 9, SimOptions{false, offset + i});
      return GridDistribution::cell_of(rec.terminal.u, n) * n + GridDistribution::cell_of(rec.terminal.v, n);
    });
    for (std::size_t c : cells) counts[c] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(count);
  return counts;
}

GridDistribution coarsen(const GridDistribution& fine, std::size_t factor) {
  const std::size_t n = fine.n() / factor;
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < fine.n(); ++i) {
    for (std::size_t j = 0; j < fine.n(); ++j) w[(i / factor) * n + j / factor] += fine(i, j);
  }
  return GridDistribution::from_weights(n, 2, std::move(w));
}

constexpr std::size_t kSamples = 1000000;

Verdict mc_grid_agreement() {
  const ModelParams p(10.0);
  const auto grid = evolve_2d(GridDistribution::point_mass(kGrid, {0.0, 0.0}), 71, p);
  const auto mc = GridDistribution::from_weights(kGrid, 2, sample_histogram(10.0, 71, kSamples, kGrid));
  const double tv = tv_distance(mc, grid);
  // Expected TV of an exact sampler against its own law: sum sqrt(2 p (1 - p) / (pi N)) / 2.
  double floor = 0.0;
  for (double q : grid.weights()) floor += std::sqrt(2.0 * q * (1.0 - q) / (std::numbers::pi * kSamples));
  floor *= 0.5;
  return {tv < 0.02, fmt("TV=%.4f on %zux%zu with %zu samples; sampling noise floor %.4f", tv, kGrid,
                         kGrid, kSamples, floor)};
}

Verdict mc_grid_agreement_coarse() {
  const ModelParams p(10.0);
  const std::size_t factor = 20;
  const auto grid = coarsen(evolve_2d(GridDistribution::point_mass(kGrid, {0.0, 0.0}), 71, p), factor);
  const auto mc = GridDistribution::from_weights(
      kGrid / factor, 2, sample_histogram(10.0, 71, kSamples, kGrid / factor));
  const double tv = tv_distance(mc, grid);
  double floor = 0.0;
  for (double q : grid.weights()) floor += std::sqrt(2.0 * q * (1.0 - q) / (std::numbers::pi * kSamples));
  floor *= 0.5;
  return {tv < 0.02, fmt("TV=%.4f on %zux%zu blocks; noise floor %.4f", tv, kGrid / factor,
                         kGrid / factor, floor)};
}

Verdict scaling() {
  Verdict v{true, ""};
  std::vector<double> ratios;
  for (double a : {25.0, 50.0, 100.0}) {
    const auto r = find_mixing_time({0.0, 0.0}, 0.25, ModelParams(a), kGrid, 200000);
    ratios.push_back(static_cast<double>(r.t_mix) / (a * a));
    v.detail += fmt("a=%g t=%zu t/a^2=%.4f ", a, r.t_mix, ratios.back());
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  v.pass = *hi / *lo <= 1.5 && *lo > 0.1;
  v.detail += fmt("spread=%.3f", *hi / *lo);
  return v;
}

struct Criterion {
  std::string id;
  std::string summary;
  std::function<Verdict()> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"1", "mixing times at a=10,50,250 within 10%", mixing_table},
      {"2", "beta4, gamma and their sum", constants},
      {"3", "corner set mass and lower-bound gap", lower_bound_structure},
      {"4", "Z <= Y' along monotone couplings", coupling_ordering},
      {"5", "dominance inequality on 200^3 grid", dominance},
      {"6", "Y/W decoupling frequency at a=100", decoupling_frequency},
      {"7", "d/dbar sandwich and submultiplicativity", sandwich},
      {"8", "discretized target is a fixed point", stationarity},
      {"9", "Monte Carlo vs grid law, 500x500 bins", mc_grid_agreement},
      {"9c", "Monte Carlo vs grid law, 25x25 blocks (supplementary)", mc_grid_agreement_coarse},
      {"10", "t_mix / a^2 stable across a=25,50,100", scaling},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gibbsmix acceptance checks"};
  std::vector<std::string> selected;
  unsigned threads = 0;
  app.add_option("--criterion", selected, "criterion id(s) to run (default: all)");
  app.add_option("--threads", threads, "worker thread cap (0 = all cores)");
  CLI11_PARSE(app, argc, argv);
  set_max_threads(threads);

  std::vector<const Criterion*> run;
  for (const auto& c : criteria()) {
    if (selected.empty() || std::find(selected.begin(), selected.end(), c.id) != selected.end()) {
      run.push_back(&c);
    }
  }
  if (run.size() < std::max<std::size_t>(selected.size(), 1)) {
    std::cerr << "unknown criterion id\n";
    return 2;
  }

  int failures = 0;
  for (const Criterion* c : run) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c->check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::cout << (v.pass ? "[PASS]" : "[FAIL]") << " criterion " << c->id << ": " << c->summary
              << " | " << v.detail << " (" << fmt("%.1f", secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
