#include "gibbsmix/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gibbsmix/chain.hpp"
#include "gibbsmix/parallel.hpp"
#include "gibbsmix/rng.hpp"

namespace gibbsmix {
namespace {

// Paths are recorded only when the caller asks for them; batch runs keep the
// summary fields.
struct PathSink {
  bool store;
  CoupledPath path;
  double last_first = 0.0;
  double last_second = 0.0;

  void push(double first, double second) {
    last_first = first;
    last_second = second;
    if (store) {
      path.first.push_back(first);
      path.second.push_back(second);
    }
  }
};

struct BatchItem {
  std::optional<std::size_t> decoupled;
  std::optional<std::size_t> reference;
  std::size_t violations = 0;
  double first = 0.0;
  double second = 0.0;
};

PathSink simulate_y_w(double start, std::size_t steps, const ModelParams& params,
                      std::uint64_t seed, std::uint64_t stream, bool store) {
  if (!params.in_middle(start)) {
    throw std::invalid_argument("Y/W coupling starts in [1/2 - delta, 1/2 + delta]");
  }
  PathSink sink{store, {}};
  RandomStream rng(seed, stream);
  double y = start;
  double w = start;
  sink.push(y, w);
  for (std::size_t s = 1; s <= steps; ++s) {
    const double zeta = rng.normal(params.sigma());
    w += zeta;
    const double proposal = y + zeta;
    if (proposal >= 0.0 && proposal <= 1.0) {
      y = proposal;
    } else {
      y = unit_conditional(y, params).quantile(rng.uniform());
    }
    if (!sink.path.decoupled && (w < 0.0 || w > 1.0)) sink.path.decoupled = s;
    if (!sink.path.decoupled && y != w) {
      throw std::logic_error("Y/W coupling separated before W left [0, 1]");
    }
    sink.push(y, w);
  }
  return sink;
}

PathSink simulate_y_yprime(double start, std::size_t steps, const ModelParams& params,
                           std::uint64_t seed, std::uint64_t stream, bool store) {
  if (!(start >= 0.0 && start < params.middle_lo())) {
    throw std::invalid_argument("Y/Y' coupling starts in [0, 1/2 - delta)");
  }
  PathSink sink{store, {}};
  RandomStream rng(seed, stream);
  double y = start;
  double yp = start;
  sink.push(y, yp);
  for (std::size_t s = 1; s <= steps; ++s) {
    if (!sink.path.decoupled) {
      const double draw = halfline_conditional(yp, params).quantile(rng.uniform());
      if (draw < 1.0) {
        y = draw;
      } else {
        // Fresh independent uniform for the [0, 1] redraw.
        y = unit_conditional(y, params).quantile(rng.uniform());
        sink.path.decoupled = s;
      }
      yp = draw;
    } else {
      const double next_yp = halfline_conditional(yp, params).quantile(rng.uniform());
      y = unit_conditional(y, params).quantile(rng.uniform());
      yp = next_yp;
    }
    if (!sink.path.reference && y >= params.middle_lo()) sink.path.reference = s;
    sink.push(y, yp);
  }
  return sink;
}

PathSink simulate_z_yprime(double start, std::size_t steps, const ModelParams& params,
                           std::uint64_t seed, std::uint64_t stream, bool store) {
  if (!(start >= 0.0)) throw std::invalid_argument("Z/Y' coupling starts in [0, inf)");
  PathSink sink{store, {}};
  RandomStream rng(seed, stream);
  double z = start;
  double yp = start;
  sink.push(z, yp);
  for (std::size_t s = 1; s <= steps; ++s) {
    const MonotoneStep next = monotone_couple_step_checked(z, yp, rng.uniform(), params);
    if (next.violated) ++sink.path.ordering_violations;
    // Keep the induction going after a violation so the remaining steps are
    // still checked.
    z = std::min(next.lower, next.upper);
    yp = next.upper;
    sink.push(z, yp);
  }
  return sink;
}

template <class Simulate>
CouplingReport run_coupling_batch(CouplingPair pair, double start, std::size_t steps,
                                  const ModelParams& params, std::uint64_t seed,
                                  std::size_t trajectories, Simulate simulate) {
  auto items = run_batch<BatchItem>(trajectories, [&](std::size_t i) {
    const PathSink sink = simulate(start, steps, params, seed, i, false);
    const CoupledPath& path = sink.path;
    return BatchItem{path.decoupled, path.reference, path.ordering_violations,
                     sink.last_first, sink.last_second};
  });

  CouplingReport report;
  report.pair = pair;
  report.trajectories = trajectories;
  report.steps_per_trajectory = steps;
  report.params = params;
  report.seed = seed;
  report.decoupling_times.reserve(trajectories);
  report.terminal_first.reserve(trajectories);
  report.terminal_second.reserve(trajectories);
  for (const BatchItem& item : items) {
    report.decoupling_times.push_back(item.decoupled);
    if (pair == CouplingPair::Y_YPrime) report.reference_times.push_back(item.reference);
    report.ordering_violations += item.violations;
    report.terminal_first.push_back(item.first);
    report.terminal_second.push_back(item.second);
  }
  return report;
}

}  // namespace

std::string_view to_string(CouplingPair pair) {
  switch (pair) {
    case CouplingPair::Y_YPrime: return "Y_YPrime";
    case CouplingPair::Z_YPrime: return "Z_YPrime";
    case CouplingPair::Y_W: return "Y_W";
  }
  return "?";
}

double CouplingReport::decoupled_before(std::size_t horizon) const {
  if (decoupling_times.empty()) return 0.0;
  const auto hits = std::count_if(decoupling_times.begin(), decoupling_times.end(),
                                  [&](const auto& t) { return t && *t < horizon; });
  return static_cast<double>(hits) / static_cast<double>(decoupling_times.size());
}

nlohmann::json to_json(const CouplingReport& report) {
  nlohmann::json times = nlohmann::json::array();
  std::size_t decoupled = 0;
  for (const auto& t : report.decoupling_times) {
    if (t) {
      times.push_back(*t);
      ++decoupled;
    } else {
      times.push_back(nullptr);
    }
  }
  return {
      {"pair", to_string(report.pair)},
      {"trajectories", report.trajectories},
      {"steps_per_trajectory", report.steps_per_trajectory},
      {"a", report.params.a()},
      {"delta", report.params.delta()},
      {"seed", report.seed},
      {"ordering_violations", report.ordering_violations},
      {"decoupled_count", decoupled},
      {"decoupling_times", std::move(times)},
  };
}

MonotoneStep monotone_couple_step_checked(double lower_center, double upper_center,
                                          double shared_uniform, const ModelParams& params) {
  if (!(lower_center >= 0.0) || !(lower_center <= upper_center)) {
    throw std::invalid_argument("monotone coupling requires 0 <= lower_center <= upper_center");
  }
  double lower = FoldedGaussian(lower_center, params.sigma2()).quantile(shared_uniform);
  const double upper = halfline_conditional(upper_center, params).quantile(shared_uniform);
  bool violated = false;
  if (lower > upper) {
    const double scale = std::max(upper, params.sigma());
    if (lower - upper <= kOrderingSlack * scale) {
      lower = upper;
    } else {
      violated = true;
    }
  }
  return {lower, upper, violated};
}

std::pair<double, double> monotone_couple_step(double lower_center, double upper_center,
                                               double shared_uniform,
                                               const ModelParams& params) {
  const MonotoneStep step =
      monotone_couple_step_checked(lower_center, upper_center, shared_uniform, params);
  if (step.violated) {
    throw std::logic_error("monotone coupling produced an inverted pair");
  }
  return {step.lower, step.upper};
}

double verify_dominance_inequality(std::size_t grid_v, std::size_t grid_u,
                                   const ModelParams& params) {
  if (grid_v < 2 || grid_u < 2) throw std::invalid_argument("grid sizes must be >= 2");
  constexpr double kExtent = 3.0;
  auto node = [](std::size_t k, std::size_t count) {
    return kExtent * static_cast<double>(k) / static_cast<double>(count - 1);
  };

  // folded[l][m] = folded_{v_l}([0, u_m]), halfline[k][m] = sigma_{v_k}([0, u_m])
  std::vector<double> folded(grid_v * grid_u);
  std::vector<double> halfline(grid_v * grid_u);
  parallel_chunks(grid_v, [&](std::size_t k) {
    const double v = node(k, grid_v);
    const FoldedGaussian f(v, params.sigma2());
    const TruncatedGaussian g = halfline_conditional(v, params);
    for (std::size_t m = 0; m < grid_u; ++m) {
      const double u = node(m, grid_u);
      folded[k * grid_u + m] = f.measure(0.0, u);
      halfline[k * grid_u + m] = g.cdf(u);
    }
  });

  std::vector<double> row_min(grid_v, std::numeric_limits<double>::infinity());
  parallel_chunks(grid_v, [&](std::size_t k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l <= k; ++l) {
      for (std::size_t m = 0; m < grid_u; ++m) {
        best = std::min(best, folded[l * grid_u + m] - halfline[k * grid_u + m]);
      }
    }
    row_min[k] = best;
  });
  return *std::min_element(row_min.begin(), row_min.end());
}

CoupledPath couple_y_w_path(double start, std::size_t steps, const ModelParams& params,
                            std::uint64_t seed, std::uint64_t stream) {
  return simulate_y_w(start, steps, params, seed, stream, true).path;
}

CoupledPath couple_y_yprime_path(double start, std::size_t steps, const ModelParams& params,
                                 std::uint64_t seed, std::uint64_t stream) {
  return simulate_y_yprime(start, steps, params, seed, stream, true).path;
}

CoupledPath couple_z_yprime_path(double start, std::size_t steps, const ModelParams& params,
                                 std::uint64_t seed, std::uint64_t stream) {
  return simulate_z_yprime(start, steps, params, seed, stream, true).path;
}

CouplingReport couple_y_w(double start, std::size_t steps, const ModelParams& params,
                          std::uint64_t seed, std::size_t trajectories) {
  return run_coupling_batch(CouplingPair::Y_W, start, steps, params, seed, trajectories,
                            simulate_y_w);
}

CouplingReport couple_y_yprime(double start, std::size_t steps, const ModelParams& params,
                               std::uint64_t seed, std::size_t trajectories) {
  return run_coupling_batch(CouplingPair::Y_YPrime, start, steps, params, seed, trajectories,
                            simulate_y_yprime);
}

CouplingReport couple_z_yprime(double start, std::size_t steps, const ModelParams& params,
                               std::uint64_t seed, std::size_t trajectories) {
  return run_coupling_batch(CouplingPair::Z_YPrime, start, steps, params, seed, trajectories,
                            simulate_z_yprime);
}

}  // namespace gibbsmix
