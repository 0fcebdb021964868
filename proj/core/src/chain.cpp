#include "gibbsmix/chain.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "gibbsmix/rng.hpp"

namespace gibbsmix {
namespace {

TrajectoryRecord make_record(Process process, std::size_t steps, std::uint64_t seed,
                             const SimOptions& options) {
  TrajectoryRecord rec;
  rec.process = process;
  rec.steps = steps;
  rec.seed = seed;
  rec.stream = options.stream;
  return rec;
}

void note_first(std::optional<std::size_t>& slot, bool hit, std::size_t s) {
  if (!slot && hit) slot = s;
}

// Shared driver for Y and Y': the u coordinate is refreshed from a
// conditional centred at the previous u, which becomes the new v.
template <class Conditional>
TrajectoryRecord run_scalar_gibbs(Process process, Point start, std::size_t steps,
                                  const ModelParams& params, std::uint64_t seed,
                                  const SimOptions& options, Conditional conditional) {
  TrajectoryRecord rec = make_record(process, steps, seed, options);
  RandomStream rng(seed, options.stream);
  if (options.store_path) rec.points.reserve(steps + 1);

  auto observe = [&](Point p, std::size_t s) {
    if (options.store_path) rec.points.push_back(p);
    const bool reached_lo = p.u >= params.middle_lo();
    if (process == Process::Y) {
      note_first(rec.stopping.nu_m, params.in_middle(p.u), s);
      note_first(rec.stopping.nu_m_tilde, reached_lo, s);
    } else {
      note_first(rec.stopping.nu_m_hat, reached_lo, s);
    }
  };

  Point state = start;
  observe(state, 0);
  for (std::size_t s = 1; s <= steps; ++s) {
    state = Point{conditional(state.u).quantile(rng.uniform()), state.u};
    assert(state.u >= 0.0);
    assert(process == Process::YPrime || state.u <= 1.0);
    observe(state, s);
  }
  rec.terminal = state;
  rec.terminal_scalar = state.u;
  return rec;
}

}  // namespace

std::string_view to_string(Process process) {
  switch (process) {
    case Process::X: return "X";
    case Process::XStar: return "XStar";
    case Process::Y: return "Y";
    case Process::YPrime: return "YPrime";
    case Process::Z: return "Z";
    case Process::W: return "W";
  }
  return "?";
}

std::optional<Process> parse_process(std::string_view name) {
  for (Process p : {Process::X, Process::XStar, Process::Y, Process::YPrime, Process::Z,
                    Process::W}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

Point step_x(Point state, Direction direction, double draw, const ModelParams& params) {
  if (direction == Direction::U) {
    return Point{unit_conditional(state.v, params).quantile(draw), state.v};
  }
  return Point{state.u, unit_conditional(state.u, params).quantile(draw)};
}

TrajectoryRecord run_x(Point start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options) {
  TrajectoryRecord rec = make_record(Process::X, steps, seed, options);
  RandomStream rng(seed, options.stream);
  if (options.store_path) {
    rec.points.reserve(steps + 1);
    rec.directions.reserve(steps);
    rec.points.push_back(start);
  }

  Point state = start;
  std::optional<Direction> previous;
  for (std::size_t s = 1; s <= steps; ++s) {
    const Direction dir = rng.coin() ? Direction::U : Direction::V;
    state = step_x(state, dir, rng.uniform(), params);
    assert(state.u >= 0.0 && state.u <= 1.0 && state.v >= 0.0 && state.v <= 1.0);
    if (previous && *previous != dir) ++rec.direction_changes;
    if (!previous) rec.first_direction = dir;
    previous = dir;
    if (options.store_path) {
      rec.points.push_back(state);
      rec.directions.push_back(dir);
    }
  }
  rec.terminal = state;
  return rec;
}

TrajectoryRecord run_x_star(Point start, std::size_t steps, const ModelParams& params,
                            std::uint64_t seed, const SimOptions& options) {
  TrajectoryRecord rec = make_record(Process::XStar, steps, seed, options);
  RandomStream rng(seed, options.stream);
  if (options.store_path) {
    rec.points.reserve(steps + 1);
    rec.points.push_back(start);
  }
  Point state = start;
  for (std::size_t s = 1; s <= steps; ++s) {
    // Odd steps refresh v, even steps refresh u.
    state = step_x(state, s % 2 == 1 ? Direction::V : Direction::U, rng.uniform(), params);
    if (options.store_path) rec.points.push_back(state);
  }
  rec.terminal = state;
  return rec;
}

TrajectoryRecord run_y(Point start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options) {
  return run_scalar_gibbs(Process::Y, start, steps, params, seed, options,
                          [&](double c) { return unit_conditional(c, params); });
}

TrajectoryRecord run_y(double start_u, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options) {
  return run_y(Point{start_u, start_u}, steps, params, seed, options);
}

TrajectoryRecord run_y_prime(double start_u, std::size_t steps, const ModelParams& params,
                             std::uint64_t seed, const SimOptions& options) {
  if (!(start_u >= 0.0)) throw std::invalid_argument("Y' starts in [0, inf)");
  return run_scalar_gibbs(Process::YPrime, Point{start_u, start_u}, steps, params, seed,
                          options, [&](double c) { return halfline_conditional(c, params); });
}

TrajectoryRecord run_z(double start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options) {
  TrajectoryRecord rec = make_record(Process::Z, steps, seed, options);
  RandomStream rng(seed, options.stream);
  if (options.store_path) {
    rec.scalars.reserve(steps + 1);
    rec.unreflected.reserve(steps + 1);
  }
  double walk = start;
  for (std::size_t s = 0;; ++s) {
    if (options.store_path) {
      rec.unreflected.push_back(walk);
      rec.scalars.push_back(std::abs(walk));
    }
    if (s == steps) break;
    walk += rng.normal(params.sigma());
  }
  rec.terminal_unreflected = walk;
  rec.terminal_scalar = std::abs(walk);
  return rec;
}

TrajectoryRecord run_w(double start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options) {
  TrajectoryRecord rec = make_record(Process::W, steps, seed, options);
  RandomStream rng(seed, options.stream);
  if (options.store_path) rec.scalars.reserve(steps + 1);
  double walk = start;
  for (std::size_t s = 0;; ++s) {
    if (options.store_path) rec.scalars.push_back(walk);
    note_first(rec.stopping.nu_c2, walk < 0.0 || walk > 1.0, s);
    if (s == steps) break;
    walk += rng.normal(params.sigma());
  }
  rec.terminal_scalar = walk;
  return rec;
}

TrajectoryRecord run_process(Process process, Point start, std::size_t steps,
                             const ModelParams& params, std::uint64_t seed,
                             const SimOptions& options) {
  switch (process) {
    case Process::X: return run_x(start, steps, params, seed, options);
    case Process::XStar: return run_x_star(start, steps, params, seed, options);
    case Process::Y: return run_y(start, steps, params, seed, options);
    case Process::YPrime: return run_y_prime(start.u, steps, params, seed, options);
    case Process::Z: return run_z(start.u, steps, params, seed, options);
    case Process::W: return run_w(start.u, steps, params, seed, options);
  }
  throw std::invalid_argument("unknown process");
}

std::size_t count_direction_changes(std::span<const Direction> directions) {
  if (directions.empty()) {
    throw std::invalid_argument("direction sequence must be nonempty");
  }
  std::size_t changes = 0;
  for (std::size_t s = 1; s < directions.size(); ++s) {
    if (directions[s] != directions[s - 1]) ++changes;
  }
  return changes;
}

std::optional<std::size_t> first_index(std::span<const double> values,
                                       const std::function<bool(double)>& pred) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (pred(values[i])) return i;
  }
  return std::nullopt;
}

}  // namespace gibbsmix
