#pragma once

// Monte Carlo simulation of the coordinate Gibbs sampler and the auxiliary
// processes used to analyse it.
//
//   X      random-scan sampler on [0,1]^2 (fair coin picks the coordinate)
//   XStar  same updates with alternating directions V, U, V, ...
//   Y      XStar flipped across the diagonal after every step, so the
//          u coordinate is always the one refreshed: Y(t) = (u+, Y_u(t-1))
//   YPrime Y with the conditional truncated to [0, inf) instead of [0, 1]
//   Z      |Z~| where Z~ is a Gaussian random walk with variance 1/(2a^2)
//   W      the same random walk without reflection
//
// All truncated draws are made by inversion of a single uniform, so a
// trajectory is a deterministic function of (seed, stream index).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gibbsmix/density.hpp"
#include "gibbsmix/parallel.hpp"

namespace gibbsmix {

/// A state of X, XStar or Y. YPrime reuses it with coordinates in [0, inf).
struct Point {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class Direction : std::uint8_t { U, V };
enum class Process { X, XStar, Y, YPrime, Z, W };

std::string_view to_string(Process process);
std::optional<Process> parse_process(std::string_view name);

struct StoppingTimes {
  std::optional<std::size_t> nu_m;        // first s with Y_u(s) in the middle
  std::optional<std::size_t> nu_m_tilde;  // first s with Y_u(s) >= 1/2 - delta
  std::optional<std::size_t> nu_m_hat;    // first s with Y'_u(s) >= 1/2 - delta
  std::optional<std::size_t> nu_c1;       // Y / Y' decoupling
  std::optional<std::size_t> nu_c2;       // first s with W(s) outside [0, 1]
};

struct TrajectoryRecord {
  Process process = Process::X;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  // Full paths, steps + 1 entries each, only when SimOptions::store_path.
  std::vector<Point> points;        // X, XStar, Y, YPrime
  std::vector<double> scalars;      // Z (reflected) and W
  std::vector<double> unreflected;  // Z~ for Z
  std::vector<Direction> directions;  // X: r(1..steps)

  StoppingTimes stopping;
  Point terminal{};             // last 2-D state
  double terminal_scalar = 0.0;  // Y_u / Y'_u / Z / W at the last step
  double terminal_unreflected = 0.0;
  std::optional<Direction> first_direction;  // X only, r(1)
  std::size_t direction_changes = 0;         // X only, N(steps)
};

struct SimOptions {
  bool store_path = true;
  std::uint64_t stream = 0;
};

/// One Gibbs update of the coordinate named by `direction`, drawn by
/// inversion of `draw` in (0, 1). The other coordinate is copied unchanged.
Point step_x(Point state, Direction direction, double draw, const ModelParams& params);

TrajectoryRecord run_x(Point start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options = {});
TrajectoryRecord run_x_star(Point start, std::size_t steps, const ModelParams& params,
                            std::uint64_t seed, const SimOptions& options = {});
/// Y with Y(0) = start.
TrajectoryRecord run_y(Point start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options = {});
/// Y with Y(0) = (start_u, start_u).
TrajectoryRecord run_y(double start_u, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options = {});
TrajectoryRecord run_y_prime(double start_u, std::size_t steps, const ModelParams& params,
                             std::uint64_t seed, const SimOptions& options = {});
TrajectoryRecord run_z(double start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options = {});
TrajectoryRecord run_w(double start, std::size_t steps, const ModelParams& params,
                       std::uint64_t seed, const SimOptions& options = {});

/// Dispatches on `process`; scalar processes use start.u.
TrajectoryRecord run_process(Process process, Point start, std::size_t steps,
                             const ModelParams& params, std::uint64_t seed,
                             const SimOptions& options = {});

/// N(t): the number of adjacent unequal pairs. Throws on an empty sequence.
std::size_t count_direction_changes(std::span<const Direction> directions);

/// First index whose value satisfies `pred`.
std::optional<std::size_t> first_index(std::span<const double> values,
                                       const std::function<bool(double)>& pred);

/// Runs job(i) for i in [0, count) in parallel and returns results in index
/// order. Each job is expected to own its random stream.
template <class Result, class Job>
std::vector<Result> run_batch(std::size_t count, Job&& job) {
  constexpr std::size_t kChunk = 64;
  std::vector<Result> out(count);
  parallel_chunks(chunk_count(count, kChunk), [&](std::size_t c) {
    const std::size_t end = std::min(count, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = job(i);
  });
  return out;
}

}  // namespace gibbsmix
