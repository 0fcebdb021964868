#pragma once

// Couplings between the scalar chains:
//
//   Y_YPrime  Y and Y' share every draw from sigma_{Y'} that lands below 1;
//             otherwise Y redraws on [0, 1] and the pair decouples (nu_c1).
//   Z_YPrime  monotone coupling of the reflected walk Z and Y' through a
//             shared uniform; Z(t) <= Y'_u(t) must hold at every step.
//   Y_W       Y_u and the free walk W share Gaussian increments until W
//             leaves [0, 1] (nu_c2).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gibbsmix/density.hpp"

namespace gibbsmix {

enum class CouplingPair { Y_YPrime, Z_YPrime, Y_W };

std::string_view to_string(CouplingPair pair);

/// Relative slack below which an inverted ordering is treated as rounding
/// noise rather than a violation.
inline constexpr double kOrderingSlack = 1e-12;

struct CouplingReport {
  CouplingPair pair = CouplingPair::Y_W;
  std::size_t trajectories = 0;
  std::size_t steps_per_trajectory = 0;
  /// One entry per trajectory; nullopt when the pair never decoupled.
  std::vector<std::optional<std::size_t>> decoupling_times;
  /// Y_YPrime only: nu_m_tilde of the Y path, per trajectory.
  std::vector<std::optional<std::size_t>> reference_times;
  std::size_t ordering_violations = 0;
  ModelParams params{1.0};
  std::uint64_t seed = 0;
  /// Terminal values of the first / second chain of the pair.
  std::vector<double> terminal_first;
  std::vector<double> terminal_second;

  /// Fraction of trajectories that decoupled strictly before `horizon`.
  double decoupled_before(std::size_t horizon) const;
};

nlohmann::json to_json(const CouplingReport& report);

/// One step of the paired path (first, second) produced by a coupling.
struct CoupledPath {
  std::vector<double> first;
  std::vector<double> second;
  std::optional<std::size_t> decoupled;
  std::optional<std::size_t> reference;  // nu_m_tilde for Y_YPrime
  std::size_t ordering_violations = 0;
};

/// Monotone coupling of the folded Gaussian at `lower_center` and
/// sigma_{upper_center} through the shared uniform. Requires
/// lower_center <= upper_center; the result satisfies lower <= upper.
std::pair<double, double> monotone_couple_step(double lower_center, double upper_center,
                                               double shared_uniform,
                                               const ModelParams& params);

/// Same, but reports whether the quantiles came out inverted by more than
/// kOrderingSlack (a genuine violation) instead of silently ordering them.
struct MonotoneStep {
  double lower;
  double upper;
  bool violated;
};
MonotoneStep monotone_couple_step_checked(double lower_center, double upper_center,
                                          double shared_uniform, const ModelParams& params);

/// min over 0 <= vbar <= v <= 3 and 0 <= u <= 3 of
/// folded_vbar([0, u]) - sigma_v([0, u]) on a grid_v x grid_v x grid_u grid.
double verify_dominance_inequality(std::size_t grid_v, std::size_t grid_u,
                                   const ModelParams& params);

CoupledPath couple_y_w_path(double start, std::size_t steps, const ModelParams& params,
                            std::uint64_t seed, std::uint64_t stream = 0);
CoupledPath couple_y_yprime_path(double start, std::size_t steps, const ModelParams& params,
                                 std::uint64_t seed, std::uint64_t stream = 0);
CoupledPath couple_z_yprime_path(double start, std::size_t steps, const ModelParams& params,
                                 std::uint64_t seed, std::uint64_t stream = 0);

/// Batches of independent coupled trajectories, trajectory i on stream i.
/// Paths are not retained, only decoupling times and terminal values.
CouplingReport couple_y_w(double start, std::size_t steps, const ModelParams& params,
                          std::uint64_t seed, std::size_t trajectories = 1);
CouplingReport couple_y_yprime(double start, std::size_t steps, const ModelParams& params,
                               std::uint64_t seed, std::size_t trajectories = 1);
CouplingReport couple_z_yprime(double start, std::size_t steps, const ModelParams& params,
                               std::uint64_t seed, std::size_t trajectories = 1);

}  // namespace gibbsmix
