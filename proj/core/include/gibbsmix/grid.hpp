#pragma once

// Deterministic evolution of discretized laws under the Gibbs kernel.
//
// The square is split into n x n cells; cell (i, j) covers
// [i/n, (i+1)/n) x [j/n, (j+1)/n) with i indexing u and j indexing v. The
// discrete target assigns each cell the exact integral of exp(-a^2 (u-v)^2)
// over it, and every conditional used by the operators is derived from that
// joint. The discrete target is therefore an exact fixed point.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gibbsmix/chain.hpp"
#include "gibbsmix/density.hpp"

namespace gibbsmix {

/// Probability weights on an n (1-D) or n x n (2-D) cell grid.
class GridDistribution {
 public:
  GridDistribution() = default;

  static GridDistribution zeros(std::size_t n, int dims);
  static GridDistribution uniform(std::size_t n, int dims);
  static GridDistribution point_mass(std::size_t n, Point at);
  static GridDistribution point_mass_1d(std::size_t n, double at);
  /// Takes ownership of raw weights; size must be n or n*n.
  static GridDistribution from_weights(std::size_t n, int dims, std::vector<double> weights);

  /// Cell containing x in [0, 1]; x = 1 belongs to the last cell.
  static std::size_t cell_of(double x, std::size_t n);

  std::size_t n() const noexcept { return n_; }
  int dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> weights() noexcept { return weights_; }

  double operator()(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return weights_[i * n_ + j]; }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// Compensated total mass.
  double total() const;
  void renormalize();

  /// Row sums (law of u) and column sums (law of v) of a 2-D distribution.
  std::vector<double> u_marginal() const;
  std::vector<double> v_marginal() const;

 private:
  GridDistribution(std::size_t n, int dims, std::vector<double> weights);

  std::size_t n_ = 0;
  int dims_ = 0;
  std::vector<double> weights_;
};

/// Exact cell masses of the normalized target. The joint only depends on
/// |i - j|, so it is stored as a diagonal profile.
class DiagonalTarget {
 public:
  DiagonalTarget(std::size_t n, const ModelParams& params);

  std::size_t n() const noexcept { return n_; }
  const ModelParams& params() const noexcept { return params_; }

  double joint(std::size_t i, std::size_t j) const {
    return profile_[i > j ? i - j : j - i];
  }
  /// profile()[k] is the mass of any cell with |i - j| = k.
  std::span<const double> profile() const noexcept { return profile_; }
  std::span<const double> marginal() const noexcept { return marginal_; }
  /// Largest k with a nonzero profile entry.
  std::size_t band() const noexcept { return band_; }

  GridDistribution joint_distribution() const;
  GridDistribution marginal_distribution() const;

 private:
  std::size_t n_;
  ModelParams params_;
  std::vector<double> profile_;
  std::vector<double> marginal_;
  std::size_t band_ = 0;
};

GridDistribution build_discretized_target(std::size_t n, const ModelParams& params);

/// Per-step diagnostics of a 2-D evolution.
struct StepStats {
  std::size_t t = 0;
  double tv_to_target = 0.0;
  double mass_before_renormalization = 1.0;
};
using StepObserver = std::function<void(const StepStats&)>;

/// One step of the random-scan chain: with probability 1/2 refresh u from its
/// conditional given v, otherwise refresh v given u. Both updates are taken
/// from the same input and averaged.
class RandomScanOperator {
 public:
  RandomScanOperator(std::size_t n, const ModelParams& params);

  const DiagonalTarget& target() const noexcept { return target_; }
  std::size_t n() const noexcept { return target_.n(); }

  GridDistribution apply(const GridDistribution& dist) const;
  /// Evolves `steps` steps, reporting each step (t = 1..steps) to `observer`.
  GridDistribution evolve(const GridDistribution& dist, std::size_t steps,
                          const StepObserver& observer = {}) const;
  /// Evolves until `stop` returns true or `max_steps` is reached. Returns
  /// the last distribution and the number of steps taken.
  std::pair<GridDistribution, std::size_t> evolve_until(
      const GridDistribution& dist, std::size_t max_steps,
      const std::function<bool(const StepStats&)>& stop) const;

 private:
  DiagonalTarget target_;
};

GridDistribution evolve_2d(const GridDistribution& dist, std::size_t steps,
                           const ModelParams& params);

/// Half the L1 distance. Throws std::invalid_argument on a shape mismatch.
double tv_distance(const GridDistribution& p, const GridDistribution& q);

struct MixingResult {
  double a = 0.0;
  std::size_t n = 0;
  double epsilon = 0.0;
  Point start{};
  bool converged = false;
  std::size_t t_mix = 0;
  /// (t, tv) for t = 0, 1, ..., t_mix (or max_steps when not converged).
  std::vector<std::pair<std::size_t, double>> tv_curve;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, MixingResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const MixingResult& partial() const noexcept { return partial_; }

 private:
  MixingResult partial_;
};

/// First t with TV(law of X(t), target) <= epsilon from a point mass at
/// start's cell. Throws NonConvergence (carrying the curve) past max_steps.
MixingResult find_mixing_time(Point start, double epsilon, const ModelParams& params,
                              std::size_t n, std::size_t max_steps);

/// Row-stochastic kernel of the scalar chain Y_u on n cells: row j is the
/// law of the next cell given the current cell j.
class GibbsKernel1D {
 public:
  GibbsKernel1D(std::size_t n, const ModelParams& params);

  std::size_t n() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& marginal() const noexcept { return marginal_; }

  /// K^t by repeated products; row j is the t-step law from cell j.
  Eigen::MatrixXd power(std::size_t t) const;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd marginal_;
};

GibbsKernel1D build_kernel_1d(std::size_t n, const ModelParams& params);

/// max over rows of TV(row, marginal).
double worst_row_distance(const Eigen::MatrixXd& rows, const Eigen::VectorXd& marginal);
/// max over row pairs of TV(row_a, row_b).
double worst_pair_distance(const Eigen::MatrixXd& rows);

/// d(t): worst-case TV between the t-step law of Y_u and its stationary law.
double worst_case_distance_d(std::size_t t, const ModelParams& params, std::size_t n);
/// d(0), d(1), ..., d(t_max).
std::vector<double> distance_curve(std::size_t t_max, const ModelParams& params,
                                   std::size_t n);

struct DbarTriple {
  double dbar_s = 0.0;
  double dbar_t = 0.0;
  double dbar_s_plus_t = 0.0;
};

/// dbar(k): worst-case TV between k-step laws from two start cells.
DbarTriple worst_case_distance_dbar(std::size_t s, std::size_t t, const ModelParams& params,
                                    std::size_t n);

/// Axis-aligned box [u0, u1] x [v0, v1] inside the unit square.
struct Box {
  double u0, u1, v0, v1;
};

/// S = [0, 1/4]^2 union [3/4, 1]^2.
std::vector<Box> corner_set();

/// Mass of a union of disjoint boxes; cells cut by a box edge contribute in
/// proportion to the covered area.
double set_probability(const GridDistribution& dist, std::span<const Box> region);

/// Writes a 16-bit binary PGM (P5, maxval 65535), one pixel per cell. Darker
/// means more mass, normalized by the image's own min and max. Image rows run
/// from v = 1 at the top to v = 0 at the bottom, columns follow u.
void export_heatmap(const GridDistribution& dist, const std::filesystem::path& path);

}  // namespace gibbsmix
