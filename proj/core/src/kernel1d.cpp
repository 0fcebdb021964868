#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbsmix/grid.hpp"
#include "gibbsmix/parallel.hpp"

namespace gibbsmix {
namespace {

double row_tv(const Eigen::MatrixXd& rows, Eigen::Index a, const Eigen::VectorXd& other) {
  CompensatedSum s;
  for (Eigen::Index k = 0; k < rows.cols(); ++k) s += std::abs(rows(a, k) - other(k));
  return 0.5 * s.value();
}

}  // namespace

GibbsKernel1D::GibbsKernel1D(std::size_t n, const ModelParams& params) {
  const DiagonalTarget target(n, params);
  const auto size = static_cast<Eigen::Index>(n);
  matrix_.resize(size, size);
  marginal_.resize(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    const double m = target.marginal()[static_cast<std::size_t>(j)];
    marginal_(j) = m;
    for (Eigen::Index i = 0; i < size; ++i) {
      matrix_(j, i) = target.joint(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) / m;
    }
  }
}

Eigen::MatrixXd GibbsKernel1D::power(std::size_t t) const {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(matrix_.rows(), matrix_.cols());
  for (std::size_t s = 0; s < t; ++s) result = (result * matrix_).eval();
  return result;
}

GibbsKernel1D build_kernel_1d(std::size_t n, const ModelParams& params) {
  return GibbsKernel1D(n, params);
}

double worst_row_distance(const Eigen::MatrixXd& rows, const Eigen::VectorXd& marginal) {
  if (rows.cols() != marginal.size()) throw std::invalid_argument("row length mismatch");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) worst = std::max(worst, row_tv(rows, j, marginal));
  return worst;
}

double worst_pair_distance(const Eigen::MatrixXd& rows) {
  const auto count = static_cast<std::size_t>(rows.rows());
  std::vector<double> per_row(count, 0.0);
  parallel_chunks(count, [&](std::size_t a) {
    const Eigen::VectorXd first = rows.row(static_cast<Eigen::Index>(a)).transpose();
    double worst = 0.0;
    for (Eigen::Index b = static_cast<Eigen::Index>(a) + 1; b < rows.rows(); ++b) {
      worst = std::max(worst, row_tv(rows, b, first));
    }
    per_row[a] = worst;
  });
  return count == 0 ? 0.0 : *std::max_element(per_row.begin(), per_row.end());
}

double worst_case_distance_d(std::size_t t, const ModelParams& params, std::size_t n) {
  const GibbsKernel1D kernel(n, params);
  return worst_row_distance(kernel.power(t), kernel.marginal());
}

std::vector<double> distance_curve(std::size_t t_max, const ModelParams& params,
                                   std::size_t n) {
  const GibbsKernel1D kernel(n, params);
  std::vector<double> curve;
  curve.reserve(t_max + 1);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(kernel.matrix().rows(), kernel.matrix().cols());
  for (std::size_t t = 0;; ++t) {
    curve.push_back(worst_row_distance(rows, kernel.marginal()));
    if (t == t_max) break;
    rows = (rows * kernel.matrix()).eval();
  }
  return curve;
}

DbarTriple worst_case_distance_dbar(std::size_t s, std::size_t t, const ModelParams& params,
                                    std::size_t n) {
  const GibbsKernel1D kernel(n, params);
  // Walk through the three times in increasing order, reusing the powers.
  std::vector<std::size_t> times = {s, t, s + t};
  std::vector<std::size_t> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return times[x] < times[y]; });

  double values[3] = {};
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(kernel.matrix().rows(), kernel.matrix().cols());
  std::size_t reached = 0;
  for (std::size_t k : order) {
    for (; reached < times[k]; ++reached) rows = (rows * kernel.matrix()).eval();
    values[k] = worst_pair_distance(rows);
  }
  return {values[0], values[1], values[2]};
}

}  // namespace gibbsmix
