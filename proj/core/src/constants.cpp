#include "gibbsmix/constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace gibbsmix {
namespace {

constexpr double kQuadratureTolerance = 1e-13;
constexpr unsigned kMaxDepth = 20;

template <class F>
double integrate(F f, double lo, double hi, unsigned max_depth = kMaxDepth) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, max_depth,
                                                                       kQuadratureTolerance);
}

template <class F>
double integrate_pieces(F f, std::vector<double> breaks, unsigned max_depth = kMaxDepth) {
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    total += integrate(f, breaks[k], breaks[k + 1], max_depth);
  }
  return total;
}

// Distance from 1/2 at which the Gaussian in gamma's integrand equals 1, or
// nothing when the density never reaches 1.
std::optional<double> gamma_crossover(double alpha) {
  const double peak = 1.0 / std::sqrt(alpha * std::numbers::pi);
  if (peak <= 1.0) return std::nullopt;
  return std::sqrt(alpha * std::log(peak));
}

}  // namespace

void ConstantsConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(delta >= 0.0 && delta <= 0.5)) throw std::invalid_argument("delta must be in [0, 1/2]");
  if (!(epsilon_slack >= 0.0)) throw std::invalid_argument("epsilon_slack must be >= 0");
}

double erdos_kac_cdf(double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  return std::erf(alpha / std::numbers::sqrt2);
}

double beta4(const ConstantsConfig& cfg) {
  cfg.validate();
  const double x = (1.0 - 2.0 * cfg.delta) / std::sqrt(2.0 * cfg.alpha);
  // 1 - erf written as erfc to keep digits for small tails.
  return 2.0 * std::erfc(x / std::numbers::sqrt2) + cfg.epsilon_slack;
}

double gamma_const(const ConstantsConfig& cfg) {
  cfg.validate();
  const double half_width = 0.5 + cfg.delta;
  const double scale = std::sqrt(cfg.alpha);
  double covered;
  if (const auto r = gamma_crossover(cfg.alpha)) {
    const double flat = std::min(*r, half_width);
    covered = 2.0 * flat + (std::erf(half_width / scale) - std::erf(flat / scale));
  } else {
    covered = std::erf(half_width / scale);
  }
  return 1.0 + 2.0 * cfg.delta - covered;
}

double erdos_kac_cdf_quadrature(double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  const double c = std::sqrt(2.0 / std::numbers::pi);
  return integrate([&](double x) { return c * std::exp(-0.5 * x * x); }, 0.0, alpha);
}

double beta4_quadrature(const ConstantsConfig& cfg) {
  cfg.validate();
  const double x = (1.0 - 2.0 * cfg.delta) / std::sqrt(2.0 * cfg.alpha);
  // Integrate the tail directly so the subtraction from 1 loses nothing.
  const double c = std::sqrt(2.0 / std::numbers::pi);
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return c * std::exp(-0.5 * t * t); }, x,
      std::numeric_limits<double>::infinity(), kMaxDepth, kQuadratureTolerance);
  return 2.0 * tail + cfg.epsilon_slack;
}

double gamma_const_quadrature(const ConstantsConfig& cfg) {
  cfg.validate();
  const double alpha = cfg.alpha;
  const double peak = 1.0 / std::sqrt(alpha * std::numbers::pi);
  auto integrand = [&](double x) {
    const double y = x - 0.5;
    return std::min(peak * std::exp(-y * y / alpha), 1.0);
  };
  const double lo = -cfg.delta;
  const double hi = 1.0 + cfg.delta;
  std::vector<double> breaks = {lo, 0.5, hi};
  if (const auto r = gamma_crossover(alpha)) {
    for (double b : {0.5 - *r, 0.5 + *r}) {
      if (b > lo && b < hi) breaks.push_back(b);
    }
  }
  return 1.0 + 2.0 * cfg.delta - integrate_pieces(integrand, breaks);
}

double tv_uniform_marginal(const ModelParams& params) {
  auto p = [&](double x) { return marginal_density_pu(x, params); };
  const double norm = integrate_pieces(p, {0.0, 0.5, 1.0});

  // p is symmetric about 1/2 and increasing on [0, 1/2]; split where it
  // crosses its mean so the absolute value is smooth on every piece.
  std::vector<double> breaks = {0.0, 0.5, 1.0};
  const double f0 = p(0.0) - norm;
  const double f_half = p(0.5) - norm;
  if (f0 < 0.0 && f_half > 0.0) {
    std::uintmax_t iterations = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(
        [&](double x) { return p(x) - norm; }, 0.0, 0.5, f0, f_half,
        boost::math::tools::eps_tolerance<double>(52), iterations);
    const double root = 0.5 * (x0 + x1);
    breaks.push_back(root);
    breaks.push_back(1.0 - root);
  }
  // Pieces are smooth after the split. The shallow depth stops bisection
  // when the integrand is pure cancellation noise (a -> 0).
  const double l1 = integrate_pieces([&](double x) { return std::abs(1.0 - p(x) / norm); },
                                     breaks, 8);
  return 0.5 * l1;
}

nlohmann::json constants_report(const ConstantsConfig& cfg) {
  const double b = beta4(cfg);
  const double g = gamma_const(cfg);
  return {
      {"alpha", cfg.alpha},
      {"delta", cfg.delta},
      {"epsilon", cfg.epsilon_slack},
      {"beta4", b},
      {"gamma", g},
      {"beta4_plus_gamma", b + g},
  };
}

}  // namespace gibbsmix
