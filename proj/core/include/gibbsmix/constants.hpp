#pragma once

// Explicit constants of the coupling argument and the limit of the
// stationary u-marginal. Closed forms use erf/erfc; the *_quadrature
// variants integrate the defining expressions directly and exist to
// cross-check them.

#include <nlohmann/json.hpp>

#include "gibbsmix/density.hpp"

namespace gibbsmix {

struct ConstantsConfig {
  double alpha = 0.10;         // time-scale constant, in units of a^2 steps
  double delta = 0.0;          // half-width of the middle interval
  double epsilon_slack = 0.0;  // additive safety term

  /// Throws std::invalid_argument unless alpha > 0, 0 <= delta <= 1/2 and
  /// epsilon_slack >= 0. delta = 1/2 is the degenerate boundary.
  void validate() const;
};

/// Limit law of the normalized running maximum of a centred random walk:
/// sqrt(2/pi) * integral_0^alpha exp(-x^2/2) dx = erf(alpha / sqrt(2)).
double erdos_kac_cdf(double alpha);

/// 2 (1 - erdos_kac_cdf((1 - 2 delta) / sqrt(2 alpha))) + epsilon.
double beta4(const ConstantsConfig& cfg);

/// 1 + 2 delta - integral over [-delta, 1 + delta] of
/// min(exp(-(x - 1/2)^2 / alpha) / sqrt(alpha pi), 1) dx.
double gamma_const(const ConstantsConfig& cfg);

double erdos_kac_cdf_quadrature(double alpha);
double beta4_quadrature(const ConstantsConfig& cfg);
double gamma_const_quadrature(const ConstantsConfig& cfg);

/// Total variation between the uniform law on [0, 1] and the normalized
/// u-marginal of the target, by adaptive quadrature.
double tv_uniform_marginal(const ModelParams& params);

/// {alpha, delta, epsilon, beta4, gamma, beta4_plus_gamma}.
nlohmann::json constants_report(const ConstantsConfig& cfg);

}  // namespace gibbsmix
