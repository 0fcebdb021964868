#pragma once

// Scalar densities of the diagonal target on the unit square.
//
// The target has density proportional to exp(-a^2 (u - v)^2) on [0,1]^2.
// Every conditional of it is a Gaussian of variance 1/(2 a^2) truncated to
// an interval, which is what most of the simulation machinery samples from.

#include <limits>
#include <stdexcept>

namespace gibbsmix {

/// Thrown when a truncation interval carries (numerically) no Gaussian mass.
class DegenerateTruncation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Concentration `a`, middle half-width `delta` and the step variance
/// 1/(2 a^2) derived from them.
class ModelParams {
 public:
  static constexpr double kDefaultDelta = 0.05;

  explicit ModelParams(double a, double delta = kDefaultDelta);

  double a() const noexcept { return a_; }
  double delta() const noexcept { return delta_; }
  double sigma2() const noexcept { return sigma2_; }
  double sigma() const noexcept { return sigma_; }

  double middle_lo() const noexcept { return 0.5 - delta_; }
  double middle_hi() const noexcept { return 0.5 + delta_; }
  bool in_middle(double x) const noexcept {
    return x >= middle_lo() && x <= middle_hi();
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double a_;
  double delta_;
  double sigma2_;
  double sigma_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// exp(-a^2 x^2). Underflows to 0 once |x| exceeds roughly 27/a.
double phi(double x, const ModelParams& params);

// Standard normal helpers. All tail-accurate (they go through erfc).
double normal_pdf(double z);
double normal_cdf(double z);
double normal_sf(double z);
/// Inverse of normal_cdf; +-inf at p = 1 / p = 0.
double normal_quantile(double p);

/// Gaussian with the given center and variance conditioned on
/// [support_lo, support_hi]. Either end may be infinite.
class TruncatedGaussian {
 public:
  /// Throws DegenerateTruncation when the support mass is below 1e-300.
  TruncatedGaussian(double center, double variance, double support_lo,
                    double support_hi);

  double center() const noexcept { return center_; }
  double variance() const noexcept { return sigma_ * sigma_; }
  double sigma() const noexcept { return sigma_; }
  double support_lo() const noexcept { return lo_; }
  double support_hi() const noexcept { return hi_; }
  /// Untruncated probability of the support.
  double support_mass() const noexcept { return mass_; }

  double pdf(double x) const;
  double cdf(double x) const;
  /// Returns x with cdf(x) = p. p = 0 and p = 1 map to the support edges
  /// (which may be infinite).
  double quantile(double p) const;

 private:
  double standardize(double x) const { return (x - center_) / sigma_; }
  double newton_polish(double x, double p) const;
  double bisect(double p) const;

  enum class Layout { kLower, kUpper, kStraddle };

  double center_;
  double sigma_;
  double lo_;
  double hi_;
  double alpha_;  // standardized lower edge
  double beta_;   // standardized upper edge
  Layout layout_;
  double cdf_alpha_;  // Phi(alpha)
  double sf_alpha_;   // Q(alpha)
  double sf_beta_;    // Q(beta)
  double mass_;
};

/// pi(. , v): the conditional of one coordinate given the other is v.
TruncatedGaussian unit_conditional(double center, const ModelParams& params);

/// sigma_v: the Gaussian at v conditioned on [0, inf).
TruncatedGaussian halfline_conditional(double center,
                                       const ModelParams& params);

/// Law of |N(center, variance)| on [0, inf).
class FoldedGaussian {
 public:
  FoldedGaussian(double center, double variance);

  double center() const noexcept { return center_; }
  double variance() const noexcept { return sigma_ * sigma_; }

  double pdf(double u) const;
  /// P(|N| <= u); zero for u < 0.
  double cdf(double u) const;
  /// Mass of [lo, hi] intersected with [0, inf).
  double measure(double lo, double hi) const;
  double quantile(double p) const;

 private:
  double center_;
  double sigma_;
};

/// Density of the u-marginal up to normalization:
/// (a/sqrt(pi)) * integral_{-x}^{1-x} phi, evaluated through erf.
double marginal_density_pu(double x, const ModelParams& params);

/// exp(-a^2 z^2) / (2 sqrt(pi) a z), an upper bound on P(N(0, 1/(2a^2)) > z).
double gaussian_tail_bound(double z, const ModelParams& params);

}  // namespace gibbsmix
