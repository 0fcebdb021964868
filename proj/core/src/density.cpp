#include "gibbsmix/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace gibbsmix {
namespace {

constexpr double kMinSupportMass = 1e-300;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Acklam's rational approximation of the lower half of the normal quantile,
// relative error about 1e-9 before refinement.
double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

ModelParams::ModelParams(double a, double delta)
    : a_(a), delta_(delta), sigma2_(1.0 / (2.0 * a * a)), sigma_(std::sqrt(sigma2_)) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("concentration a must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("delta must lie in (0, 1/2)");
  }
}

double phi(double x, const ModelParams& params) {
  const double ax = params.a() * x;
  return std::exp(-ax * ax);
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double normal_quantile(double p) {
  if (std::isnan(p)) return p;
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  if (p > 0.5) return -normal_quantile(1.0 - p);  // 1 - p is exact here

  double x = acklam_lower(p);
  // One Halley step against the erfc-based cdf brings it to full precision.
  if (0.5 * x * x < 700.0) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

TruncatedGaussian::TruncatedGaussian(double center, double variance, double support_lo,
                                     double support_hi)
    : center_(center), sigma_(std::sqrt(variance)), lo_(support_lo), hi_(support_hi) {
  require_finite(center, "center");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("variance must be positive and finite");
  }
  if (std::isnan(support_lo) || std::isnan(support_hi) || !(support_lo < support_hi)) {
    throw std::invalid_argument("truncation requires support_lo < support_hi");
  }
  alpha_ = standardize(lo_);
  beta_ = standardize(hi_);
  cdf_alpha_ = normal_cdf(alpha_);
  sf_alpha_ = normal_sf(alpha_);
  sf_beta_ = normal_sf(beta_);

  if (alpha_ >= 0.0) {
    layout_ = Layout::kUpper;
    mass_ = sf_alpha_ - sf_beta_;
  } else if (beta_ <= 0.0) {
    layout_ = Layout::kLower;
    mass_ = normal_cdf(beta_) - cdf_alpha_;
  } else {
    layout_ = Layout::kStraddle;
    mass_ = 1.0 - cdf_alpha_ - sf_beta_;
  }
  if (!(mass_ >= kMinSupportMass)) {
    throw DegenerateTruncation("truncation support carries Gaussian mass below 1e-300 (center " +
                               std::to_string(center) + ", sigma " + std::to_string(sigma_) +
                               ")");
  }
}

double TruncatedGaussian::pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  return normal_pdf(standardize(x)) / (sigma_ * mass_);
}

double TruncatedGaussian::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double z = standardize(x);
  double value;
  switch (layout_) {
    case Layout::kLower:
      value = (normal_cdf(z) - cdf_alpha_) / mass_;
      break;
    case Layout::kUpper:
      value = (sf_alpha_ - normal_sf(z)) / mass_;
      break;
    default:
      value = z <= 0.0 ? (normal_cdf(z) - cdf_alpha_) / mass_
                       : 1.0 - (normal_sf(z) - sf_beta_) / mass_;
  }
  return std::clamp(value, 0.0, 1.0);
}

double TruncatedGaussian::quantile(double p) const {
  if (std::isnan(p)) throw std::invalid_argument("quantile level is NaN");
  if (p <= 0.0) return lo_;
  if (p >= 1.0) return hi_;

  // Invert through whichever normal tail keeps the target well conditioned.
  double z;
  const double lower_target = cdf_alpha_ + p * mass_;
  if (layout_ == Layout::kLower || (layout_ == Layout::kStraddle && lower_target <= 0.5)) {
    z = normal_quantile(lower_target);
  } else {
    z = -normal_quantile(sf_beta_ + (1.0 - p) * mass_);
  }
  z = std::clamp(z, alpha_, beta_);
  const double x = std::clamp(center_ + sigma_ * z, lo_, hi_);
  return newton_polish(x, p);
}

double TruncatedGaussian::newton_polish(double x, double p) const {
  const double tol = 1e-14 * std::min(p, 1.0 - p);
  for (int iter = 0; iter < 2; ++iter) {
    const double f = cdf(x) - p;
    if (std::abs(f) <= tol) break;
    const double density = pdf(x);
    if (!(density > 0.0)) return bisect(p);
    const double next = x - f / density;
    if (!std::isfinite(next) || next < lo_ || next > hi_) return bisect(p);
    x = next;
  }
  return x;
}

double TruncatedGaussian::bisect(double p) const {
  double a = std::isfinite(lo_) ? lo_ : std::min(hi_, center_) - 40.0 * sigma_;
  double b = std::isfinite(hi_) ? hi_ : std::max(lo_, center_) + 40.0 * sigma_;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    (cdf(mid) < p ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

TruncatedGaussian unit_conditional(double center, const ModelParams& params) {
  return TruncatedGaussian(center, params.sigma2(), 0.0, 1.0);
}

TruncatedGaussian halfline_conditional(double center, const ModelParams& params) {
  return TruncatedGaussian(center, params.sigma2(), 0.0, kInf);
}

FoldedGaussian::FoldedGaussian(double center, double variance)
    : center_(center), sigma_(std::sqrt(variance)) {
  if (!(center >= 0.0) || !std::isfinite(center)) {
    throw std::invalid_argument("folded Gaussian center must be finite and nonnegative");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("variance must be positive and finite");
  }
}

double FoldedGaussian::pdf(double u) const {
  if (u < 0.0) return 0.0;
  return (normal_pdf((u - center_) / sigma_) + normal_pdf((u + center_) / sigma_)) / sigma_;
}

double FoldedGaussian::cdf(double u) const {
  if (!(u > 0.0)) return 0.0;
  if (u == kInf) return 1.0;
  const double a = (u - center_) / sigma_;
  const double b = -(u + center_) / sigma_;
  const double value =
      a <= 0.0 ? normal_cdf(a) - normal_cdf(b) : 1.0 - normal_sf(a) - normal_cdf(b);
  return std::clamp(value, 0.0, 1.0);
}

double FoldedGaussian::measure(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return 0.0;
  return std::max(cdf(hi) - cdf(lo), 0.0);
}

double FoldedGaussian::quantile(double p) const {
  if (std::isnan(p)) throw std::invalid_argument("quantile level is NaN");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return kInf;
  if (center_ == 0.0) {
    // |N(0, s^2)| is exactly the half-normal.
    return TruncatedGaussian(0.0, variance(), 0.0, kInf).quantile(p);
  }

  const double zp = normal_quantile(p);
  const double guess = std::max(0.0, center_ + sigma_ * zp);
  const double upper = center_ + sigma_ * (std::max(zp, 0.0) + 12.0);
  std::uintmax_t max_iter = 100;
  auto residual = [this, p](double u) { return std::make_pair(cdf(u) - p, pdf(u)); };
  return boost::math::tools::newton_raphson_iterate(residual, std::min(guess, upper), 0.0,
                                                    upper, 50, max_iter);
}

double marginal_density_pu(double x, const ModelParams& params) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("marginal density is defined on [0, 1]");
  }
  return 0.5 * (std::erf(params.a() * x) + std::erf(params.a() * (1.0 - x)));
}

double gaussian_tail_bound(double z, const ModelParams& params) {
  if (!(z > 0.0)) throw std::invalid_argument("tail bound needs z > 0");
  const double az = params.a() * z;
  return std::exp(-az * az) / (2.0 * std::sqrt(std::numbers::pi) * az);
}

}  // namespace gibbsmix
