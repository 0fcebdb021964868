#include "gibbsmix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbsmix::stats {
namespace {

double ks_coefficient(double level) {
  if (level == 0.10) return 1.224;
  if (level == 0.05) return 1.358;
  if (level == 0.01) return 1.628;
  if (level == 0.001) return 1.949;
  throw std::invalid_argument("unsupported Kolmogorov-Smirnov level");
}

}  // namespace

double Moments::standard_error() const {
  return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}

Moments moments(std::span<const double> xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  m.mean = mean;
  m.variance = xs.size() > 1 ? m2 / static_cast<double>(xs.size() - 1) : 0.0;
  return m;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_two_sample(double level, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return ks_coefficient(level) * std::sqrt((nn + mm) / (nn * mm));
}

double ks_critical_one_sample(double level, std::size_t n) {
  return ks_coefficient(level) / std::sqrt(static_cast<double>(n));
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace gibbsmix::stats
