#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gibbsmix::stats {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error() const;
};

Moments moments(std::span<const double> xs);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample Kolmogorov-Smirnov statistic against a continuous cdf.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Asymptotic critical value c(level) * sqrt((n + m) / (n m)); supported
/// levels are 0.10, 0.05, 0.01 and 0.001.
double ks_critical_two_sample(double level, std::size_t n, std::size_t m);
double ks_critical_one_sample(double level, std::size_t n);

/// Empirical quantile (linear interpolation between order statistics).
double quantile(std::vector<double> xs, double q);

}  // namespace gibbsmix::stats
