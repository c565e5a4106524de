#pragma once

#include <functional>
#include <span>
#include <vector>

namespace geowalk::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);
/// Standard error of the mean for independent samples.
double standard_error(std::span<const double> xs);

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means (default: floor(sqrt(N)) batches).
double batch_means_stderr(std::span<const double> series, int batches = 0);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_n - G_m|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Standard deviation of the KS statistic under the null for effective
/// sample size n: 0.2603 / sqrt(n) (Kolmogorov distribution sd).
double ks_null_stddev(double effective_n);

}  // namespace geowalk::stats
