#include "geowalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "geowalk/errors.hpp"

namespace geowalk::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double batch_means_stderr(std::span<const double> series, int batches) {
  const std::size_t n = series.size();
  if (batches <= 0) batches = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  if (batches < 2 || n < static_cast<std::size_t>(2 * batches)) return standard_error(series);
  const std::size_t size = n / static_cast<std::size_t>(batches);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    means.push_back(mean(series.subspan(static_cast<std::size_t>(b) * size, size)));
  }
  return standard_error(means);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidParams("ks_statistic: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidParams("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_null_stddev(double effective_n) {
  // Kolmogorov distribution: E K = sqrt(pi/2) ln 2, E K^2 = pi^2 / 12.
  const double ln2 = std::log(2.0);
  const double sd = std::sqrt(M_PI * M_PI / 12.0 - M_PI / 2.0 * ln2 * ln2);
  return sd / std::sqrt(effective_n);
}

}  // namespace geowalk::stats
