#ifndef ECOSHIFT_METRICS_HPP
#define ECOSHIFT_METRICS_HPP

#include <cmath>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "ecoshift/types.hpp"

namespace ecoshift {

/// Jain's fairness index (sum x)^2 / (n * sum x^2). For non-negative inputs
/// the range is [1/n, 1]. The all-zero vector is defined as perfectly equal
/// and maps to 1.
inline double jain_index(std::span<const double> improvements) {
  if (improvements.empty()) throw InvalidParamsError("jain_index needs n >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (double x : improvements) {
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) return 1.0;
  return (sum * sum) / (static_cast<double>(improvements.size()) * sum_sq);
}

struct ConfidenceInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Student-t confidence interval over a sample of repeat means. With fewer
/// than two samples the interval degenerates to [mean, mean].
inline ConfidenceInterval mean_confidence_interval(std::span<const double> samples,
                                                   double level = 0.98) {
  if (samples.empty()) throw InvalidParamsError("confidence interval needs n >= 1");
  double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  if (samples.size() < 2) return ConfidenceInterval{mean, mean, mean};

  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  boost::math::students_t dist(n - 1.0);
  double t = boost::math::quantile(dist, 1.0 - (1.0 - level) / 2.0);
  double half = t * sd / std::sqrt(n);
  return ConfidenceInterval{mean, mean - half, mean + half};
}

}  // namespace ecoshift

#endif  // ECOSHIFT_METRICS_HPP
