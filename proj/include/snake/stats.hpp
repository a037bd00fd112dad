#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace snake {

// Running mean/variance (Welford). Accumulation order is fixed by the caller.
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

Estimate mean_estimate(std::span<const double> xs);

// Least-squares fit y = a + b x; returns {a, b}.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> xs);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic p-value for the two-sample KS statistic.
double ks_pvalue(double statistic, std::size_t n, std::size_t m);

}  // namespace snake
