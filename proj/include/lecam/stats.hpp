#pragma once

#include <cstddef>
#include <vector>

namespace lecam {

// Welford running mean/variance.
struct RunningStat {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const {  // sample variance
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  }
  double std_error() const;
};

struct MeanEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanEstimate summarize(const std::vector<double>& samples);

// Ordinary least squares y = intercept + slope * x, with the usual
// residual-based standard error of the slope and a 95% normal interval.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  std::size_t n_points = 0;
};

LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double x);

// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)| and the
// large-sample critical value at level alpha.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical(double alpha, std::size_t n, std::size_t m);

// Pearson correlation.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lecam
