#include "lecam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lecam {

double RunningStat::std_error() const {
  return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

MeanEstimate summarize(const std::vector<double>& samples) {
  RunningStat s;
  for (double x : samples) s.add(x);
  return {s.mean, s.std_error(), s.n};
}

LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("ols needs at least 2 matched points");
  }
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) {
    throw std::invalid_argument("ols needs non-degenerate abscissae");
  }
  LineFit fit;
  fit.n_points = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.slope_std_error =
      m > 2 ? std::sqrt(rss / static_cast<double>(m - 2) / sxx) : 0.0;
  fit.slope_lo = fit.slope - 1.96 * fit.slope_std_error;
  fit.slope_hi = fit.slope + 1.96 * fit.slope_std_error;
  return fit;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks statistic needs nonempty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0 || m == 0) {
    throw std::invalid_argument("ks critical value needs alpha in (0,1), n,m >= 1");
  }
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("correlation needs at least 2 matched points");
  }
  const std::size_t m = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace lecam
