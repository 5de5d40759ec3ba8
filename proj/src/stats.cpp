#include "heatsheet/stats.hpp"

#include <algorithm>
#include <cmath>

#include "heatsheet/errors.hpp"

namespace heatsheet {

WilsonInterval wilson_interval(std::int64_t hits, std::int64_t trials, double z) {
  if (trials <= 0) throw DomainError("wilson_interval requires trials > 0");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double variance_se(double var, std::size_t n) {
  return var * std::sqrt(2.0 / static_cast<double>(n - 1));
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical_001(std::size_t n, std::size_t m) {
  // c(alpha) = sqrt(-ln(alpha/2)/2), alpha = 0.01.
  const double c = 1.6276236115189503;
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double chi_square_homogeneity(const std::vector<std::int64_t>& successes,
                              const std::vector<std::int64_t>& failures) {
  if (successes.size() != failures.size() || successes.empty()) {
    throw DomainError("chi_square_homogeneity: mismatched table");
  }
  double total_s = 0.0, total_f = 0.0;
  for (std::size_t i = 0; i < successes.size(); ++i) {
    total_s += static_cast<double>(successes[i]);
    total_f += static_cast<double>(failures[i]);
  }
  const double total = total_s + total_f;
  double stat = 0.0;
  for (std::size_t i = 0; i < successes.size(); ++i) {
    const double row = static_cast<double>(successes[i] + failures[i]);
    const double es = row * total_s / total;
    const double ef = row * total_f / total;
    const double ds = static_cast<double>(successes[i]) - es;
    const double df = static_cast<double>(failures[i]) - ef;
    stat += ds * ds / es + df * df / ef;
  }
  return stat;
}

Histogram make_histogram(const std::vector<double>& xs, double lo, double hi, int bins) {
  Histogram h;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0);
  for (int b = 0; b <= bins; ++b) {
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  }
  for (double x : xs) {
    int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

} // namespace heatsheet
