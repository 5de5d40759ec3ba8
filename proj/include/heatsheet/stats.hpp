#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace heatsheet {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Score interval for a binomial proportion, z = 1.96 at 95%.
WilsonInterval wilson_interval(std::int64_t hits, std::int64_t trials, double z = 1.959963984540054);

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs); // unbiased
// Standard error of the sample variance under approximate normality.
double variance_se(double var, std::size_t n);

// One-sample Kolmogorov-Smirnov statistic against a CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

// Critical value c(alpha) * sqrt((n+m)/(n m)) at alpha = 0.01.
double ks_two_sample_critical_001(std::size_t n, std::size_t m);

// Pearson chi-square homogeneity statistic for a k x 2 table of
// (successes, failures) per row.
double chi_square_homogeneity(const std::vector<std::int64_t>& successes,
                              const std::vector<std::int64_t>& failures);

struct Histogram {
  std::vector<double> edges;        // size bins+1
  std::vector<std::int64_t> counts; // size bins
};

Histogram make_histogram(const std::vector<double>& xs, double lo, double hi, int bins);

} // namespace heatsheet
