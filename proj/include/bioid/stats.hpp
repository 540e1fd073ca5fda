#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bioid::stats {

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
// p must lie in (0,1).
double inverse_normal_cdf(double p);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // unbiased, n-1 denominator; 0 for n < 2
};

MeanStd mean_std(std::span<const double> xs);

// Pearson correlation; empty when either variance is zero or n < 2.
std::optional<double> pearson(std::span<const double> xs,
                              std::span<const double> ys);

struct OlsLine {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y on x; empty when x has zero variance.
std::optional<OlsLine> ols_fit(std::span<const double> xs,
                               std::span<const double> ys);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long> counts;

  double bin_width() const {
    return counts.empty() ? 0.0
                          : (hi - lo) / static_cast<double>(counts.size());
  }
};

// Equal-width bins spanning [min, max] of the data. A degenerate range
// (all values equal) puts everything into the first bin.
Histogram histogram(std::span<const double> xs, int bins);

}  // namespace bioid::stats
