#include "bioid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bioid::stats {

namespace {

double horner(const double* coeffs, int n, double x) {
  double acc = coeffs[n - 1];
  for (int i = n - 2; i >= 0; --i) acc = acc * x + coeffs[i];
  return acc;
}

}  // namespace

// Wichura's algorithm AS 241, routine PPND16 (~1e-16 relative accuracy).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
  }

  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                      2.05319162663775882187e0,
      1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, 8, r) / horner(b, 8, r);
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner(c, 8, r) / horner(d, 8, r);
  } else {
    r -= 5.0;
    value = horner(e, 8, r) / horner(f, 8, r);
  }
  return (q < 0.0) ? -value : value;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs) {
    const double dv = x - out.mean;
    ss += dv * dv;
  }
  out.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return out;
}

std::optional<double> pearson(std::span<const double> xs,
                              std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) return std::nullopt;
  const double mx = mean_std(xs).mean;
  const double my = mean_std(ys).mean;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<OlsLine> ols_fit(std::span<const double> xs,
                               std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) return std::nullopt;
  const double mx = mean_std(xs).mean;
  const double my = mean_std(ys).mean;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  OlsLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  return line;
}

Histogram histogram(std::span<const double> xs, int bins) {
  if (bins < 2) throw std::invalid_argument("histogram: bins must be >= 2");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  if (xs.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  h.lo = *lo_it;
  h.hi = *hi_it;
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double x : xs) {
    int idx = 0;
    if (width > 0.0) {
      idx = static_cast<int>((x - h.lo) / width);
      idx = std::clamp(idx, 0, bins - 1);
    }
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

}  // namespace bioid::stats
