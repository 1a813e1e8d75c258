#pragma once
// Small statistics toolkit: Gaussian tail functions, quantiles, a two-sample
// Kolmogorov-Smirnov test, and streaming moment accumulators.

#include <cstddef>
#include <vector>

namespace fieldperc::stats {

// Phi(x): standard normal CDF. normal_tail is the complement Phi-bar.
double normal_cdf(double x);
double normal_tail(double x);
double normal_pdf(double x);

// Inverse CDF, |error| < 1e-13 over p in (1e-300, 1-1e-16).
double normal_quantile(double p);

struct KsResult {
  double statistic;  // sup |F_a - F_b|
  double p_value;    // asymptotic, with small-sample correction
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Streaming mean/variance (Welford).
class Accumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance, n-1 denominator
  double se_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// sqrt(p(1-p)/n) for Bernoulli estimates.
double bernoulli_se(double p_hat, std::size_t n);

// Standard error of an empirical covariance of a centered Gaussian pair with
// Cov = cxy and variances cxx, cyy: sqrt((cxx*cyy + cxy^2)/n).
double gaussian_cov_se(double cxx, double cyy, double cxy, std::size_t n);

}  // namespace fieldperc::stats
