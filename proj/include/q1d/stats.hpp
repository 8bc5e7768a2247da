#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace q1d::stats {

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased (n-1)
double std_error_of_mean(std::span<const double> v);
double skewness(std::span<const double> v);
double excess_kurtosis(std::span<const double> v);

struct LinearFit {
  double slope = 0, intercept = 0;
  double slope_se = 0, intercept_se = 0;
  double r2 = 0;
  double chi2_red = 0;  // meaningful only for the weighted fit
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);
LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma);
// y = slope * x; r2 is uncentered (1 - SS_res / sum y^2).
LinearFit fit_line_through_origin(std::span<const double> x, std::span<const double> y);

/** One-sample KS distance of samples against a CDF. */
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/** Two-sample KS distance and asymptotic p-value. */
struct KsTest {
  double distance = 0;
  double p_value = 0;
};
KsTest ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/** Jarque-Bera normality test; p-value from the chi^2(2) tail. */
KsTest jarque_bera(std::span<const double> samples);

/**
 * Realization-level bootstrap of a mean-like statistic. Draws `resamples`
 * index multisets from (seed) and returns the standard deviation of the
 * resampled statistic. `stat` maps per-realization weights (counts) to the
 * statistic value.
 */
double bootstrap_se(std::size_t n_realizations, std::size_t resamples, std::uint64_t seed,
                    const std::function<double(std::span<const std::uint32_t>)>& stat);

/** Bootstrap count matrices shared across estimators of one ensemble. */
std::vector<std::vector<std::uint32_t>> bootstrap_counts(std::size_t n, std::size_t resamples,
                                                         std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;  // size bins + 1
  std::vector<double> prob;   // normalized: sums to 1
  std::size_t samples = 0;
  double density(std::size_t bin) const {
    return prob[bin] / (edges[bin + 1] - edges[bin]);
  }
};

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi);

} // namespace q1d::stats
