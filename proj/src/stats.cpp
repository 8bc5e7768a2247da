#include "q1d/stats.hpp"

#include <algorithm>
#include <cmath>

#include "q1d/error.hpp"
#include "q1d/parallel.hpp"
#include "q1d/rng.hpp"

namespace q1d::stats {

double mean(std::span<const double> v) {
  require(!v.empty(), "stats: empty sample");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  require(v.size() >= 2, "stats: variance needs two samples");
  const double m = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return pairwise_sum(std::span<const double>(sq)) / static_cast<double>(v.size() - 1);
}

double std_error_of_mean(std::span<const double> v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

namespace {
double central_moment(std::span<const double> v, int k) {
  const double m = mean(v);
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::pow(v[i] - m, k);
  return pairwise_sum(std::span<const double>(p)) / static_cast<double>(v.size());
}
} // namespace

double skewness(std::span<const double> v) {
  const double m2 = central_moment(v, 2);
  return central_moment(v, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> v) {
  const double m2 = central_moment(v, 2);
  return central_moment(v, 4) / (m2 * m2) - 3.0;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line: need matching x/y, n >= 2");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  require(det > 0, "fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  double ss_res = 0, ss_tot = 0;
  const double ym = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
    ss_tot += (y[i] - ym) * (y[i] - ym);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  const double s2 = x.size() > 2 ? ss_res / (n - 2.0) : 0.0;
  f.slope_se = std::sqrt(s2 * n / det);
  f.intercept_se = std::sqrt(s2 * sxx / det);
  return f;
}

LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma) {
  require(x.size() == y.size() && x.size() == sigma.size() && x.size() >= 2,
          "fit_line_weighted: need matching x/y/sigma, n >= 2");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(sigma[i] > 0, "fit_line_weighted: sigma must be positive");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  require(det > 0, "fit_line_weighted: degenerate abscissae");
  LinearFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  f.slope_se = std::sqrt(sw / det);
  f.intercept_se = std::sqrt(sxx / det);
  double chi2 = 0, ss_res = 0, ss_tot = 0, ym = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ym += y[i];
  ym /= static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    chi2 += (r / sigma[i]) * (r / sigma[i]);
    ss_res += r * r;
    ss_tot += (y[i] - ym) * (y[i] - ym);
  }
  f.chi2_red = x.size() > 2 ? chi2 / (static_cast<double>(x.size()) - 2.0) : 0.0;
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

LinearFit fit_line_through_origin(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && !x.empty(), "fit_line_through_origin: need matching x/y");
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  require(sxx > 0, "fit_line_through_origin: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.slope * x[i];
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 1)
    f.slope_se = std::sqrt(ss_res / (static_cast<double>(x.size()) - 1.0) / sxx);
  return f;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), "ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1.0;
  double q = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    q += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsTest ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  KsTest t;
  t.distance = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  t.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return t;
}

KsTest jarque_bera(std::span<const double> samples) {
  require(samples.size() >= 8, "jarque_bera: too few samples");
  const double n = static_cast<double>(samples.size());
  const double s = skewness(samples);
  const double k = excess_kurtosis(samples);
  KsTest t;
  t.distance = n / 6.0 * (s * s + 0.25 * k * k);
  t.p_value = std::exp(-0.5 * t.distance);  // chi^2(2) survival
  return t;
}

std::vector<std::vector<std::uint32_t>> bootstrap_counts(std::size_t n, std::size_t resamples,
                                                         std::uint64_t seed) {
  require(n >= 2, "bootstrap: need at least two realizations");
  std::vector<std::vector<std::uint32_t>> counts(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng(stream_seed(seed ^ 0xb00757ull, b));
    auto& c = counts[b];
    c.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
      ++c[std::min(k, n - 1)];
    }
  }
  return counts;
}

double bootstrap_se(std::size_t n_realizations, std::size_t resamples, std::uint64_t seed,
                    const std::function<double(std::span<const std::uint32_t>)>& stat) {
  auto counts = bootstrap_counts(n_realizations, resamples, seed);
  std::vector<double> vals(resamples);
  for (std::size_t b = 0; b < resamples; ++b)
    vals[b] = stat(std::span<const std::uint32_t>(counts[b]));
  return std::sqrt(variance(vals) * (static_cast<double>(resamples) - 1.0) /
                   static_cast<double>(resamples));
}

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
  require(!samples.empty(), "histogram: empty sample");
  require(bins >= 2 && hi > lo, "histogram: bad binning");
  Histogram h;
  h.samples = samples.size();
  h.edges.resize(bins + 1);
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + w * static_cast<double>(b);
  h.prob.assign(bins, 0.0);
  for (double x : samples) {
    if (x < lo || x >= hi) continue;  // clipped mass is excluded before normalization
    auto b = static_cast<std::size_t>((x - lo) / w);
    if (b >= bins) b = bins - 1;
    h.prob[b] += 1.0;
  }
  double total = 0;
  for (double p : h.prob) total += p;
  require(total > 0, "histogram: all samples outside range");
  for (double& p : h.prob) p /= total;
  return h;
}

} // namespace q1d::stats
