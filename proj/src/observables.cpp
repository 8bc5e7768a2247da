#include "q1d/observables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "q1d/error.hpp"
#include "q1d/parallel.hpp"
#include "q1d/rng.hpp"

namespace q1d {

namespace {

// Per-realization unit phasors exp(i phi) for a contiguous sample window.
std::vector<std::complex<double>> unit_phasors(const PhaseSamples& s) {
  std::vector<std::complex<double>> u(s.realizations * s.points());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = {std::cos(s.phi[k]), std::sin(s.phi[k])};
  return u;
}

void require_contiguous(const PhaseSamples& s, const char* who) {
  for (std::size_t p = 1; p < s.indices.size(); ++p)
    require(s.indices[p] == s.indices[p - 1] + 1,
            std::string(who) + ": needs a contiguous sample window");
}

std::vector<std::size_t> lags_for(const PhaseSamples& s, std::span<const double> separations) {
  const std::size_t pmax = s.points() - 1;
  std::vector<std::size_t> lags;
  if (separations.empty()) {
    for (std::size_t k = 0; k <= pmax; ++k) lags.push_back(k);
  } else {
    for (double sep : separations) {
      require(sep >= 0, "stationary_correlation: separations must be non-negative");
      const auto k = static_cast<std::size_t>(std::llround(sep / s.dz));
      require(k <= pmax, "stationary_correlation: separation exceeds the window");
      lags.push_back(k);
    }
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  }
  return lags;
}

} // namespace

PhaseSamples phase_samples(const PhononEnsemble& e, double t,
                           std::span<const std::size_t> indices, int threads) {
  require(e.basis != nullptr, "phase_samples: ensemble has no basis");
  require(!indices.empty(), "phase_samples: no points requested");
  const auto& grid = e.basis->grid();
  for (auto i : indices) require(i < grid.size(), "phase_samples: index out of range");

  PhaseSamples s;
  s.indices.assign(indices.begin(), indices.end());
  s.z.resize(indices.size());
  for (std::size_t p = 0; p < indices.size(); ++p) s.z[p] = grid.z(indices[p]);
  s.realizations = e.realizations;
  s.phi.resize(e.realizations * indices.size());
  s.time = t;
  s.dz = grid.dz();
  s.seed = e.seed;

  const std::size_t m = e.mode_count();
  std::vector<std::complex<double>> rot(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double ph = -e.basis->mode(j).omega * t;
    rot[j] = {std::cos(ph), std::sin(ph)};
  }
  parallel_for(e.realizations, threads, [&](std::size_t r) {
    std::vector<std::complex<double>> b(m);
    auto row = e.row(r);
    for (std::size_t j = 0; j < m; ++j) b[j] = row[j] * rot[j];
    phase_at_indices(*e.basis, b, s.indices,
                     std::span<double>(s.phi.data() + r * s.points(), s.points()));
  });
  return s;
}

PhaseSamples phase_samples(const std::vector<std::vector<double>>& fields,
                           const SpatialGrid& grid, std::span<const std::size_t> indices,
                           std::uint64_t seed) {
  require(!fields.empty(), "phase_samples: empty field ensemble");
  require(!indices.empty(), "phase_samples: no points requested");
  PhaseSamples s;
  s.indices.assign(indices.begin(), indices.end());
  s.z.resize(indices.size());
  for (std::size_t p = 0; p < indices.size(); ++p) {
    require(indices[p] < grid.size(), "phase_samples: index out of range");
    s.z[p] = grid.z(indices[p]);
  }
  s.realizations = fields.size();
  s.phi.resize(fields.size() * indices.size());
  s.dz = grid.dz();
  s.seed = seed;
  for (std::size_t r = 0; r < fields.size(); ++r) {
    require(fields[r].size() == grid.size(), "phase_samples: field/grid size mismatch");
    for (std::size_t p = 0; p < indices.size(); ++p) s.at(r, p) = fields[r][indices[p]];
  }
  return s;
}

std::vector<std::size_t> central_window_indices(const SpatialGrid& grid, double fraction) {
  require(fraction > 0 && fraction <= 1.0, "central_window_indices: fraction in (0,1]");
  const auto n = grid.size();
  auto w = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  w = std::clamp<std::size_t>(w, 2, n);
  const std::size_t lo = (n - w) / 2;
  std::vector<std::size_t> idx(w);
  std::iota(idx.begin(), idx.end(), lo);
  return idx;
}

CorrelationMatrix phase_correlation_matrix(const PhaseSamples& s) {
  const std::size_t p = s.points();
  const std::size_t r_count = s.realizations;
  require(p >= 1 && r_count >= 2, "phase_correlation_matrix: need points and >= 2 realizations");
  CorrelationMatrix m;
  m.z = s.z;
  m.n = p;
  m.realizations = r_count;
  m.time = s.time;
  m.c.assign(p * p, {0.0, 0.0});
  m.se.assign(p * p, 0.0);
  const auto u = unit_phasors(s);
  for (std::size_t i = 0; i < p; ++i) {
    m.c[i * p + i] = {1.0, 0.0};
    for (std::size_t j = i + 1; j < p; ++j) {
      std::complex<double> sum{0, 0};
      double sum_re2 = 0;
      for (std::size_t r = 0; r < r_count; ++r) {
        const auto v = u[r * p + i] * std::conj(u[r * p + j]);
        sum += v;
        sum_re2 += v.real() * v.real();
      }
      const double n = static_cast<double>(r_count);
      const auto c = sum / n;
      // sample SE of the mean of Re exp(i dphi)
      const double var = std::max(0.0, (sum_re2 - n * c.real() * c.real()) / (n - 1.0));
      const double se = std::sqrt(var / n);
      m.c[i * p + j] = c;
      m.c[j * p + i] = std::conj(c);
      m.se[i * p + j] = se;
      m.se[j * p + i] = se;
    }
  }
  return m;
}

CorrelationCurve stationary_correlation(const PhaseSamples& s,
                                        std::span<const double> separations,
                                        std::size_t bootstrap_resamples) {
  require_contiguous(s, "stationary_correlation");
  require(s.points() >= 2 && s.realizations >= 2,
          "stationary_correlation: need a window and >= 2 realizations");
  const auto lags = lags_for(s, separations);
  const std::size_t p = s.points();
  const std::size_t rn = s.realizations;
  const auto u = unit_phasors(s);

  CorrelationCurve curve;
  curve.realizations = rn;
  curve.time = s.time;

  // per-realization window-averaged phasor product at each lag
  std::vector<std::complex<double>> per_r(rn);
  auto counts = bootstrap_resamples > 0
                    ? stats::bootstrap_counts(rn, bootstrap_resamples, s.seed ^ 0x5bd1e995ull)
                    : std::vector<std::vector<std::uint32_t>>{};
  for (auto k : lags) {
    const std::size_t npairs = p - k;
    for (std::size_t r = 0; r < rn; ++r) {
      std::complex<double> acc{0, 0};
      const auto* row = u.data() + r * p;
      for (std::size_t i = 0; i < npairs; ++i) acc += row[i] * std::conj(row[i + k]);
      per_r[r] = acc / static_cast<double>(npairs);
    }
    std::complex<double> tot{0, 0};
    for (const auto& v : per_r) tot += v;
    const double c = tot.real() / static_cast<double>(rn);
    double se = 0;
    if (!counts.empty()) {
      std::vector<double> vals(counts.size());
      for (std::size_t b = 0; b < counts.size(); ++b) {
        double acc = 0;
        const auto& cnt = counts[b];
        for (std::size_t r = 0; r < rn; ++r)
          if (cnt[r]) acc += static_cast<double>(cnt[r]) * per_r[r].real();
        vals[b] = acc / static_cast<double>(rn);
      }
      se = std::sqrt(stats::variance(vals));
    }
    curve.zbar.push_back(static_cast<double>(k) * s.dz);
    curve.c.push_back(c);
    curve.se.push_back(se);
  }
  return curve;
}

CorrelationCurve stationary_correlation(const PhononEnsemble& e, double t,
                                        double window_fraction,
                                        std::span<const double> separations,
                                        std::size_t bootstrap_resamples, int threads) {
  const auto idx = central_window_indices(e.basis->grid(), window_fraction);
  const auto s = phase_samples(e, t, idx, threads);
  return stationary_correlation(s, separations, bootstrap_resamples);
}

LightConeScan light_cone_scan(const PhononEnsemble& e, std::span<const double> times,
                              std::span<const double> separations, double window_fraction,
                              double settle_band, int threads) {
  require(times.size() >= 8, "light_cone_scan: need a time scan (>= 8 times)");
  require(!separations.empty(), "light_cone_scan: need separations");
  const auto idx = central_window_indices(e.basis->grid(), window_fraction);

  LightConeScan scan;
  scan.times.assign(times.begin(), times.end());
  const std::size_t nt = times.size();
  std::vector<CorrelationCurve> curves(nt);
  for (std::size_t it = 0; it < nt; ++it) {
    const auto s = phase_samples(e, times[it], idx, threads);
    curves[it] = stationary_correlation(s, separations, 100);
  }
  scan.zbar = curves.front().zbar;
  const std::size_t ns = scan.zbar.size();
  scan.c.resize(nt * ns);
  scan.se.resize(nt * ns);
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t is = 0; is < ns; ++is) {
      scan.c[it * ns + is] = curves[it].c[is];
      scan.se[it * ns + is] = curves[it].se[is];
    }

  // Long-time reference: mean over the last quarter of the scan.
  scan.c_longtime.assign(ns, 0.0);
  const std::size_t tail = std::max<std::size_t>(2, nt / 4);
  for (std::size_t is = 0; is < ns; ++is) {
    double acc = 0;
    for (std::size_t it = nt - tail; it < nt; ++it) acc += scan.c_at(it, is);
    scan.c_longtime[is] = acc / static_cast<double>(tail);
  }

  scan.t_star.assign(ns, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t is = 0; is < ns; ++is) {
    const double ref = scan.c_longtime[is];
    if (std::abs(ref) < 1e-3) continue;  // nothing to settle onto
    for (std::size_t it = 0; it < nt; ++it) {
      bool stays = true;
      for (std::size_t jt = it; jt < nt; ++jt)
        // band is relative to the reference, widened by the statistical
        // resolution of the point itself
        if (std::abs(scan.c_at(jt, is) - ref) >
            settle_band * std::abs(ref) + 2.0 * scan.se[jt * ns + is]) {
          stays = false;
          break;
        }
      if (stays) {
        scan.t_star[is] = times[it];
        break;
      }
    }
  }

  std::vector<double> xs, ys;
  for (std::size_t is = 0; is < ns; ++is)
    if (std::isfinite(scan.t_star[is]) && scan.t_star[is] > 0) {
      xs.push_back(scan.zbar[is]);
      ys.push_back(scan.t_star[is]);
    }
  if (xs.size() >= 3) {
    const auto fit = stats::fit_line_through_origin(xs, ys);
    scan.v_fit = 1.0 / fit.slope;
    scan.v_fit_se = fit.slope_se / (fit.slope * fit.slope);
    scan.r2 = fit.r2;
  }

  // Flatness of C beyond the horizon: max relative deviation from the
  // per-time plateau (mean over separations > 1.3 v t).
  double worst = 0;
  if (scan.v_fit > 0) {
    for (std::size_t it = 0; it < nt; ++it) {
      const double zmin = 1.3 * scan.v_fit * times[it];
      double acc = 0;
      std::size_t cnt = 0;
      for (std::size_t is = 0; is < ns; ++is)
        if (scan.zbar[is] > zmin) {
          acc += scan.c_at(it, is);
          ++cnt;
        }
      if (cnt < 2) continue;
      const double plateau = acc / static_cast<double>(cnt);
      // Once the plateau itself has decayed to the noise scale, relative
      // deviations measure nothing; judge flatness while it is resolvable.
      if (plateau <= 0.2) continue;
      for (std::size_t is = 0; is < ns; ++is)
        if (scan.zbar[is] > zmin)
          worst = std::max(worst, std::abs(scan.c_at(it, is) / plateau - 1.0));
    }
  }
  scan.horizon_flatness = worst;
  return scan;
}

double connected_from_moments(std::size_t order,
                              const std::function<double(std::uint32_t)>& moment) {
  require(order >= 1 && order <= 10, "connected_from_moments: order must be 1..10");
  const std::uint32_t full = (1u << order) - 1u;
  std::vector<double> kappa(full + 1, 0.0);
  std::vector<double> mom(full + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) mom[s] = moment(s);
  // m(S) = sum over subsets B of S containing the lowest element of S of
  // kappa(B) m(S \ B); inverted recursively for kappa.
  for (std::uint32_t s = 1; s <= full; ++s) {
    const std::uint32_t low = s & (~s + 1u);
    const std::uint32_t rest = s & ~low;
    double acc = 0;
    // iterate proper subsets t of rest; B = low | t, complement = rest \ t
    for (std::uint32_t t = rest; ; t = (t - 1) & rest) {
      const std::uint32_t b = low | t;
      if (b != s) acc += kappa[b] * mom[s & ~b];
      if (t == 0) break;
    }
    kappa[s] = mom[s] - acc;
  }
  return kappa[full];
}

NPointResult npoint_phase_correlation(const PhaseSamples& s,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      std::size_t bootstrap_resamples) {
  const std::size_t n = pairs.size();
  require(n >= 1 && n <= 10, "npoint_phase_correlation: order must be 1..10");
  const std::size_t rn = s.realizations;

  // phase differences per realization
  std::vector<std::size_t> ia(n), ib(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto za = pairs[i].first;
    const auto zb = pairs[i].second;
    auto find = [&](double z) {
      std::size_t best = 0;
      double dist = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < s.points(); ++p) {
        const double d = std::abs(s.z[p] - z);
        if (d < dist) {
          dist = d;
          best = p;
        }
      }
      require(dist <= 0.51 * s.dz, "npoint_phase_correlation: coordinate off the sample grid");
      return best;
    };
    ia[i] = find(za);
    ib[i] = find(zb);
  }

  // per-realization products over every index subset (incremental masks)
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<double> x(n);
  std::vector<double> prod(full + 1);
  std::vector<double> sums(full + 1, 0.0);
  std::vector<double> per_r_full(rn);
  std::vector<std::vector<double>> per_r_sub;  // for bootstrap: subset sums per realization
  const bool boot = bootstrap_resamples > 0 && rn >= 16;
  if (boot) per_r_sub.assign(full + 1, std::vector<double>(rn));
  for (std::size_t r = 0; r < rn; ++r) {
    for (std::size_t i = 0; i < n; ++i) x[i] = s.at(r, ia[i]) - s.at(r, ib[i]);
    prod[0] = 1.0;
    for (std::uint32_t m = 1; m <= full; ++m) {
      const std::uint32_t low = m & (~m + 1u);
      const int bit = std::countr_zero(low);
      prod[m] = prod[m & ~low] * x[static_cast<std::size_t>(bit)];
    }
    per_r_full[r] = prod[full];
    for (std::uint32_t m = 1; m <= full; ++m) {
      sums[m] += prod[m];
      if (boot) per_r_sub[m][r] = prod[m];
    }
  }
  const double rnn = static_cast<double>(rn);
  auto moment_of = [&](std::uint32_t m) { return sums[m] / rnn; };

  NPointResult res;
  res.order = static_cast<int>(n);
  res.full = moment_of(full);
  res.connected = connected_from_moments(n, moment_of);
  res.disconnected = res.full - res.connected;

  if (boot) {
    auto counts = stats::bootstrap_counts(rn, bootstrap_resamples, s.seed ^ 0x4ec4ec4ull);
    std::vector<double> vals(counts.size());
    std::vector<double> msub(full + 1);
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const auto& cnt = counts[b];
      for (std::uint32_t m = 1; m <= full; ++m) {
        double acc = 0;
        const auto& col = per_r_sub[m];
        for (std::size_t r = 0; r < rn; ++r)
          if (cnt[r]) acc += static_cast<double>(cnt[r]) * col[r];
        msub[m] = acc / rnn;
      }
      vals[b] = connected_from_moments(n, [&](std::uint32_t m) { return msub[m]; });
    }
    res.connected_se = std::sqrt(stats::variance(vals));
  }
  return res;
}

namespace {

ContrastStatistics contrast_core(const PhaseSamples& s, double integration_length,
                                 std::size_t bins) {
  require_contiguous(s, "contrast_fdf");
  const std::size_t p = s.points();
  auto npts = static_cast<std::size_t>(std::llround(integration_length / s.dz));
  require(npts >= 4, "contrast_fdf: integration length too short for the grid");
  require(npts <= p, "contrast_fdf: integration length exceeds the sample window");
  const std::size_t lo = (p - npts) / 2;

  ContrastStatistics cs;
  cs.length = static_cast<double>(npts) * s.dz;
  cs.c2.resize(s.realizations);
  cs.phase.resize(s.realizations);
  for (std::size_t r = 0; r < s.realizations; ++r) {
    std::complex<double> a{0, 0};
    for (std::size_t i = lo; i < lo + npts; ++i) {
      const double ph = s.at(r, i);
      a += std::complex<double>{std::cos(ph), std::sin(ph)};
    }
    a *= s.dz;
    cs.c2[r] = std::norm(a) / (cs.length * cs.length);
    cs.phase[r] = std::arg(a);
  }
  cs.mean_c2 = stats::mean(cs.c2);
  cs.alpha.resize(s.realizations);
  for (std::size_t r = 0; r < s.realizations; ++r) cs.alpha[r] = cs.c2[r] / cs.mean_c2;
  const double hi = std::max(6.0, *std::max_element(cs.alpha.begin(), cs.alpha.end()) * 1.0001);
  cs.fdf = stats::histogram(cs.alpha, bins, 0.0, hi);
  return cs;
}

} // namespace

ContrastStatistics contrast_fdf(const PhaseSamples& window_samples, double integration_length,
                                std::size_t bins) {
  return contrast_core(window_samples, integration_length, bins);
}

ContrastStatistics contrast_fdf(const PhononEnsemble& e, double t, double integration_length,
                                std::size_t bins, int threads) {
  const auto& grid = e.basis->grid();
  auto npts = static_cast<std::size_t>(std::llround(integration_length / grid.dz()));
  require(npts <= grid.size(), "contrast_fdf: integration length exceeds the grid");
  const double fraction = std::max(1e-12, static_cast<double>(npts) / grid.size());
  const auto idx = central_window_indices(grid, std::min(1.0, fraction));
  const auto s = phase_samples(e, t, idx, threads);
  return contrast_core(s, integration_length, bins);
}

ContrastLengthCurve mean_sq_contrast_vs_length(const PhononEnsemble& e, double t,
                                               std::span<const double> lengths,
                                               std::size_t bootstrap_resamples, int threads) {
  require(!lengths.empty(), "mean_sq_contrast_vs_length: need lengths");
  const auto& grid = e.basis->grid();
  const double lmax = *std::max_element(lengths.begin(), lengths.end());
  auto pmax = static_cast<std::size_t>(std::llround(lmax / grid.dz()));
  require(pmax <= grid.size(), "mean_sq_contrast_vs_length: longest length exceeds the grid");
  const auto idx = central_window_indices(grid, static_cast<double>(pmax) / grid.size());
  const auto s = phase_samples(e, t, idx, threads);
  const std::size_t p = s.points();

  // prefix sums of unit phasors per realization: A over any window in O(1)
  const auto u = unit_phasors(s);
  std::vector<std::complex<double>> prefix((p + 1) * s.realizations);
  for (std::size_t r = 0; r < s.realizations; ++r) {
    auto* pre = prefix.data() + r * (p + 1);
    pre[0] = {0, 0};
    for (std::size_t i = 0; i < p; ++i) pre[i + 1] = pre[i] + u[r * p + i];
  }

  ContrastLengthCurve curve;
  auto counts = bootstrap_resamples > 0
                    ? stats::bootstrap_counts(s.realizations, bootstrap_resamples,
                                              s.seed ^ 0xc2b2ae35ull)
                    : std::vector<std::vector<std::uint32_t>>{};
  std::vector<double> per_r(s.realizations);
  for (double lreq : lengths) {
    auto npts = static_cast<std::size_t>(std::llround(lreq / s.dz));
    npts = std::clamp<std::size_t>(npts, 4, p);
    const std::size_t lo = (p - npts) / 2;
    const double len = static_cast<double>(npts) * s.dz;
    for (std::size_t r = 0; r < s.realizations; ++r) {
      const auto* pre = prefix.data() + r * (p + 1);
      const auto a = (pre[lo + npts] - pre[lo]) * s.dz;
      per_r[r] = std::norm(a) / (len * len);
    }
    curve.length.push_back(len);
    curve.mean_c2.push_back(stats::mean(per_r));
    double se = 0;
    if (!counts.empty()) {
      std::vector<double> vals(counts.size());
      for (std::size_t b = 0; b < counts.size(); ++b) {
        double acc = 0;
        for (std::size_t r = 0; r < s.realizations; ++r)
          if (counts[b][r]) acc += static_cast<double>(counts[b][r]) * per_r[r];
        vals[b] = acc / static_cast<double>(s.realizations);
      }
      se = std::sqrt(stats::variance(vals));
    }
    curve.se.push_back(se);
  }

  // Crossover: intersect the small-L plateau with the 1/L-like tail fit.
  const std::size_t nl = curve.length.size();
  if (nl >= 4) {
    const double plateau = 0.5 * (curve.mean_c2[0] + curve.mean_c2[1]);
    const std::size_t tail = std::max<std::size_t>(3, nl / 3);
    std::vector<double> lx, ly;
    for (std::size_t i = nl - tail; i < nl; ++i)
      if (curve.mean_c2[i] > 0) {
        lx.push_back(std::log(curve.length[i]));
        ly.push_back(std::log(curve.mean_c2[i]));
      }
    if (lx.size() >= 3 && plateau > 0) {
      const auto fit = stats::fit_line(lx, ly);
      if (fit.slope < -0.1)
        curve.crossover_length = std::exp((std::log(plateau) - fit.intercept) / fit.slope);
    }
  }
  return curve;
}

PhaseDiffFdf phase_diff_fdf(const PhaseSamples& s, double separation, std::size_t bins,
                            double lo, double hi) {
  require_contiguous(s, "phase_diff_fdf");
  const auto k = static_cast<std::size_t>(std::llround(separation / s.dz));
  require(k >= 1 && k < s.points(), "phase_diff_fdf: separation outside the window");
  PhaseDiffFdf f;
  f.separation = static_cast<double>(k) * s.dz;
  f.samples.reserve(s.realizations * (s.points() - k));
  for (std::size_t r = 0; r < s.realizations; ++r)
    for (std::size_t p = 0; p + k < s.points(); ++p)
      f.samples.push_back(s.at(r, p) - s.at(r, p + k));
  f.hist = stats::histogram(f.samples, bins, lo, hi);
  return f;
}

PolarHistogram joint_contrast_phase_histogram(const ContrastStatistics& cs,
                                              std::size_t phase_bins, std::size_t alpha_bins) {
  require(phase_bins >= 2 && alpha_bins >= 2, "joint histogram: need >= 2 bins per axis");
  PolarHistogram h;
  const double pi = 3.14159265358979323846;
  h.phase_edges.resize(phase_bins + 1);
  for (std::size_t b = 0; b <= phase_bins; ++b)
    h.phase_edges[b] = -pi + 2.0 * pi * static_cast<double>(b) / static_cast<double>(phase_bins);
  const double amax = *std::max_element(cs.alpha.begin(), cs.alpha.end()) * 1.0001;
  h.alpha_edges.resize(alpha_bins + 1);
  for (std::size_t b = 0; b <= alpha_bins; ++b)
    h.alpha_edges[b] = amax * static_cast<double>(b) / static_cast<double>(alpha_bins);
  h.prob.assign(phase_bins * alpha_bins, 0.0);
  for (std::size_t r = 0; r < cs.alpha.size(); ++r) {
    auto pb = static_cast<std::size_t>((cs.phase[r] + pi) / (2.0 * pi) *
                                       static_cast<double>(phase_bins));
    auto ab = static_cast<std::size_t>(cs.alpha[r] / amax * static_cast<double>(alpha_bins));
    pb = std::min(pb, phase_bins - 1);
    ab = std::min(ab, alpha_bins - 1);
    h.prob[pb * alpha_bins + ab] += 1.0;
  }
  for (double& v : h.prob) v /= static_cast<double>(cs.alpha.size());
  return h;
}

} // namespace q1d
