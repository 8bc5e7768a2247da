#include "q1d/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"
#include "q1d/modes.hpp"
#include "q1d/rng.hpp"

namespace q1d {

DecayFit fit_exponential_decay(std::span<const double> zbar, std::span<const double> c,
                               std::span<const double> se, double c_min, double c_max) {
  require(zbar.size() == c.size(), "fit_exponential_decay: zbar/c size mismatch");
  require(se.empty() || se.size() == c.size(), "fit_exponential_decay: se size mismatch");
  require(c_min > 0 && c_min < c_max, "fit_exponential_decay: needs 0 < c_min < c_max");

  std::vector<double> x, y, sigma;
  bool weighted = !se.empty();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] <= c_min || c[i] >= c_max) continue;
    x.push_back(zbar[i]);
    y.push_back(std::log(c[i]));
    if (weighted) {
      if (se[i] > 0)
        sigma.push_back(se[i] / c[i]);  // delta method: sigma_lnC = se / C
      else
        weighted = false;
    }
  }
  require(x.size() >= 4, "fit_exponential_decay: fewer than 4 points inside the decay window");

  const auto fit = weighted ? stats::fit_line_weighted(x, y, sigma) : stats::fit_line(x, y);
  require(fit.slope < 0, "fit_exponential_decay: correlation does not decay over the window");

  DecayFit d;
  d.amplitude = std::exp(fit.intercept);
  d.decay_length = -1.0 / fit.slope;
  d.decay_length_se = fit.slope_se / (fit.slope * fit.slope);
  d.r2 = fit.r2;
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    acc += r * r;
  }
  d.residual_rms = std::sqrt(acc / static_cast<double>(x.size()));
  d.points_used = x.size();
  return d;
}

CalibrationTable::CalibrationTable(std::vector<double> temperatures,
                                   std::vector<double> decay_lengths)
    : temperatures_(std::move(temperatures)), decay_lengths_(std::move(decay_lengths)) {
  require(temperatures_.size() == decay_lengths_.size() && temperatures_.size() >= 2,
          "CalibrationTable: needs >= 2 matched (T, lambda) rows");
  for (std::size_t i = 0; i < temperatures_.size(); ++i) {
    require(temperatures_[i] > 0 && decay_lengths_[i] > 0,
            "CalibrationTable: entries must be positive");
    if (i > 0) {
      require(temperatures_[i] > temperatures_[i - 1],
              "CalibrationTable: temperatures must be ascending");
      require(decay_lengths_[i] < decay_lengths_[i - 1],
              "CalibrationTable: decay length must fall with temperature");
    }
  }
}

namespace {

// Piecewise-linear in log-log, end segments extended for mild extrapolation.
double loglog_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x,
                     bool descending_x) {
  const double lx = std::log(x);
  std::size_t seg = 0;
  const std::size_t n = xs.size();
  if (!descending_x) {
    while (seg + 2 < n && x > xs[seg + 1]) ++seg;
  } else {
    while (seg + 2 < n && x < xs[seg + 1]) ++seg;
  }
  const double lx0 = std::log(xs[seg]), lx1 = std::log(xs[seg + 1]);
  const double ly0 = std::log(ys[seg]), ly1 = std::log(ys[seg + 1]);
  const double t = (lx - lx0) / (lx1 - lx0);
  return std::exp(ly0 + t * (ly1 - ly0));
}

} // namespace

double CalibrationTable::decay_length_for(double temperature) const {
  require(temperature > 0, "decay_length_for: temperature must be positive");
  return loglog_interp(temperatures_, decay_lengths_, temperature, false);
}

double CalibrationTable::temperature_for(double decay_length) const {
  require(decay_length > 0, "temperature_for: decay length must be positive");
  return loglog_interp(decay_lengths_, temperatures_, decay_length, true);
}

std::string CalibrationTable::describe() const {
  std::ostringstream os;
  os << "thermal decay-length table, " << temperatures_.size() << " temperatures in ["
     << temperatures_.front() * 1e9 << ", " << temperatures_.back() * 1e9 << "] nK";
  return os.str();
}

std::size_t resolved_start(std::span<const double> zbar, double box_length, std::size_t modes) {
  require(modes >= 1, "resolved_start: needs a non-empty basis");
  const double z_res = 2.0 * box_length / static_cast<double>(modes);
  std::size_t first = 0;
  while (first < zbar.size() && zbar[first] < z_res) ++first;
  require(first + 6 <= zbar.size(),
          "resolved_start: too few resolved separations; raise the mode count or widen the window");
  return first;
}

CalibrationTable build_thermal_calibration(const CalibrationSpec& spec, int threads) {
  require(spec.gas.geometry == TrapGeometry::box,
          "build_thermal_calibration: calibration runs on a box basis");
  require(spec.t_min > 0 && spec.t_max > spec.t_min,
          "build_thermal_calibration: needs 0 < t_min < t_max");
  require(spec.temperature_count >= 2, "build_thermal_calibration: needs >= 2 temperatures");
  require(spec.realizations >= 100, "build_thermal_calibration: needs >= 100 realizations");

  GasParameters gas = spec.gas;
  gas.temperature = spec.t_min;
  const auto scales = derive_scales(gas);
  const SpatialGrid grid = SpatialGrid::centered(gas.box_length, spec.grid_points);
  const std::size_t modes =
      spec.mode_count > 0
          ? spec.mode_count
          : default_mode_count(constants::pi * scales.sound_speed / gas.box_length,
                               scales.chemical_potential);
  auto basis = std::make_shared<const ModeBasis>(
      build_box_basis(gas.box_length, scales, modes, grid, FieldConvention::relative_sector));

  std::vector<double> temps(spec.temperature_count), lambdas(spec.temperature_count);
  const double ratio = spec.t_max / spec.t_min;
  for (std::size_t k = 0; k < spec.temperature_count; ++k) {
    const double frac =
        static_cast<double>(k) / static_cast<double>(spec.temperature_count - 1);
    temps[k] = spec.t_min * std::pow(ratio, frac);
    const auto ens = sample_thermal(basis, temps[k], spec.realizations,
                                    stream_seed(spec.seed, 0xca1 + k), {}, threads);
    const auto curve = stationary_correlation(ens, 0.0, 0.5, {}, 100, threads);
    // Below the top mode's wavelength the sampled correlation flattens
    // (the basis carries no shorter-range variance), so those separations
    // would drag the fit toward a spurious plateau at hot temperatures.
    const std::size_t first = resolved_start(curve.zbar, gas.box_length, modes);
    const auto fit = fit_exponential_decay(
        std::span<const double>(curve.zbar).subspan(first),
        std::span<const double>(curve.c).subspan(first),
        std::span<const double>(curve.se).subspan(first));
    lambdas[k] = fit.decay_length;
  }
  return CalibrationTable(std::move(temps), std::move(lambdas));
}

FitReport fit_teff_from_decay(const CorrelationCurve& curve, const CalibrationTable& calib) {
  require(curve.zbar.size() >= 6, "fit_teff_from_decay: curve too short");
  const double c0 = *std::max_element(curve.c.begin(), curve.c.end());
  const double cmin = *std::min_element(curve.c.begin(), curve.c.end());
  require(cmin <= c0 * std::exp(-1.0),
          "fit_teff_from_decay: curve does not decay by 1/e inside the window");

  const auto fit = fit_exponential_decay(curve.zbar, curve.c, curve.se);

  FitReport rep;
  rep.units = "K";
  rep.calibration = calib.describe();
  rep.estimate = calib.temperature_for(fit.decay_length);
  rep.ci_low = calib.temperature_for(fit.decay_length + fit.decay_length_se);
  rep.ci_high = calib.temperature_for(
      std::max(fit.decay_length - fit.decay_length_se, 0.1 * fit.decay_length));
  rep.objective = fit.residual_rms;
  rep.iterations = fit.points_used;

  const bool in_range = fit.decay_length <= calib.decay_lengths().front() &&
                        fit.decay_length >= calib.decay_lengths().back();
  rep.converged = fit.residual_rms < 0.1 && fit.r2 > 0.9 && in_range;
  if (!rep.converged) {
    if (!in_range)
      rep.diagnostic = "decay length outside the calibration range (extrapolated)";
    else
      rep.diagnostic = "residual structure above threshold: decay is not exponential";
  }
  return rep;
}

std::vector<double> solve_nnls(std::size_t rows, std::size_t cols, std::span<const double> a,
                               std::span<const double> b, double ridge) {
  require(rows >= 1 && cols >= 1, "solve_nnls: empty system");
  require(a.size() == rows * cols, "solve_nnls: matrix size mismatch");
  require(b.size() == rows, "solve_nnls: rhs size mismatch");
  require(ridge >= 0, "solve_nnls: ridge must be non-negative");

  const std::size_t arows = ridge > 0 ? rows + cols : rows;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(arows),
                                            static_cast<Eigen::Index>(cols));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arows));
  for (std::size_t r = 0; r < rows; ++r) {
    rhs(static_cast<Eigen::Index>(r)) = b[r];
    for (std::size_t c = 0; c < cols; ++c)
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r * cols + c];
  }
  if (ridge > 0) {
    const double lambda = ridge * (A.topRows(static_cast<Eigen::Index>(rows)).squaredNorm() /
                                   static_cast<double>(cols));
    const double s = std::sqrt(lambda);
    for (std::size_t c = 0; c < cols; ++c)
      A(static_cast<Eigen::Index>(rows + c), static_cast<Eigen::Index>(c)) = s;
  }

  // Lawson-Hanson active set.
  const auto n = static_cast<Eigen::Index>(cols);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(cols, false);
  Eigen::VectorXd w = A.transpose() * (rhs - A * x);
  const double tol = 1e-10 * std::max(1.0, w.cwiseAbs().maxCoeff());
  const std::size_t max_outer = 3 * cols + 30;

  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    w = A.transpose() * (rhs - A * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      std::vector<Eigen::Index> p;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)]) p.push_back(j);
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(p.size()));
      for (std::size_t k = 0; k < p.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(p[k]);
      Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(rhs);

      bool all_positive = true;
      for (Eigen::Index k = 0; k < z.size(); ++k)
        if (z(k) <= 0) all_positive = false;
      if (all_positive) {
        x.setZero();
        for (std::size_t k = 0; k < p.size(); ++k) x(p[k]) = z(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double zk = z(static_cast<Eigen::Index>(k));
        if (zk <= 0) {
          const double xk = x(p[k]);
          alpha = std::min(alpha, xk / (xk - zk));
        }
      }
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double zk = z(static_cast<Eigen::Index>(k));
        x(p[k]) += alpha * (zk - x(p[k]));
        if (x(p[k]) <= 1e-14) {
          x(p[k]) = 0;
          passive[static_cast<std::size_t>(p[k])] = false;
        }
      }
    }
  }

  std::vector<double> out(cols);
  for (std::size_t c = 0; c < cols; ++c) out[c] = std::max(0.0, x(static_cast<Eigen::Index>(c)));
  return out;
}

std::vector<double> gge_design_matrix(const ModeBasis& basis,
                                      std::span<const std::size_t> indices,
                                      std::size_t mode_count) {
  require(mode_count >= 1 && mode_count <= basis.size(),
          "gge_design_matrix: mode count exceeds the basis");
  const std::size_t p = indices.size();
  require(p >= 2, "gge_design_matrix: needs at least 2 points");
  for (auto i : indices)
    require(i < basis.grid().size(), "gge_design_matrix: index out of range");

  const std::size_t npairs = p * (p - 1) / 2;
  std::vector<double> w(npairs * mode_count);
  std::size_t row = 0;
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b, ++row)
      for (std::size_t j = 0; j < mode_count; ++j) {
        const auto& m = basis.mode(j);
        const double df = m.profile[indices[a]] - m.profile[indices[b]];
        w[row * mode_count + j] = 0.5 * m.phase_norm * m.phase_norm * df * df;
      }
  return w;
}

std::vector<double> fit_gge_occupations(const ModeBasis& basis,
                                        std::span<const std::size_t> indices,
                                        std::span<const double> variance_pairs,
                                        std::span<const char> mask,
                                        const GgeOptions& options) {
  const std::size_t p = indices.size();
  const std::size_t npairs = p * (p - 1) / 2;
  require(variance_pairs.size() == npairs, "fit_gge_occupations: pair count mismatch");
  require(mask.empty() || mask.size() == npairs, "fit_gge_occupations: mask size mismatch");

  const auto design = gge_design_matrix(basis, indices, options.mode_count);
  std::vector<double> a, b;
  a.reserve(design.size());
  for (std::size_t r = 0; r < npairs; ++r) {
    if (!mask.empty() && !mask[r]) continue;
    b.push_back(variance_pairs[r]);
    for (std::size_t j = 0; j < options.mode_count; ++j)
      a.push_back(design[r * options.mode_count + j]);
  }
  require(b.size() >= options.mode_count,
          "fit_gge_occupations: fewer usable pairs than modes to fit");
  return solve_nnls(b.size(), options.mode_count, a, b, options.ridge);
}

std::vector<double> dephasing_time_comb(const ModeBasis& basis, std::size_t count) {
  require(basis.geometry() == TrapGeometry::box,
          "dephasing_time_comb: exact combs exist only for the box frequency ladder");
  require(count >= 2, "dephasing_time_comb: needs at least 2 times");
  // Chebyshev angles: sin^2(omega_j t) averaged over the comb is exactly 1/2
  // for every mode with j not a multiple of 2*count, so the comb covers all
  // of the first 2*count - 1 modes of the ladder.
  const double period = constants::pi / basis.mode(0).omega;  // = L / c
  std::vector<double> times(count);
  for (std::size_t k = 0; k < count; ++k)
    times[k] = period * (static_cast<double>(k) + 0.5) / (2.0 * static_cast<double>(count));
  return times;
}

GgeOccupations fit_gge(const PhononEnsemble& ensemble, const DerivedScales& scales,
                       std::span<const double> times, std::span<const std::size_t> indices,
                       const GgeOptions& options, int threads) {
  require(ensemble.basis != nullptr, "fit_gge: ensemble has no basis");
  const auto& basis = *ensemble.basis;
  require(options.mode_count >= 1 && options.mode_count <= basis.size(),
          "fit_gge: mode count exceeds the basis");
  require(!times.empty(), "fit_gge: needs at least one evaluation time");
  const std::size_t p = indices.size();
  require(p >= 3, "fit_gge: needs at least 3 sample points");
  const std::size_t npairs = p * (p - 1) / 2;
  const std::size_t rn = ensemble.realizations;
  require(rn >= 100, "fit_gge: needs at least 100 realizations");
  const std::size_t blocks = std::min(options.jackknife_blocks, rn);
  const std::size_t nt = times.size();

  // Re <e^{i dphi}> accumulated per (time, pair), totals and per-block.
  std::vector<double> total(nt * npairs, 0.0);
  std::vector<double> block(blocks * nt * npairs, 0.0);
  std::vector<std::size_t> block_size(blocks, 0);
  for (std::size_t r = 0; r < rn; ++r) ++block_size[r * blocks / rn];

  for (std::size_t it = 0; it < nt; ++it) {
    const auto s = phase_samples(ensemble, times[it], indices, threads);
    for (std::size_t r = 0; r < rn; ++r) {
      const std::size_t bi = r * blocks / rn;
      std::size_t pair = 0;
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t bcol = a + 1; bcol < p; ++bcol, ++pair) {
          const double v = std::cos(s.at(r, a) - s.at(r, bcol));
          total[it * npairs + pair] += v;
          block[(bi * nt + it) * npairs + pair] += v;
        }
    }
  }

  // Comb-averaged variance per pair from a set of per-(time,pair) sums.
  const auto variance_from = [&](const std::function<double(std::size_t, std::size_t)>& c_of,
                                 std::vector<double>& y, std::vector<char>& mask) {
    y.assign(npairs, 0.0);
    mask.assign(npairs, 1);
    for (std::size_t pair = 0; pair < npairs; ++pair) {
      double acc = 0;
      for (std::size_t it = 0; it < nt; ++it) {
        const double c = c_of(it, pair);
        if (c <= options.contrast_floor) {
          mask[pair] = 0;
          break;
        }
        acc += -2.0 * std::log(c);
      }
      y[pair] = mask[pair] ? acc / static_cast<double>(nt) : 0.0;
    }
  };

  std::vector<double> y;
  std::vector<char> mask;
  variance_from(
      [&](std::size_t it, std::size_t pair) {
        return total[it * npairs + pair] / static_cast<double>(rn);
      },
      y, mask);
  const auto occ = fit_gge_occupations(basis, indices, y, mask, options);

  // Leave-block-out jackknife of the whole pipeline (variances + refit).
  std::vector<std::vector<double>> jack(blocks);
  for (std::size_t bi = 0; bi < blocks; ++bi) {
    const double rest = static_cast<double>(rn - block_size[bi]);
    std::vector<double> yb;
    std::vector<char> maskb;
    variance_from(
        [&](std::size_t it, std::size_t pair) {
          return (total[it * npairs + pair] - block[(bi * nt + it) * npairs + pair]) / rest;
        },
        yb, maskb);
    jack[bi] = fit_gge_occupations(basis, indices, yb, maskb, options);
  }

  GgeOccupations g;
  g.modes = options.mode_count;
  g.realizations = rn;
  g.occupation = occ;
  g.se.resize(options.mode_count);
  const double bf = static_cast<double>(blocks - 1) / static_cast<double>(blocks);
  for (std::size_t j = 0; j < options.mode_count; ++j) {
    double m = 0;
    for (const auto& v : jack) m += v[j];
    m /= static_cast<double>(blocks);
    double var = 0;
    for (const auto& v : jack) var += (v[j] - m) * (v[j] - m);
    g.se[j] = std::sqrt(bf * var);
  }

  const auto shot = shot_noise_occupations(basis, scales);
  g.shot_noise.assign(shot.begin(), shot.begin() + static_cast<std::ptrdiff_t>(g.modes));
  g.squeezed.resize(g.modes);
  for (std::size_t j = 0; j < g.modes; ++j)
    g.squeezed[j] = g.occupation[j] + 3.0 * g.se[j] < g.shot_noise[j];

  // rms residual over used pairs
  const auto design = gge_design_matrix(basis, indices, options.mode_count);
  double acc = 0;
  std::size_t used = 0;
  for (std::size_t pair = 0; pair < npairs; ++pair) {
    if (!mask[pair]) continue;
    double model = 0;
    for (std::size_t j = 0; j < options.mode_count; ++j)
      model += design[pair * options.mode_count + j] * occ[j];
    acc += (y[pair] - model) * (y[pair] - model);
    ++used;
  }
  g.residual_rms = used ? std::sqrt(acc / static_cast<double>(used)) : 0.0;
  g.pairs_used = used;
  return g;
}

FitReport fit_temperature_ripples(const RippleCurve& observed,
                                  std::span<const double> temperature_grid,
                                  const std::function<RippleCurve(double)>& forward_model) {
  require(temperature_grid.size() >= 5, "fit_temperature_ripples: needs >= 5 grid points");
  for (std::size_t i = 1; i < temperature_grid.size(); ++i)
    require(temperature_grid[i] > temperature_grid[i - 1],
            "fit_temperature_ripples: grid must be ascending");
  require(observed.x.size() >= 4, "fit_temperature_ripples: observed curve too short");

  const std::size_t nt = temperature_grid.size();
  std::vector<double> chi2(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto model = forward_model(temperature_grid[k]);
    require(model.x.size() == observed.x.size(),
            "fit_temperature_ripples: model curve has a different separation grid");
    double acc = 0;
    for (std::size_t i = 0; i < observed.x.size(); ++i) {
      const double var = observed.se[i] * observed.se[i] + model.se[i] * model.se[i];
      if (var <= 0) continue;
      const double d = observed.g2[i] - model.g2[i];
      acc += d * d / var;
    }
    chi2[k] = acc;
  }

  const std::size_t best =
      static_cast<std::size_t>(std::min_element(chi2.begin(), chi2.end()) - chi2.begin());

  FitReport rep;
  rep.units = "K";
  rep.calibration = "forward model on the same simulation pipeline";
  rep.objective = chi2[best];
  rep.iterations = nt;
  rep.estimate = temperature_grid[best];

  const double spread = *std::max_element(chi2.begin(), chi2.end()) - chi2[best];
  if (spread < 1.0) {
    rep.converged = false;
    rep.diagnostic = "flat chi^2 objective: input carries no usable ripple signal";
    rep.ci_low = temperature_grid.front();
    rep.ci_high = temperature_grid.back();
    return rep;
  }
  if (best == 0 || best + 1 == nt) {
    rep.converged = false;
    rep.diagnostic = "minimum at the search-grid boundary: widen the temperature grid";
    rep.ci_low = temperature_grid.front();
    rep.ci_high = temperature_grid.back();
    return rep;
  }

  // 68% interval: walk out to the chi^2 = min + 1 crossings.
  const double target = chi2[best] + 1.0;
  rep.ci_low = temperature_grid.front();
  for (std::size_t k = best; k-- > 0;) {
    if (chi2[k] >= target) {
      const double t = (target - chi2[k + 1]) / (chi2[k] - chi2[k + 1]);
      rep.ci_low = temperature_grid[k + 1] + t * (temperature_grid[k] - temperature_grid[k + 1]);
      break;
    }
  }
  rep.ci_high = temperature_grid.back();
  for (std::size_t k = best + 1; k < nt; ++k) {
    if (chi2[k] >= target) {
      const double t = (target - chi2[k - 1]) / (chi2[k] - chi2[k - 1]);
      rep.ci_high =
          temperature_grid[k - 1] + t * (temperature_grid[k] - temperature_grid[k - 1]);
      break;
    }
  }

  // Parabolic vertex through the three points around the minimum. When the
  // neighbours sit far above the min + 1 contour the quadratic model is pure
  // extrapolation, so only trust a vertex that stays inside the interval.
  {
    const double t0 = temperature_grid[best - 1], t1 = temperature_grid[best],
                 t2 = temperature_grid[best + 1];
    const double f0 = chi2[best - 1], f1 = chi2[best], f2 = chi2[best + 1];
    const double denom = (t1 - t0) * (f1 - f2) - (t1 - t2) * (f1 - f0);
    if (std::abs(denom) > 0) {
      const double vertex =
          t1 - 0.5 *
                   ((t1 - t0) * (t1 - t0) * (f1 - f2) - (t1 - t2) * (t1 - t2) * (f1 - f0)) /
                   denom;
      if (vertex >= rep.ci_low && vertex <= rep.ci_high) rep.estimate = vertex;
    }
  }

  rep.converged = true;
  return rep;
}

} // namespace q1d
