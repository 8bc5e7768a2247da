#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "q1d/constants.hpp"
#include "q1d/ensembles.hpp"
#include "q1d/error.hpp"
#include "q1d/fitting.hpp"
#include "q1d/grid.hpp"
#include "q1d/modes.hpp"
#include "q1d/scales.hpp"
#include "q1d/tof.hpp"

using namespace q1d;

namespace {

GasParameters rb_box() {
  GasParameters p;
  p.atom_mass = 1.44316060e-25;
  p.scattering_length = 5.2e-9;
  p.omega_perp = 2.0 * constants::pi * 3000.0;
  p.geometry = TrapGeometry::box;
  p.box_length = 100e-6;
  p.density = 50e6;
  p.temperature = 60e-9;
  return p;
}

// power-law table: log-log interpolation reproduces it exactly everywhere
CalibrationTable power_law_table() {
  std::vector<double> t{20e-9, 40e-9, 80e-9, 160e-9};
  std::vector<double> lam(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) lam[i] = 320e-15 / t[i];  // um nK / T
  return CalibrationTable(t, lam);
}

RippleCurve gaussian_bump_curve(double temperature, double se) {
  RippleCurve c;
  const double amp = 0.1 * temperature / 100e-9;
  for (int i = 0; i <= 20; ++i) {
    const double x = 0.5e-6 * i;
    c.x.push_back(x);
    c.g2.push_back(1.0 + amp * std::exp(-x * x / 9e-12));
    c.se.push_back(se);
  }
  c.mean_density = 50e6;
  c.realizations = 400;
  return c;
}

} // namespace

TEST_SUITE("fitting") {

TEST_CASE("exponential decay fit: exact recovery and contrast masking") {
  std::vector<double> z, c, se;
  for (int i = 0; i <= 30; ++i) {
    z.push_back(1e-6 * i);
    c.push_back(0.9 * std::exp(-z.back() / 5e-6));
    se.push_back(0.01 + 0.002 * (i % 3));  // uneven weights must not bias exact data
  }
  const auto fit = fit_exponential_decay(z, c, se);
  CHECK(fit.decay_length == doctest::Approx(5e-6).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.residual_rms < 1e-9);
  // c < 0.05 is masked: z > 5e-6 * ln(18) = 14.45 um drops out
  std::size_t expected_used = 0;
  for (double v : c)
    if (v >= 0.05 && v <= 0.95) ++expected_used;
  CHECK(fit.points_used == expected_used);

  // custom contrast window
  const auto narrow = fit_exponential_decay(z, c, se, 0.2, 0.6);
  std::size_t expected_narrow = 0;
  for (double v : c)
    if (v >= 0.2 && v <= 0.6) ++expected_narrow;
  CHECK(narrow.points_used == expected_narrow);
  CHECK(narrow.decay_length == doctest::Approx(5e-6).epsilon(1e-9));

  // a non-exponential curve reports structured residuals
  std::vector<double> bent(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    bent[i] = 0.9 * std::exp(-z[i] * z[i] / 64e-12);
  const auto gauss = fit_exponential_decay(z, bent, se);
  CHECK(gauss.residual_rms > 0.1);
}

TEST_CASE("calibration table: exact on a power law, round trips, guards") {
  const auto table = power_law_table();
  for (double t : {25e-9, 60e-9, 110e-9, 160e-9}) {
    CHECK(table.decay_length_for(t) == doctest::Approx(320e-15 / t).epsilon(1e-12));
    CHECK(table.temperature_for(table.decay_length_for(t)) == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK_FALSE(table.describe().empty());

  // ordering is part of the contract
  CHECK_THROWS_AS(CalibrationTable({40e-9, 20e-9}, {4e-6, 8e-6}), Error);
  CHECK_THROWS_AS(CalibrationTable({20e-9, 40e-9}, {4e-6, 8e-6}), Error);
  CHECK_THROWS_AS(CalibrationTable({20e-9}, {4e-6}), Error);
}

TEST_CASE("thermal calibration closed loop on a small table") {
  CalibrationSpec spec;
  spec.gas = rb_box();
  spec.grid_points = 256;
  spec.realizations = 150;
  spec.temperature_count = 4;
  spec.t_min = 30e-9;
  spec.t_max = 120e-9;
  const auto table = build_thermal_calibration(spec);
  REQUIRE(table.temperatures().size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(table.temperatures()[i] > table.temperatures()[i - 1]);
    CHECK(table.decay_lengths()[i] < table.decay_lengths()[i - 1]);
  }
  // relative-sector physics: lambda_C ~ lambda_T / 2 = hbar^2 n / (m kB T)
  const double expected = constants::hbar * constants::hbar * 50e6 /
                          (1.44316060e-25 * constants::kB * 60e-9);
  CHECK(table.decay_length_for(60e-9) == doctest::Approx(expected).epsilon(0.25));
}

TEST_CASE("effective temperature from a synthetic decay curve") {
  const auto table = power_law_table();
  const double t_true = 70e-9;
  const double lam = 320e-15 / t_true;
  CorrelationCurve curve;
  for (int i = 1; i <= 24; ++i) {
    curve.zbar.push_back(0.25e-6 * i);
    curve.c.push_back(std::exp(-curve.zbar.back() / lam));
    curve.se.push_back(0.01);
  }
  curve.realizations = 500;
  const auto rep = fit_teff_from_decay(curve, table);
  CHECK(rep.converged);
  CHECK(rep.estimate == doctest::Approx(t_true).epsilon(1e-6));
  CHECK(rep.ci_low <= rep.estimate);
  CHECK(rep.ci_high >= rep.estimate);
  CHECK_FALSE(rep.calibration.empty());
}

TEST_CASE("non-negative least squares: interior exactness, clamping, ridge convention") {
  // 4x3 system, x_true has an active zero
  const std::vector<double> a{1, 2, 0,  //
                              0, 1, 3,  //
                              2, 0, 1,  //
                              1, 1, 1};
  const std::vector<double> x_true{0.5, 0.0, 2.0};
  std::vector<double> b(4, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) b[r] += a[r * 3 + c] * x_true[c];
  const auto x = solve_nnls(4, 3, a, b);
  REQUIRE(x.size() == 3);
  for (int c = 0; c < 3; ++c) CHECK(x[c] == doctest::Approx(x_true[c]).epsilon(1e-10).scale(1.0));

  // all-negative target clamps to zero
  const std::vector<double> a1{1, 1};
  const std::vector<double> b1{-1, -2};
  const auto x1 = solve_nnls(2, 1, a1, b1);
  CHECK(x1[0] == 0.0);

  // ridge shrinkage: for A = I2, lambda = ridge * trace(I)/2 = ridge
  const std::vector<double> eye{1, 0, 0, 1};
  const std::vector<double> b2{2, 4};
  const auto x2 = solve_nnls(2, 2, eye, b2, 0.5);
  CHECK(x2[0] == doctest::Approx(2.0 / 1.5).epsilon(1e-12));
  CHECK(x2[1] == doctest::Approx(4.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("design weights match phase_norm^2 (f_a - f_b)^2 / 2 pair by pair") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto grid = SpatialGrid::centered(p.box_length, 128);
  const auto basis = build_box_basis(p.box_length, s, 16, grid);
  const std::vector<std::size_t> idx{10, 30, 77};
  const std::size_t m = 12;
  const auto w = gge_design_matrix(basis, idx, m);
  REQUIRE(w.size() == 3 * m);  // pairs (10,30), (10,77), (30,77)
  std::size_t row = 0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b, ++row)
      for (std::size_t j = 0; j < m; ++j) {
        const auto& mode = basis.mode(j);
        const double df = mode.profile[idx[a]] - mode.profile[idx[b]];
        CHECK(w[row * m + j] ==
              doctest::Approx(0.5 * mode.phase_norm * mode.phase_norm * df * df)
                  .epsilon(1e-12));
      }
}

TEST_CASE("occupation solver inverts its own forward model exactly at ridge 0") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto grid = SpatialGrid::centered(p.box_length, 256);
  const auto basis = build_box_basis(p.box_length, s, 12, grid);
  std::vector<std::size_t> idx;
  for (std::size_t i = 64; i < 192; i += 8) idx.push_back(i);

  GgeOptions opt;
  opt.mode_count = 9;
  opt.ridge = 0.0;
  std::vector<double> n_true(opt.mode_count);
  for (std::size_t j = 0; j < opt.mode_count; ++j)
    n_true[j] = 5e4 / static_cast<double>(j + 1) * (j % 2 ? 0.4 : 1.3);

  const auto w = gge_design_matrix(basis, idx, opt.mode_count);
  const std::size_t rows = w.size() / opt.mode_count;
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < opt.mode_count; ++j)
      y[r] += w[r * opt.mode_count + j] * n_true[j];
  const std::vector<char> mask(rows, 1);
  const auto n_hat = fit_gge_occupations(basis, idx, y, mask, opt);
  REQUIRE(n_hat.size() == opt.mode_count);
  for (std::size_t j = 0; j < opt.mode_count; ++j)
    CHECK(n_hat[j] == doctest::Approx(n_true[j]).epsilon(1e-8));
}

TEST_CASE("dephasing comb averages sin^2 to exactly 1/2 for every covered mode") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto grid = SpatialGrid::centered(p.box_length, 256);
  const auto basis = build_box_basis(p.box_length, s, 20, grid);
  const std::size_t count = 16;
  const auto times = dephasing_time_comb(basis, count);
  REQUIRE(times.size() == count);
  for (std::size_t j = 0; j < count; ++j) {
    double acc = 0;
    for (double t : times) {
      const double sn = std::sin(basis.mode(j).omega * t);
      acc += sn * sn;
    }
    CHECK(acc / static_cast<double>(count) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("sampled thermal closed loop recovers occupations within 10%") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  // The basis carries exactly the modes being fitted, as in production:
  // an unmodeled tail would leak into the top fitted coefficients.
  const auto basis = std::make_shared<const ModeBasis>(
      build_box_basis(p.box_length, s, 9, SpatialGrid::centered(p.box_length, 256)));
  const auto e = sample_thermal(basis, p.temperature, 3000, 2027);

  std::vector<std::size_t> idx;
  for (std::size_t i = 64; i < 192; i += 8) idx.push_back(i);
  const auto times = dephasing_time_comb(*basis, 16);

  GgeOptions opt;
  opt.mode_count = 9;
  const auto gge = fit_gge(e, s, times, idx, opt);
  REQUIRE(gge.modes == opt.mode_count);
  REQUIRE(gge.occupation.size() == opt.mode_count);
  CHECK(gge.pairs_used > 0);
  CHECK(gge.realizations == 3000);
  for (std::size_t j = 0; j < opt.mode_count; ++j) {
    const double expected = constants::kB * p.temperature / (constants::hbar * basis->mode(j).omega);
    CHECK(std::abs(gge.occupation[j] - expected) / expected < 0.10);
    CHECK(gge.se[j] > 0.0);
    CHECK(gge.shot_noise[j] > 0.0);
    CHECK_FALSE(gge.squeezed[j]);  // thermal at 60 nK sits well above shot noise
  }
}

TEST_CASE("grid-scan thermometry: exact vertex, boundary and flat flags") {
  const double se = 0.01;
  const auto forward = [&](double t) { return gaussian_bump_curve(t, se); };
  std::vector<double> grid;
  for (double t = 60e-9; t <= 140.5e-9; t += 5e-9) grid.push_back(t);

  const auto rep = fit_temperature_ripples(gaussian_bump_curve(100e-9, se), grid, forward);
  CHECK(rep.converged);
  CHECK(rep.estimate == doctest::Approx(100e-9).epsilon(1e-6));
  CHECK(rep.ci_low < 100e-9);
  CHECK(rep.ci_high > 100e-9);
  CHECK(rep.objective < 1e-12);

  // truth outside the scanned range: minimum on the boundary, flagged
  const auto edge = fit_temperature_ripples(gaussian_bump_curve(200e-9, se), grid, forward);
  CHECK_FALSE(edge.converged);
  CHECK_FALSE(edge.diagnostic.empty());

  // error bars so large the objective cannot distinguish anything: flagged
  const auto flat = fit_temperature_ripples(gaussian_bump_curve(100e-9, 1e3), grid,
                                            [&](double t) { return gaussian_bump_curve(t, 1e3); });
  CHECK_FALSE(flat.converged);
  CHECK_FALSE(flat.diagnostic.empty());
}

} // TEST_SUITE
