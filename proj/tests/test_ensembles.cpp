#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "q1d/constants.hpp"
#include "q1d/dynamics.hpp"
#include "q1d/ensembles.hpp"
#include "q1d/error.hpp"
#include "q1d/grid.hpp"
#include "q1d/modes.hpp"
#include "q1d/scales.hpp"
#include "q1d/stats.hpp"

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

std::shared_ptr<const ModeBasis> make_basis(std::size_t modes, std::size_t points) {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto grid = SpatialGrid::centered(p.box_length, points);
  return std::make_shared<ModeBasis>(build_box_basis(p.box_length, s, modes, grid));
}

} // namespace

TEST_SUITE("ensembles") {

TEST_CASE("thermal ensemble: equipartition occupations and Gaussian quadratures") {
  const auto basis = make_basis(12, 128);
  const double t = 60e-9;
  const std::size_t r = 6000;
  const auto e = sample_thermal(basis, t, r, 11);
  REQUIRE(e.realizations == r);
  REQUIRE(e.amplitudes.size() == r * basis->size());

  const auto occ = mean_occupations(e);
  for (std::size_t j = 0; j < basis->size(); ++j) {
    const double expected = constants::kB * t / (constants::hbar * basis->mode(j).omega);
    // |a|^2 is exponentially distributed, so its SE is expected / sqrt(r).
    CHECK(std::abs(occ[j] - expected) < 5.0 * expected / std::sqrt(static_cast<double>(r)));
    std::vector<double> re(r), im(r);
    for (std::size_t k = 0; k < r; ++k) {
      re[k] = e.a(k, j).real();
      im[k] = e.a(k, j).imag();
    }
    // Energy sits half in each quadrature.
    const double half_se = 5.0 * expected * 0.5 * std::sqrt(2.0 / static_cast<double>(r));
    CHECK(std::abs(stats::variance(re) - 0.5 * expected) < half_se);
    CHECK(std::abs(stats::variance(im) - 0.5 * expected) < half_se);
    CHECK(std::abs(stats::mean(re)) < 5.0 * std::sqrt(0.5 * expected / static_cast<double>(r)));
    if (j == 0) {
      CHECK(stats::jarque_bera(re).p_value > 1e-4);
      CHECK(stats::jarque_bera(im).p_value > 1e-4);
    }
  }
}

TEST_CASE("vacuum option adds exactly half a quantum per mode") {
  const auto basis = make_basis(6, 128);
  const double t = 60e-9;
  const std::size_t r = 20000;
  const auto cold = sample_thermal(basis, t, r, 21);
  ThermalOptions opts;
  opts.include_vacuum = true;
  const auto dressed = sample_thermal(basis, t, r, 21, opts);
  const auto occ_c = mean_occupations(cold);
  const auto occ_d = mean_occupations(dressed);
  for (std::size_t j = 0; j < basis->size(); ++j) {
    const double n_j = constants::kB * t / (constants::hbar * basis->mode(j).omega);
    const double se = (n_j + 0.5) / std::sqrt(static_cast<double>(r));
    CHECK(std::abs(occ_d[j] - (n_j + 0.5)) < 5.0 * se);
    CHECK(occ_d[j] > occ_c[j]);
  }
}

TEST_CASE("fast split: pure density quadrature with g n / 2 in every mode") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto basis = make_basis(20, 128);
  const std::size_t r = 4000;
  const auto e = sample_fast_split(basis, s, r, 31);

  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t j = 0; j < basis->size(); ++j)
      CHECK(e.a(k, j).imag() == 0.0);  // phase quadrature exactly empty at t = 0

  const double target = s.g1d * p.density / 2.0;
  const auto energies = mean_mode_energies(e);
  for (std::size_t j = 0; j < basis->size(); ++j) {
    // One-quadrature Gaussian: Var(E) = 2 E^2, SE = sqrt(2) E / sqrt(r).
    const double se = std::sqrt(2.0) * target / std::sqrt(static_cast<double>(r));
    CHECK(std::abs(energies[j] - target) < 5.0 * se);
  }

  const auto shot = shot_noise_occupations(*basis, s);
  REQUIRE(shot.size() == basis->size());
  for (std::size_t j = 0; j < basis->size(); ++j)
    CHECK(shot[j] == doctest::Approx(target / (constants::hbar * basis->mode(j).omega))
                         .epsilon(1e-12));
}

TEST_CASE("fast split reconstructs white density noise on the resolved modes") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const std::size_t points = 64, mode_count = 31;
  const auto grid = SpatialGrid::centered(p.box_length, points);
  const auto basis = std::make_shared<ModeBasis>(
      build_box_basis(p.box_length, s, mode_count, grid));

  // Per mode, white noise <nu nu'> = (n/2) delta(z - z') projects to a
  // density-coefficient variance of exactly n / L.
  const auto shot = shot_noise_occupations(*basis, s);
  const double white = p.density / p.box_length;
  for (std::size_t j = 0; j < mode_count; ++j) {
    const double d = basis->mode(j).density_norm;
    CHECK(d * d * shot[j] == doctest::Approx(white).epsilon(1e-12));
  }

  // Sampled covariance of nu matches the analytic projector onto the
  // resolved modes; completing the basis would turn this into the
  // (n / 2 dz) delta_ik discretization of the delta function.
  const std::size_t r = 10000;
  const auto e = sample_fast_split(basis, s, r, 41);
  std::vector<std::vector<double>> nu(r);
  for (std::size_t k = 0; k < r; ++k) nu[k] = fields_from_amplitudes(*basis, e.row(k)).nu;

  std::vector<double> expected(points * points, 0.0);
  for (std::size_t j = 0; j < mode_count; ++j)
    for (std::size_t i = 0; i < points; ++i)
      for (std::size_t k = 0; k < points; ++k)
        expected[i * points + k] +=
            white * basis->mode(j).profile[i] * basis->mode(j).profile[k];

  double worst_sigma = 0;
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t k = i; k < points; ++k) {
      double acc = 0;
      for (std::size_t rr = 0; rr < r; ++rr) acc += nu[rr][i] * nu[rr][k];
      const double sample = acc / static_cast<double>(r);
      const double exp_ik = expected[i * points + k];
      const double var_est = (expected[i * points + i] * expected[k * points + k] +
                              exp_ik * exp_ik) /
                             static_cast<double>(r);
      worst_sigma = std::max(worst_sigma,
                             std::abs(sample - exp_ik) / std::sqrt(var_est));
    }
  CHECK(worst_sigma < 6.0);  // max over 2080 cells of a unit-variance deviate
}

TEST_CASE("squeezed split at shot-noise occupations is statistically a fast split") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto basis = make_basis(10, 128);
  const std::size_t r = 4000;
  const auto shot = shot_noise_occupations(*basis, s);
  const auto eq = sample_squeezed_split(basis, shot, r, 51);
  const auto occ = mean_occupations(eq);
  for (std::size_t j = 0; j < basis->size(); ++j) {
    const double se = std::sqrt(2.0) * shot[j] / std::sqrt(static_cast<double>(r));
    CHECK(std::abs(occ[j] - shot[j]) < 5.0 * se);
    for (std::size_t k = 0; k < 100; ++k)
      CHECK(eq.a(k, j).imag() == 0.0);  // density-aligned at t = 0
  }
}

TEST_CASE("squeezed split recovers an injected sawtooth occupation pattern") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto basis = make_basis(9, 128);
  const std::size_t r = 6000;
  const auto shot = shot_noise_occupations(*basis, s);
  std::vector<double> target(shot);
  for (std::size_t j = 0; j < target.size(); ++j)
    target[j] *= (j % 2 == 0) ? 0.25 : 1.5;  // modes 1,3,5,... squeezed
  const auto e = sample_squeezed_split(basis, target, r, 61);
  const auto occ = mean_occupations(e);
  for (std::size_t j = 0; j < basis->size(); ++j) {
    const double se = std::sqrt(2.0) * target[j] / std::sqrt(static_cast<double>(r));
    CHECK(std::abs(occ[j] - target[j]) < 5.0 * se);
  }
}

TEST_CASE("binomial split: exact counting statistics") {
  const std::uint64_t n = 1000;
  const std::size_t r = 10000;
  const auto split = sample_binomial_split(n, 0.5, r, 71);
  REQUIRE(split.n_left.size() == r);
  CHECK(split.atom_number == n);
  std::vector<double> imb(r);
  for (std::size_t k = 0; k < r; ++k) {
    CHECK(split.n_left[k] + split.n_right(k) == n);
    imb[k] = split.imbalance(k);
  }
  const double var_target = static_cast<double>(n) / 4.0;
  CHECK(std::abs(stats::mean(imb)) <
        5.0 * std::sqrt(var_target / static_cast<double>(r)));
  CHECK(std::abs(stats::variance(imb) - var_target) <
        5.0 * var_target * std::sqrt(2.0 / static_cast<double>(r)));

  const auto biased = sample_binomial_split(1000, 0.7, 4000, 81);
  std::vector<double> left(biased.n_left.size());
  for (std::size_t k = 0; k < left.size(); ++k)
    left[k] = static_cast<double>(biased.n_left[k]);
  CHECK(std::abs(stats::mean(left) - 700.0) <
        5.0 * std::sqrt(1000.0 * 0.7 * 0.3 / 4000.0));
}

TEST_CASE("sampling is deterministic in the seed and independent of thread count") {
  const auto p = rb_box();
  const auto s = derive_scales(p);
  const auto basis = make_basis(8, 128);
  const auto a = sample_thermal(basis, 60e-9, 64, 7, {}, 1);
  const auto b = sample_thermal(basis, 60e-9, 64, 7, {}, 3);
  CHECK(a.amplitudes == b.amplitudes);
  const auto c = sample_thermal(basis, 60e-9, 64, 8, {}, 1);
  CHECK(a.amplitudes != c.amplitudes);

  const auto f1 = sample_fast_split(basis, s, 32, 5, 1);
  const auto f2 = sample_fast_split(basis, s, 32, 5, 4);
  CHECK(f1.amplitudes == f2.amplitudes);

  const auto s1 = sample_binomial_split(500, 0.5, 64, 3, 1);
  const auto s2 = sample_binomial_split(500, 0.5, 64, 3, 2);
  CHECK(s1.n_left == s2.n_left);
}

TEST_CASE("ensemble sampling guards") {
  const auto basis = make_basis(8, 128);
  CHECK_THROWS_AS(sample_thermal(basis, -1.0, 10, 1), Error);
  CHECK_THROWS_AS(sample_thermal(nullptr, 60e-9, 10, 1), Error);
  CHECK_THROWS_AS(sample_thermal(basis, 60e-9, 0, 1), Error);
  std::vector<double> wrong(basis->size() + 2, 1.0);
  CHECK_THROWS_AS(sample_squeezed_split(basis, wrong, 10, 1), Error);
  CHECK_THROWS_AS(sample_binomial_split(100, 1.5, 10, 1), Error);
}

} // TEST_SUITE
