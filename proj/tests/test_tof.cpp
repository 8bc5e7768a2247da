#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"
#include "q1d/grid.hpp"
#include "q1d/rng.hpp"
#include "q1d/tof.hpp"

using namespace q1d;

namespace {

constexpr double mass_rb = 1.44316060e-25;

// Free-particle expansion redone with a plain O(N^2) DFT on the layout the
// implementation reports: the oracle shares no transform code with it.
std::vector<double> naive_expansion(const TofProfile& p, std::span<const double> phi,
                                    double n1d, double mass) {
  const std::size_t n = p.grid.size();
  const double dz = p.grid.dz();
  std::vector<std::complex<double>> psi(n, {0.0, 0.0});
  const double amp = std::sqrt(n1d);
  for (std::size_t i = 0; i < phi.size(); ++i)
    psi[p.source_begin + i] = std::polar(amp, phi[i]);

  const double w = 2.0 * constants::pi / static_cast<double>(n);
  std::vector<std::complex<double>> spec(n, {0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      spec[j] += psi[i] * std::polar(1.0, -w * static_cast<double>(i * j % n));
  for (std::size_t j = 0; j < n; ++j) {
    const double f = static_cast<double>(j <= n / 2 ? j : n - j);  // k^2 is +-symmetric
    const double k = 2.0 * constants::pi * f / (static_cast<double>(n) * dz);
    spec[j] *= std::polar(1.0, -0.5 * constants::hbar * k * k * p.t_tof / mass);
  }
  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j)
      acc += spec[j] * std::polar(1.0, w * static_cast<double>(i * j % n));
    density[i] = std::norm(acc / static_cast<double>(n));
  }
  return density;
}

std::vector<std::vector<double>> random_walk_phases(const SpatialGrid& grid, double step_var,
                                                    std::size_t realizations,
                                                    std::uint64_t seed) {
  std::vector<std::vector<double>> fields(realizations);
  const double sd = std::sqrt(step_var);
  for (std::size_t r = 0; r < realizations; ++r) {
    Rng rng(stream_seed(seed, r));
    auto& phi = fields[r];
    phi.resize(grid.size());
    phi[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) phi[i] = phi[i - 1] + sd * rng.normal();
  }
  return fields;
}

double integrated_number(const TofProfile& p) {
  double acc = 0;
  for (double v : p.density) acc += v;
  return acc * p.grid.dz();
}

} // namespace

TEST_SUITE("tof") {

TEST_CASE("flat phase: bulk density stays n1d, atoms are conserved") {
  const auto grid = SpatialGrid::centered(100e-6, 256);
  const std::vector<double> phi(grid.size(), 0.0);
  const double n1d = 50e6;
  const auto p = expand_tof(phi, grid, n1d, 0.5e-3, mass_rb);

  CHECK(p.source_end - p.source_begin == grid.size());
  CHECK(p.grid.z(p.source_begin) == doctest::Approx(grid.z(0)).epsilon(1e-12));
  CHECK(p.atom_number == doctest::Approx(n1d * grid.extent()).epsilon(1e-12));
  CHECK(integrated_number(p) == doctest::Approx(p.atom_number).epsilon(1e-6));

  // Away from the edges the profile stays flat at n1d up to residual edge
  // diffraction: the fringe envelope falls off as sqrt(2)/(pi s) with
  // s = d / (sqrt(pi) lF), lF = sqrt(hbar t / m) = 0.60 um here, so the
  // central half of the cloud (d >= 25 um, s >= 23) is flat to ~2%.
  const std::size_t quarter = grid.size() / 4;
  const std::size_t lo = p.source_begin + quarter;
  const std::size_t hi = p.source_end - quarter;
  REQUIRE(lo < hi);
  for (std::size_t i = lo; i < hi; ++i)
    CHECK(p.density[i] == doctest::Approx(n1d).epsilon(0.04));

  // blur does not create or destroy atoms
  TofOptions blur;
  blur.resolution_sigma = 2e-6;
  const auto pb = expand_tof(phi, grid, n1d, 0.5e-3, mass_rb, blur);
  CHECK(integrated_number(pb) == doctest::Approx(pb.atom_number).epsilon(1e-6));
}

TEST_CASE("spectral propagator agrees with a direct DFT oracle") {
  const auto grid = SpatialGrid::centered(40e-6, 64);
  std::vector<double> phi(grid.size());
  Rng rng(2024);
  double walk = 0;
  for (auto& v : phi) {
    walk += 0.12 * rng.normal();
    v = walk;
  }
  const double n1d = 50e6;
  const double t = 1.5e-3;
  const auto p = expand_tof(phi, grid, n1d, t, mass_rb);
  const auto oracle = naive_expansion(p, phi, n1d, mass_rb);
  REQUIRE(oracle.size() == p.density.size());
  for (std::size_t i = 0; i < oracle.size(); ++i)
    CHECK(p.density[i] == doctest::Approx(oracle[i]).epsilon(1e-9).scale(n1d));
}

TEST_CASE("single phase mode imprints density ripples of amplitude 2 a sin(hbar k^2 t / 2m)") {
  const auto grid = SpatialGrid::centered(100e-6, 512);
  const double a = 0.01;
  const int periods = 25;
  const double k = 2.0 * constants::pi * periods / grid.extent();
  std::vector<double> phi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) phi[i] = a * std::cos(k * (grid.z(i) - grid.z(0)));

  const double n1d = 50e6;
  for (double t : {0.4e-3, 0.8e-3}) {
    const auto p = expand_tof(phi, grid, n1d, t, mass_rb);
    // matched-filter projection over 15 whole periods in the centre
    const double lambda = grid.extent() / periods;
    const double z_mid = 0.5 * (p.grid.z(p.source_begin) + p.grid.z(p.source_end - 1));
    const double z_lo = z_mid - 7.5 * lambda;
    double num = 0;
    std::size_t cells = 0;
    for (std::size_t i = p.source_begin; i < p.source_end; ++i) {
      const double z = p.grid.z(i);
      if (z < z_lo || z >= z_lo + 15.0 * lambda) continue;
      num += (p.density[i] / n1d - 1.0) * std::cos(k * (z - grid.z(0)));
      ++cells;
    }
    const double amplitude = 2.0 * num / static_cast<double>(cells);
    const double expected = 2.0 * a * std::sin(0.5 * constants::hbar * k * k * t / mass_rb);
    CHECK(amplitude == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("imaging blur pulls the zero-lag ripple correlation toward 1") {
  const auto grid = SpatialGrid::centered(80e-6, 256);
  const auto phases = random_walk_phases(grid, 0.02, 150, 31);
  const double n1d = 50e6;
  const double t = 1.2e-3;

  const auto sharp = expand_tof_ensemble(phases, grid, n1d, t, mass_rb);
  TofOptions blur;
  blur.resolution_sigma = 1.5e-6;
  const auto soft = expand_tof_ensemble(phases, grid, n1d, t, mass_rb, blur);

  const auto g_sharp = ripple_correlation(sharp, 8e-6, 100, 7);
  const auto g_soft = ripple_correlation(soft, 8e-6, 100, 7);
  CHECK(g_sharp.x[0] == 0.0);
  CHECK(g_sharp.g2[0] > 1.0);
  CHECK(g_soft.g2[0] > 1.0);
  CHECK(g_soft.g2[0] < g_sharp.g2[0] - 0.005);

  // bootstrap is seeded: identical call, identical error bars
  const auto again = ripple_correlation(sharp, 8e-6, 100, 7);
  CHECK(again.se == g_sharp.se);
  CHECK(again.g2 == g_sharp.g2);
}

TEST_CASE("ripple power grows monotonically with the phase temperature") {
  const auto grid = SpatialGrid::centered(80e-6, 256);
  const double n1d = 50e6;
  const double t = 1.2e-3;
  double previous = -1.0;
  std::size_t ladder = 0;
  for (double step_var : {0.01, 0.02, 0.04}) {  // step variance ~ T
    const auto phases = random_walk_phases(grid, step_var, 150, 47 + ladder++);
    const auto profiles = expand_tof_ensemble(phases, grid, n1d, t, mass_rb);
    const double v = ripple_variance(profiles);
    CHECK(v > previous);
    previous = v;
  }
  CHECK(previous > 0.0);
}

TEST_CASE("input validation: padding, ensemble size, layout mixing") {
  const auto grid = SpatialGrid::centered(80e-6, 256);
  const std::vector<double> phi(grid.size(), 0.0);

  TofOptions thin;
  thin.pad_factor = 3.0;
  CHECK_THROWS_AS(expand_tof(phi, grid, 50e6, 1e-3, mass_rb, thin), Error);
  CHECK_THROWS_AS(expand_tof(phi, grid, 0.0, 1e-3, mass_rb), Error);
  CHECK_THROWS_AS(expand_tof(phi, grid, 50e6, -1e-3, mass_rb), Error);
  CHECK_THROWS_AS(expand_tof(std::vector<double>(10, 0.0), grid, 50e6, 1e-3, mass_rb), Error);

  const auto phases = random_walk_phases(grid, 0.02, 120, 3);
  auto profiles = expand_tof_ensemble(phases, grid, 50e6, 1e-3, mass_rb);

  // too few realizations for the correlation estimator
  std::vector<TofProfile> few(profiles.begin(), profiles.begin() + 99);
  CHECK_THROWS_AS(ripple_correlation(few, 5e-6, 100, 0), Error);

  // separation beyond what the bulk window supports
  CHECK_THROWS_AS(ripple_correlation(profiles, 70e-6, 100, 0), Error);

  // profiles from a different source layout cannot be pooled
  const auto grid_b = SpatialGrid::centered(80e-6, 128);
  const auto phases_b = random_walk_phases(grid_b, 0.02, 120, 5);
  const auto other = expand_tof_ensemble(phases_b, grid_b, 50e6, 1e-3, mass_rb);
  auto mixed = profiles;
  mixed.insert(mixed.end(), other.begin(), other.end());
  CHECK_THROWS_AS(ripple_correlation(mixed, 5e-6, 100, 0), Error);
}

} // TEST_SUITE
