#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
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

struct Fixture {
  GasParameters p = rb_box();
  DerivedScales s = derive_scales(p);
  std::shared_ptr<const ModeBasis> basis;
  Fixture(std::size_t modes = 16, std::size_t points = 128) {
    basis = std::make_shared<ModeBasis>(
        build_box_basis(p.box_length, s, modes, SpatialGrid::centered(p.box_length, points)));
  }
};

} // namespace

TEST_SUITE("dynamics") {

TEST_CASE("evolution conserves |a_j|^2 per mode and realization to 1e-12") {
  Fixture f;
  const auto e0 = sample_thermal(f.basis, 60e-9, 50, 13);
  const auto e1 = evolve(e0, 0.731e-3);
  for (std::size_t r = 0; r < e0.realizations; ++r)
    for (std::size_t j = 0; j < f.basis->size(); ++j) {
      const double n0 = std::norm(e0.a(r, j));
      const double n1 = std::norm(e1.a(r, j));
      CHECK(std::abs(n1 - n0) <= 1e-12 * n0);
    }
  // and therefore the total energy.
  const auto t0 = total_energy(e0);
  const auto t1 = total_energy(e1);
  for (std::size_t r = 0; r < t0.size(); ++r)
    CHECK(std::abs(t1[r] - t0[r]) <= 1e-12 * t0[r]);
}

TEST_CASE("box dynamics is periodic at 2L/c and antiperiodic-patterned at L/c") {
  Fixture f;
  const auto e0 = sample_fast_split(f.basis, f.s, 20, 23);
  const double t_rec = f.p.box_length / f.s.sound_speed;

  const auto full = evolve(e0, 2.0 * t_rec);
  for (std::size_t r = 0; r < e0.realizations; ++r)
    for (std::size_t j = 0; j < f.basis->size(); ++j)
      CHECK(std::abs(full.a(r, j) - e0.a(r, j)) <= 1e-9 * std::abs(e0.a(r, j)) + 1e-15);

  const auto half = evolve(e0, t_rec);
  for (std::size_t r = 0; r < e0.realizations; ++r)
    for (std::size_t j = 0; j < f.basis->size(); ++j) {
      const double sign = (j % 2 == 0) ? -1.0 : 1.0;  // stored j is mode index j+1
      const auto want = sign * e0.a(r, j);
      CHECK(std::abs(half.a(r, j) - want) <= 1e-9 * std::abs(want) + 1e-15);
    }
}

TEST_CASE("recurrence_time: L/c for a box, disengaged for a harmonic trap") {
  Fixture f;
  const auto t = recurrence_time(*f.basis);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(f.p.box_length / f.s.sound_speed).epsilon(1e-12));

  const auto hgrid = SpatialGrid::centered(f.p.box_length, 128);
  const auto hbasis = build_harmonic_basis(2.0 * constants::pi * 10.0, f.s, 8, hgrid);
  CHECK_FALSE(recurrence_time(hbasis).has_value());
}

TEST_CASE("evolve_series visits the requested times with the same result as evolve") {
  Fixture f;
  const auto e0 = sample_thermal(f.basis, 60e-9, 8, 29);
  const std::vector<double> times{0.0, 1e-3, 2.5e-3};
  std::size_t calls = 0;
  evolve_series(e0, times, [&](double t, const PhononEnsemble& at_t) {
    const auto direct = evolve(e0, t);
    CHECK(at_t.amplitudes.size() == direct.amplitudes.size());
    for (std::size_t i = 0; i < direct.amplitudes.size(); ++i)
      CHECK(std::abs(at_t.amplitudes[i] - direct.amplitudes[i]) <=
            1e-9 * std::abs(direct.amplitudes[i]) + 1e-15);
    ++calls;
  });
  CHECK(calls == times.size());

  auto copy = e0;
  evolve_in_place(copy, 1e-3);
  const auto direct = evolve(e0, 1e-3);
  CHECK(copy.amplitudes == direct.amplitudes);
}

TEST_CASE("occupation and energy reductions agree with direct sums") {
  Fixture f(6, 128);
  const auto e = sample_thermal(f.basis, 60e-9, 40, 37);
  const auto occ = mean_occupations(e);
  const auto en = mean_mode_energies(e);
  REQUIRE(occ.size() == f.basis->size());
  for (std::size_t j = 0; j < occ.size(); ++j) {
    double acc = 0;
    for (std::size_t r = 0; r < e.realizations; ++r) acc += std::norm(e.a(r, j));
    acc /= static_cast<double>(e.realizations);
    CHECK(occ[j] == doctest::Approx(acc).epsilon(1e-12));
    CHECK(en[j] ==
          doctest::Approx(constants::hbar * f.basis->mode(j).omega * acc).epsilon(1e-12));
  }
}

TEST_CASE("quench cooling walks T and N down together, linearly") {
  Fixture f(12, 128);
  auto e = sample_thermal(f.basis, 80e-9, 400, 43);
  const double n0 = f.p.density * f.p.box_length;
  const auto trace = simulate_quench_cooling(e, n0, 6, 0.25, 4e-3, 47);
  REQUIRE(trace.steps.size() == 7);  // initial state plus 6 steps

  CHECK(trace.steps.front().atom_number == doctest::Approx(n0));
  const double amp = std::sqrt(1.0 - 0.25);
  std::vector<double> n_col, t_col;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& st = trace.steps[k];
    CHECK(st.step == static_cast<int>(k));
    CHECK(st.atom_number ==
          doctest::Approx(n0 * std::pow(amp, static_cast<double>(k))).epsilon(1e-9));
    if (k > 0) {
      CHECK(st.temperature < trace.steps[k - 1].temperature);
      // each dephased step drains half the extraction from the mode energy
      CHECK(st.mean_energy / trace.steps[k - 1].mean_energy ==
            doctest::Approx(1.0 - 0.125).epsilon(0.05));
    }
    n_col.push_back(st.atom_number);
    t_col.push_back(st.temperature);
  }
  const auto fit = stats::fit_line(n_col, t_col);
  CHECK(fit.r2 > 0.95);
  CHECK(fit.slope > 0.0);
}

TEST_CASE("dynamics guards") {
  Fixture f;
  auto e = sample_thermal(f.basis, 60e-9, 4, 5);
  CHECK_THROWS_AS(evolve(e, std::numeric_limits<double>::infinity()), Error);
  CHECK_THROWS_AS(simulate_quench_cooling(e, 0.0, 4, 0.25, 1e-3, 1), Error);
  CHECK_THROWS_AS(simulate_quench_cooling(e, 5000.0, 4, 1.0, 1e-3, 1), Error);
  CHECK_THROWS_AS(simulate_quench_cooling(e, 5000.0, 0, 0.25, 1e-3, 1), Error);
}

} // TEST_SUITE
