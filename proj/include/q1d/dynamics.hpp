#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "q1d/ensembles.hpp"

namespace q1d {

/**
 * Free phonon evolution a_j(t) = a_j(0) exp(-i omega_j t). Pure quadrature
 * rotation: |a_j| and the total energy are conserved exactly. In a box the
 * dynamics is periodic, amplitudes return at 2L/c and at t_rec = L/c they
 * carry the (-1)^j pattern that restores every density-aligned initial
 * state.
 */
PhononEnsemble evolve(const PhononEnsemble& ensemble, double t, int threads = 0);

void evolve_in_place(PhononEnsemble& ensemble, double t, int threads = 0);

/** Calls fn(t, evolved-from-t0 ensemble) for every requested time. */
void evolve_series(const PhononEnsemble& ensemble, std::span<const double> times,
                   const std::function<void(double, const PhononEnsemble&)>& fn,
                   int threads = 0);

// L/c for a box basis; harmonic frequencies are incommensurate (nullopt).
std::optional<double> recurrence_time(const ModeBasis& basis);

// Ensemble-mean occupation <|a_j|^2> per mode.
std::vector<double> mean_occupations(const PhononEnsemble& ensemble);

// Ensemble-mean mode energy hbar omega_j <|a_j|^2> per mode (J).
std::vector<double> mean_mode_energies(const PhononEnsemble& ensemble);

// Total phonon energy per realization, sum_j hbar omega_j |a_j|^2 (J).
std::vector<double> total_energy(const PhononEnsemble& ensemble);

struct CoolingStep {
  int step = 0;
  double atom_number = 0;
  double temperature = 0;   // K, from equipartition of the mean mode energy
  double mean_energy = 0;   // J per mode
};

struct CoolingTrace {
  std::vector<CoolingStep> steps;
};

/**
 * Quench-cooling ladder: each step scales the density quadrature of every
 * mode by sqrt(1 - extraction_fraction) (outcoupling removes density
 * fluctuations along with atoms: the atom number shrinks by the same
 * amplitude factor), then evolves for a dephasing interval drawn uniformly
 * from [0.5, 1.5] * base_interval, shared by all realizations. The trace
 * records the remaining atom number and the equipartition temperature,
 * which fall together (T proportional to N for small fractions).
 */
CoolingTrace simulate_quench_cooling(PhononEnsemble& ensemble, double atom_number,
                                     int n_steps, double extraction_fraction,
                                     double base_interval, std::uint64_t seed,
                                     int threads = 0);

} // namespace q1d
