#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "q1d/grid.hpp"
#include "q1d/modes.hpp"
#include "q1d/observables.hpp"

namespace q1d {

/**
 * Thermal measure of the relative phase of two tunnel-coupled 1D gases,
 *
 *   E[phi] = integral dz [ (hbar^2 n / 4m) (d_z phi)^2 - 2 hbar J n cos phi ],
 *
 * sampled at temperature T. The density sector is Gaussian and decoupled in
 * equilibrium, so only phi is generated. The phase at the first grid point
 * is the reference (pinned to 0); every reported statistic is a phase
 * difference and does not depend on that choice.
 */
struct SineGordonParams {
  double temperature = 0;  // K
  double density = 0;      // n1D per gas, atoms / m
  double tunnel_rate = 0;  // single-particle tunnelling rate J, rad/s
  double mass = 0;         // kg
};

// lambda_T / xi_J: how strongly the cos term locks the phase. Large values
// mean a narrow central phase distribution plus rare 2 pi kinks.
double phase_locking_ratio(const SineGordonParams& p);

// Healing length of the locked phase, xi_J = sqrt(hbar / 4 m J).
double tunnel_length(const SineGordonParams& p);

// Rest energy of one kink: 8 sqrt(A B) for E = A (d phi)^2 + B (1 - cos phi).
double kink_energy(const SineGordonParams& p);

// Dimensionless E[phi] / kB T of a configuration on the grid, open ends.
double sine_gordon_beta_energy(const SpatialGrid& grid, std::span<const double> phi,
                               const SineGordonParams& p);

struct SineGordonDiagnostics {
  double step = 0;             // frozen proposal width (rad)
  double acceptance = 0;       // single-site acceptance at the frozen step
  double kink_acceptance = 0;  // acceptance of the collective 2 pi moves
  double autocorr_sweeps = 0;  // integrated autocorrelation time of beta E
  std::size_t burn_in_sweeps = 0;
  std::size_t sweeps_per_chain = 0;
  bool metropolis = true;      // false on the exact J = 0 path
};

struct SineGordonEnsemble {
  std::vector<FieldRealization> fields;  // nu left empty: phase only
  SineGordonDiagnostics diagnostics;
  std::uint64_t seed = 0;
};

/**
 * Draws `realizations` independent fields. J > 0 runs one Metropolis chain
 * per realization: single-site Gaussian proposals with the step adapted to
 * ~40% acceptance on a pilot chain, then frozen; burn-in is 10x the
 * integrated autocorrelation time measured on the pilot, taken as the max
 * over beta E and mean cos phi (the latter tracks the slow winding /
 * long-wavelength sectors the energy barely sees). Chains start from an
 * exact draw of the harmonic approximation, so burn-in relaxes kinks and
 * anharmonicity rather than diffusing wavelengths. Each sweep also
 * makes a few collective moves that propose a full +-2 pi kink ramp at a
 * random position: single-site updates alone cannot cross the gradient
 * barrier between winding sectors (moving one site through pi costs
 * ~bond * pi^2 >> 1 even though a whole kink costs only ~sqrt(2) q), so
 * without them the chain would freeze at zero kinks no matter how long it
 * ran. The ramp proposal is sign- and position-symmetric, so plain
 * Metropolis acceptance keeps detailed balance. J = 0 has no cos term and
 * the exact measure is a Gaussian random walk in z, which is sampled
 * directly (single-site chains would need O((L/dz)^2) sweeps there).
 *
 * `sweeps` = 0 sizes the per-chain budget automatically; a nonzero value is
 * a hard budget and sampling fails if the measured burn-in does not fit.
 * Fails likewise if the pilot autocorrelation will not converge. Requires
 * dz < xi_J / 4 when J > 0 so kinks are resolved.
 */
SineGordonEnsemble sample_sine_gordon(const SpatialGrid& grid, const SineGordonParams& p,
                                      std::size_t realizations, std::uint64_t seed,
                                      std::size_t sweeps = 0, int threads = 0);

// Adapter into the common phase-sample currency of the observables layer.
PhaseSamples phase_samples(const SineGordonEnsemble& ensemble, const SpatialGrid& grid,
                           std::span<const std::size_t> indices);

} // namespace q1d
