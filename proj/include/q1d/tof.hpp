#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "q1d/grid.hpp"

namespace q1d {

/**
 * Axial density of one quasicondensate after free time-of-flight expansion.
 * The profile lives on an expanded grid: the source grid plus guard bands
 * wide enough that nothing reaches the boundary, rounded up to a power-of-2
 * point count for the spectral propagator. `source_begin/end` bracket the
 * cells that coincide with the original grid.
 */
struct TofProfile {
  SpatialGrid grid;             // expanded grid
  std::vector<double> density;  // atoms / m
  double t_tof = 0;             // s
  double atom_number = 0;       // integral of the source density
  std::size_t source_begin = 0;
  std::size_t source_end = 0;    // one past the last source cell
  std::size_t bulk_margin = 0;   // guard-band width in cells; edge-diffraction keep-out
};

struct TofOptions {
  // Guard band on each side in units of the Fresnel length sqrt(hbar t / m).
  // Values below 4 risk wrap-around artifacts and are rejected.
  double pad_factor = 4.0;
  // Gaussian imaging-resolution blur applied to the density (0 = off).
  double resolution_sigma = 0.0;
};

/**
 * Free-particle expansion of psi0(z) = sqrt(n1d) exp(i phi(z)) for t_tof:
 * multiply by exp(-i hbar k^2 t / 2m) in wavenumber space. The initial
 * density is uniform; every ripple in the output is seeded by phi.
 */
TofProfile expand_tof(std::span<const double> phi, const SpatialGrid& grid, double n1d,
                      double t_tof, double mass, const TofOptions& options = {});

std::vector<TofProfile> expand_tof_ensemble(const std::vector<std::vector<double>>& phases,
                                            const SpatialGrid& grid, double n1d, double t_tof,
                                            double mass, const TofOptions& options = {},
                                            int threads = 0);

/** Density-ripple correlation g2~(x) = <rho(z) rho(z+x)> / <rho>^2. */
struct RippleCurve {
  std::vector<double> x;
  std::vector<double> g2;
  std::vector<double> se;  // realization bootstrap
  double mean_density = 0;
  std::size_t realizations = 0;
};

/**
 * Averages over realizations and over z in the bulk: the source region
 * shrunk on each side by the guard-band width (>= 4 Fresnel lengths plus
 * the blur width), so edge diffraction never enters the statistics.
 */
RippleCurve ripple_correlation(std::span<const TofProfile> profiles, double max_separation,
                               std::size_t bootstrap_resamples = 200, std::uint64_t seed = 0);

// Integrated ripple power: mean over the bulk of (rho - <rho>)^2 / <rho>^2.
double ripple_variance(std::span<const TofProfile> profiles);

} // namespace q1d
