#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "q1d/modes.hpp"
#include "q1d/scales.hpp"

namespace q1d {

/**
 * Stochastic ensemble of phonon mode amplitudes, R realizations x M modes,
 * row-major. Realization r derives its RNG stream from (seed, r), so the
 * ensemble is reproducible bit for bit at any thread count.
 */
struct PhononEnsemble {
  std::shared_ptr<const ModeBasis> basis;
  std::size_t realizations = 0;
  std::vector<std::complex<double>> amplitudes;
  std::string sampler;
  std::uint64_t seed = 0;

  std::size_t mode_count() const { return basis ? basis->size() : 0; }
  std::complex<double>& a(std::size_t r, std::size_t j) {
    return amplitudes[r * mode_count() + j];
  }
  const std::complex<double>& a(std::size_t r, std::size_t j) const {
    return amplitudes[r * mode_count() + j];
  }
  std::span<const std::complex<double>> row(std::size_t r) const {
    return {amplitudes.data() + r * mode_count(), mode_count()};
  }
  std::span<std::complex<double>> row(std::size_t r) {
    return {amplitudes.data() + r * mode_count(), mode_count()};
  }
};

struct ThermalOptions {
  // Adds the symmetric vacuum contribution (1/4 per quadrature) on top of
  // the Rayleigh-Jeans occupation. Off by default: occupations are classical.
  bool include_vacuum = false;
};

/**
 * Thermal (Rayleigh-Jeans) ensemble: <|a_j|^2> = kB T / (hbar omega_j),
 * energy equipartitioned between the two quadratures. Also used for the
 * common-mode sector, which is just an independent thermal ensemble.
 */
PhononEnsemble sample_thermal(std::shared_ptr<const ModeBasis> basis, double temperature,
                              std::size_t realizations, std::uint64_t seed,
                              const ThermalOptions& opts = {}, int threads = 0);

/**
 * Fast (sudden) splitting: binomial atom shot noise projected onto the
 * density quadrature, <nu(z) nu(z')> = (n1d/2) delta(z - z'), phase
 * quadrature exactly zero. Every mode receives energy g1d n1d / 2.
 */
PhononEnsemble sample_fast_split(std::shared_ptr<const ModeBasis> basis,
                                 const DerivedScales& scales, std::size_t realizations,
                                 std::uint64_t seed, int threads = 0);

/**
 * Splitting with prescribed per-mode occupations n_j, density-quadrature
 * aligned at t = 0. With n_j at the fast-split shot-noise level this is
 * statistically identical to sample_fast_split.
 */
PhononEnsemble sample_squeezed_split(std::shared_ptr<const ModeBasis> basis,
                                     std::span<const double> occupations,
                                     std::size_t realizations, std::uint64_t seed,
                                     int threads = 0);

// Fast-split (shot noise) occupation of mode j: g1d n1d / (2 hbar omega_j).
std::vector<double> shot_noise_occupations(const ModeBasis& basis, const DerivedScales& scales);

/** Atom-number partition of a split into left/right wells. */
struct BinomialSplitResult {
  std::uint64_t atom_number = 0;
  double p_left = 0.5;
  std::vector<std::uint64_t> n_left;  // one entry per realization
  std::uint64_t n_right(std::size_t r) const { return atom_number - n_left[r]; }
  // Imbalance (N_l - N_r)/2; <dN^2> = N/4 for a balanced split.
  double imbalance(std::size_t r) const {
    return 0.5 * (static_cast<double>(n_left[r]) - static_cast<double>(n_right(r)));
  }
};

BinomialSplitResult sample_binomial_split(std::uint64_t atom_number, double p_left,
                                          std::size_t realizations, std::uint64_t seed,
                                          int threads = 0);

/** CSV dump of an amplitude table, with seed/basis/sampler header lines. */
void write_ensemble_csv(const PhononEnsemble& ensemble, const std::string& path);

} // namespace q1d
