#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "q1d/grid.hpp"
#include "q1d/scales.hpp"

namespace q1d {

/**
 * One phonon mode. The complex amplitude a_j carries the density quadrature
 * in Re(a_j) and the phase quadrature in Im(a_j), with prefactors chosen so
 * the classical mode energy is exactly hbar * omega_j * |a_j|^2:
 *
 *   phi(z) += phase_norm * Im(a_j) * profile(z)
 *   nu(z)  += density_norm * Re(a_j) * profile(z)
 *
 * Thermal equipartition then gives <|a_j|^2> = kB T / (hbar omega_j).
 */
struct Mode {
  int index = 0;                // j >= 1
  double omega = 0;             // rad/s
  std::vector<double> profile;  // f_j at the grid points, dimensionless
  double norm = 0;              // sum_i f_j^2 dz
  double phase_norm = 0;
  double density_norm = 0;
};

// Which field the basis reconstructs. The relative sector of a split pair
// has phase stiffness K; a single gas has 2K (same sound speed).
enum class FieldConvention { relative_sector, single_gas };

class ModeBasis {
public:
  ModeBasis(TrapGeometry geometry, SpatialGrid grid, std::vector<Mode> modes,
            double sound_speed, double phase_stiffness, FieldConvention convention);

  TrapGeometry geometry() const { return geometry_; }
  const SpatialGrid& grid() const { return grid_; }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& mode(std::size_t j) const { return modes_[j]; } // 0-based storage
  std::size_t size() const { return modes_.size(); }
  double sound_speed() const { return sound_speed_; }
  double phase_stiffness() const { return phase_stiffness_; }
  FieldConvention convention() const { return convention_; }
  double length() const { return grid_.extent(); }
  std::string describe() const;

private:
  TrapGeometry geometry_;
  SpatialGrid grid_;
  std::vector<Mode> modes_;
  double sound_speed_;
  double phase_stiffness_;
  FieldConvention convention_;
};

/** phi and nu on the basis grid for one realization. */
struct FieldRealization {
  std::vector<double> phi;  // rad
  std::vector<double> nu;   // atoms / m
};

/**
 * Box (hard wall) basis: omega_j = pi c j / L, profiles
 * f_j(z) = cos(j pi (z/L + 1/2)). The grid must span exactly L.
 */
ModeBasis build_box_basis(double length, const DerivedScales& scales, std::size_t mode_count,
                          const SpatialGrid& grid,
                          FieldConvention convention = FieldConvention::relative_sector);

/**
 * Harmonic basis: omega_j = omega_parallel sqrt(j(j+1)/2), Legendre profiles
 * P_j(2z/L) orthogonalized on the grid. Density is treated as uniform over
 * the grid span (the frequency ladder is what matters downstream).
 */
ModeBasis build_harmonic_basis(double omega_parallel, const DerivedScales& scales,
                               std::size_t mode_count, const SpatialGrid& grid,
                               FieldConvention convention = FieldConvention::relative_sector);

// Default mode count: min(50, highest j with omega_j below mu/hbar), >= 1.
std::size_t default_mode_count(double omega_fundamental_spacing, double chemical_potential);

FieldRealization fields_from_amplitudes(const ModeBasis& basis,
                                        std::span<const std::complex<double>> amplitudes);

/** Phase field evaluated only at the given grid indices (hot path). */
void phase_at_indices(const ModeBasis& basis, std::span<const std::complex<double>> amplitudes,
                      std::span<const std::size_t> indices, std::span<double> out);

} // namespace q1d
