#include "q1d/modes.hpp"

#include <cmath>
#include <sstream>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"

namespace q1d {

using constants::pi;

namespace {

double effective_stiffness(const DerivedScales& s, FieldConvention c) {
  // Single-gas phase fluctuations are half as stiff per quadrature pair:
  // Hamiltonian coefficient hbar^2 n / 2m instead of hbar^2 n / 4m.
  return c == FieldConvention::relative_sector ? s.luttinger_k : 2.0 * s.luttinger_k;
}

void finalize_norms(Mode& m, const SpatialGrid& grid, double c, double k_eff) {
  double s2 = 0;
  for (double f : m.profile) s2 += f * f;
  m.norm = s2 * grid.dz();
  m.phase_norm = std::sqrt(2.0 * pi * c / (k_eff * m.omega * m.norm));
  m.density_norm = std::sqrt(2.0 * k_eff * m.omega / (pi * c * m.norm));
}

} // namespace

ModeBasis::ModeBasis(TrapGeometry geometry, SpatialGrid grid, std::vector<Mode> modes,
                     double sound_speed, double phase_stiffness, FieldConvention convention)
    : geometry_(geometry),
      grid_(grid),
      modes_(std::move(modes)),
      sound_speed_(sound_speed),
      phase_stiffness_(phase_stiffness),
      convention_(convention) {
  require(!modes_.empty(), "basis: needs at least one mode");
  require(sound_speed_ > 0, "basis: sound speed must be positive");
  require(phase_stiffness_ > 0, "basis: phase stiffness must be positive");
}

std::string ModeBasis::describe() const {
  std::ostringstream os;
  os << (geometry_ == TrapGeometry::box ? "box" : "harmonic") << " basis, " << modes_.size()
     << " modes, "
     << (convention_ == FieldConvention::relative_sector ? "relative sector" : "single gas");
  return os.str();
}

ModeBasis build_box_basis(double length, const DerivedScales& scales, std::size_t mode_count,
                          const SpatialGrid& grid, FieldConvention convention) {
  require(length > 0, "box basis: length must be positive");
  require(std::abs(grid.extent() - length) <= 1e-9 * length,
          "box basis: grid must span exactly the box length");
  require(mode_count >= 1, "box basis: need at least one mode");
  require(mode_count < grid.size() / 2,
          "box basis: mode count must stay below the grid Nyquist limit");

  const double c = scales.sound_speed;
  const double k_eff = effective_stiffness(scales, convention);
  const std::size_t n = grid.size();
  std::vector<Mode> modes(mode_count);
  for (std::size_t jm = 0; jm < mode_count; ++jm) {
    Mode& m = modes[jm];
    m.index = static_cast<int>(jm) + 1;
    m.omega = pi * c * static_cast<double>(m.index) / length;
    m.profile.resize(n);
    // z/L + 1/2 = (i + 1/2)/n on the cell-centered grid: exact DCT-II phases.
    for (std::size_t i = 0; i < n; ++i)
      m.profile[i] =
          std::cos(pi * static_cast<double>(m.index) * (static_cast<double>(i) + 0.5) /
                   static_cast<double>(n));
    finalize_norms(m, grid, c, k_eff);
  }
  return ModeBasis(TrapGeometry::box, grid, std::move(modes), c, k_eff, convention);
}

ModeBasis build_harmonic_basis(double omega_parallel, const DerivedScales& scales,
                               std::size_t mode_count, const SpatialGrid& grid,
                               FieldConvention convention) {
  require(omega_parallel > 0, "harmonic basis: omega_parallel must be positive");
  require(mode_count >= 1, "harmonic basis: need at least one mode");
  require(mode_count < grid.size() / 2,
          "harmonic basis: mode count must stay below the grid Nyquist limit");

  const double c = scales.sound_speed;
  const double k_eff = effective_stiffness(scales, convention);
  const std::size_t n = grid.size();
  const double half = 0.5 * grid.extent();
  const double zc = grid.center();

  std::vector<Mode> modes(mode_count);
  for (std::size_t jm = 0; jm < mode_count; ++jm) {
    Mode& m = modes[jm];
    m.index = static_cast<int>(jm) + 1;
    const double j = static_cast<double>(m.index);
    m.omega = omega_parallel * std::sqrt(j * (j + 1.0) / 2.0);
    m.profile.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = (grid.z(i) - zc) / half;
      m.profile[i] = std::legendre(static_cast<unsigned>(m.index), x);
    }
  }

  // Two-pass Gram-Schmidt against lower modes so grid orthogonality is exact
  // (raw midpoint sums of Legendre products are only O(dz^2) orthogonal).
  for (std::size_t jm = 0; jm < mode_count; ++jm) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t l = 0; l < jm; ++l) {
        double dot = 0, nl = 0;
        for (std::size_t i = 0; i < n; ++i) {
          dot += modes[jm].profile[i] * modes[l].profile[i];
          nl += modes[l].profile[i] * modes[l].profile[i];
        }
        const double coef = dot / nl;
        for (std::size_t i = 0; i < n; ++i) modes[jm].profile[i] -= coef * modes[l].profile[i];
      }
    }
    finalize_norms(modes[jm], grid, c, k_eff);
  }
  return ModeBasis(TrapGeometry::harmonic, grid, std::move(modes), c, k_eff, convention);
}

std::size_t default_mode_count(double omega_fundamental_spacing, double chemical_potential) {
  require(omega_fundamental_spacing > 0, "default_mode_count: spacing must be positive");
  require(chemical_potential > 0, "default_mode_count: mu must be positive");
  const double jmax = chemical_potential / (constants::hbar * omega_fundamental_spacing);
  std::size_t m = jmax >= 1.0 ? static_cast<std::size_t>(jmax) : 1;
  return std::min<std::size_t>(50, m);
}

FieldRealization fields_from_amplitudes(const ModeBasis& basis,
                                        std::span<const std::complex<double>> amplitudes) {
  require(amplitudes.size() == basis.size(), "fields_from_amplitudes: amplitude count mismatch");
  const std::size_t n = basis.grid().size();
  FieldRealization f;
  f.phi.assign(n, 0.0);
  f.nu.assign(n, 0.0);
  for (std::size_t jm = 0; jm < basis.size(); ++jm) {
    const Mode& m = basis.mode(jm);
    const double cp = m.phase_norm * amplitudes[jm].imag();
    const double cn = m.density_norm * amplitudes[jm].real();
    for (std::size_t i = 0; i < n; ++i) {
      f.phi[i] += cp * m.profile[i];
      f.nu[i] += cn * m.profile[i];
    }
  }
  return f;
}

void phase_at_indices(const ModeBasis& basis, std::span<const std::complex<double>> amplitudes,
                      std::span<const std::size_t> indices, std::span<double> out) {
  require(amplitudes.size() == basis.size(), "phase_at_indices: amplitude count mismatch");
  require(out.size() == indices.size(), "phase_at_indices: output size mismatch");
  for (std::size_t p = 0; p < indices.size(); ++p) out[p] = 0.0;
  for (std::size_t jm = 0; jm < basis.size(); ++jm) {
    const Mode& m = basis.mode(jm);
    const double cp = m.phase_norm * amplitudes[jm].imag();
    if (cp == 0.0) continue;
    const double* prof = m.profile.data();
    for (std::size_t p = 0; p < indices.size(); ++p) out[p] += cp * prof[indices[p]];
  }
}

} // namespace q1d
