#include "q1d/scales.hpp"

#include <cmath>
#include <limits>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"

namespace q1d {

using constants::hbar;
using constants::kB;
using constants::pi;

double transverse_length(double atom_mass, double omega_perp) {
  require(atom_mass > 0, "scales: atom mass must be positive");
  require(omega_perp > 0, "scales: omega_perp must be positive");
  return std::sqrt(hbar / (atom_mass * omega_perp));
}

double compute_g1d(double atom_mass, double scattering_length, double omega_perp) {
  require(scattering_length >= 0, "scales: scattering length must be non-negative");
  const double a_perp = transverse_length(atom_mass, omega_perp);
  const double denom = 1.0 - 1.4603 * scattering_length / a_perp;
  if (denom <= 0.0)
    fail_validation("scales: confinement-induced resonance (1 - 1.4603 a_s/a_perp <= 0)");
  return 2.0 * hbar * scattering_length * omega_perp / denom;
}

double compute_g1d_weak(double scattering_length, double omega_perp) {
  require(scattering_length >= 0, "scales: scattering length must be non-negative");
  require(omega_perp > 0, "scales: omega_perp must be positive");
  return 2.0 * hbar * scattering_length * omega_perp;
}

DerivedScales derive_scales(const GasParameters& p) {
  require(p.atom_mass > 0, "scales: atom mass must be positive");
  require(p.scattering_length > 0, "scales: scattering length must be positive");
  require(p.density > 0, "scales: density must be positive");
  require(p.temperature >= 0, "scales: temperature must be non-negative");
  require(p.tunnel_coupling >= 0, "scales: tunnel coupling must be non-negative");
  if (p.geometry == TrapGeometry::box && p.atom_number > 0 && p.box_length > 0) {
    const double expected = p.density * p.box_length;
    require(std::abs(p.atom_number - expected) <= 0.01 * expected,
            "scales: atom number inconsistent with density * box length (> 1%)");
  }

  DerivedScales s;
  s.g1d = compute_g1d(p.atom_mass, p.scattering_length, p.omega_perp);
  s.a_perp = transverse_length(p.atom_mass, p.omega_perp);
  s.chemical_potential = s.g1d * p.density;
  s.sound_speed = std::sqrt(s.g1d * p.density / p.atom_mass);
  s.luttinger_k = std::sqrt(p.density * (hbar * pi) * (hbar * pi) / (4.0 * s.g1d * p.atom_mass));
  s.gamma = p.atom_mass * s.g1d / (hbar * hbar * p.density);
  s.temperature_is_zero = (p.temperature == 0.0);
  s.lambda_t = s.temperature_is_zero
                   ? std::numeric_limits<double>::infinity()
                   : 2.0 * hbar * hbar * p.density / (p.atom_mass * kB * p.temperature);
  s.xi_n = hbar / (p.atom_mass * s.sound_speed);
  if (p.tunnel_coupling > 0.0) {
    s.xi_j = std::sqrt(hbar / (4.0 * p.atom_mass * p.tunnel_coupling));
    s.q_ratio = s.lambda_t / *s.xi_j; // inf at T = 0 propagates deliberately
  } else {
    s.xi_j = std::nullopt;
    s.q_ratio = 0.0;
  }
  s.t_eff = s.g1d * p.density / (2.0 * kB);
  s.lambda_eff = hbar * hbar * p.density / (p.atom_mass * kB * s.t_eff);
  return s;
}

RegimeReport check_1d_regime(const GasParameters& p) {
  const DerivedScales s = derive_scales(p);
  RegimeReport r;
  const double gap = hbar * p.omega_perp;
  r.kbt_over_transverse_gap = kB * p.temperature / gap;
  r.mu_over_transverse_gap = s.chemical_potential / gap;
  r.gamma = s.gamma;
  r.one_dimensional = r.kbt_over_transverse_gap < 1.0 && r.mu_over_transverse_gap < 1.0;
  r.quasicondensate = s.gamma < 0.1;
  if (r.kbt_over_transverse_gap >= 1.0)
    r.notes.push_back("kB T exceeds the transverse level spacing; transverse modes thaw");
  if (r.mu_over_transverse_gap >= 1.0)
    r.notes.push_back("chemical potential exceeds the transverse level spacing");
  if (!r.quasicondensate)
    r.notes.push_back("gamma >= 0.1: outside the weakly interacting quasicondensate regime");
  return r;
}

} // namespace q1d
