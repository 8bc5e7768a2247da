#pragma once

#include <optional>
#include <string>
#include <vector>

namespace q1d {

enum class TrapGeometry { box, harmonic };

/**
 * Physical inputs in SI units. For a box the axial extent is box_length;
 * for a harmonic trap omega_parallel sets the mode ladder and the gas is
 * treated at uniform density over the analysis window.
 */
struct GasParameters {
  double atom_mass = 0;          // kg
  double scattering_length = 0;  // m
  double omega_perp = 0;         // rad/s, transverse confinement
  TrapGeometry geometry = TrapGeometry::box;
  double box_length = 0;         // m
  double omega_parallel = 0;     // rad/s
  double density = 0;            // atoms / m (n_1D)
  double temperature = 0;        // K (initial thermal temperature)
  double tunnel_coupling = 0;    // rad/s (J, single-particle tunnel rate)
  double atom_number = 0;        // optional; 0 means density * length
};

/**
 * Derived quasicondensate scales. lambda_T is +inf at T = 0 (flagged via
 * temperature_is_zero, not an error). The tunnel-uncoupled case J = 0 is an
 * explicit state: xi_J is disengaged (nullopt) and q = 0.
 */
struct DerivedScales {
  double g1d = 0;                 // J m
  double a_perp = 0;              // m
  double chemical_potential = 0;  // J  (mu = g1d * n1d)
  double sound_speed = 0;         // m/s
  double luttinger_k = 0;         // dimensionless (relative-sector convention)
  double gamma = 0;               // interaction parameter m g / (hbar^2 n)
  double lambda_t = 0;            // m, thermal phase coherence length
  double xi_n = 0;                // m, density (healing) length
  std::optional<double> xi_j;     // m, tunnel length; nullopt when J = 0
  double q_ratio = 0;             // lambda_T / xi_J; 0 when uncoupled
  double t_eff = 0;               // K, prethermal effective temperature
  double lambda_eff = 0;          // m, prethermal coherence length
  bool temperature_is_zero = false;
};

/** One-dimensionality / quasicondensate checks for a parameter set. */
struct RegimeReport {
  double kbt_over_transverse_gap = 0;  // kB T / (hbar omega_perp)
  double mu_over_transverse_gap = 0;   // mu / (hbar omega_perp)
  double gamma = 0;
  bool one_dimensional = false;   // both ratios below 1
  bool quasicondensate = false;   // gamma < 0.1
  std::vector<std::string> notes;
};

// Transverse oscillator length sqrt(hbar / (m omega_perp)).
double transverse_length(double atom_mass, double omega_perp);

/**
 * Effective 1D coupling g_1D = 2 hbar a_s omega_perp / (1 - 1.4603 a_s/a_perp).
 * Throws a validation error at or past the confinement-induced resonance
 * (denominator <= 0).
 */
double compute_g1d(double atom_mass, double scattering_length, double omega_perp);

// Weak-interaction limit, g_1D = 2 hbar a_s omega_perp.
double compute_g1d_weak(double scattering_length, double omega_perp);

DerivedScales derive_scales(const GasParameters& p);

RegimeReport check_1d_regime(const GasParameters& p);

} // namespace q1d
