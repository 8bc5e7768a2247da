#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "q1d/ensembles.hpp"
#include "q1d/observables.hpp"
#include "q1d/scales.hpp"
#include "q1d/tof.hpp"

namespace q1d {

/** Common result shape of the inverse problems. */
struct FitReport {
  double estimate = 0;
  double ci_low = 0;   // 68% interval
  double ci_high = 0;
  std::string units;
  double objective = 0;  // chi^2 (thermometry) or rms ln-residual (decay)
  std::size_t iterations = 0;
  bool converged = false;
  std::string calibration;  // reference the estimate leans on
  std::string diagnostic;   // set when !converged
};

/** Weighted fit of C(zbar) = A exp(-zbar / decay_length). */
struct DecayFit {
  double amplitude = 0;
  double decay_length = 0;
  double decay_length_se = 0;
  double r2 = 0;            // of the ln-linear fit
  double residual_rms = 0;  // rms ln-residual: structure above ~0.1 is not exponential
  std::size_t points_used = 0;
};

DecayFit fit_exponential_decay(std::span<const double> zbar, std::span<const double> c,
                               std::span<const double> se, double c_min = 0.05,
                               double c_max = 0.95);

/**
 * First index of `zbar` at or beyond the shortest wavelength an M-mode box
 * basis resolves (2 L / M). Sampled correlations flatten below that scale,
 * so decay fits — table entries and measured curves alike — start here.
 */
std::size_t resolved_start(std::span<const double> zbar, double box_length, std::size_t modes);

/**
 * Thermal decay-length calibration lambda_C(T), built once by brute force
 * from thermal ensembles and interpolated log-log. Keeping the prefactor
 * empirical means the thermometer and the forward model share every
 * truncation and windowing choice, so closed loops are unbiased.
 */
class CalibrationTable {
public:
  CalibrationTable(std::vector<double> temperatures, std::vector<double> decay_lengths);

  double decay_length_for(double temperature) const;
  double temperature_for(double decay_length) const;
  const std::vector<double>& temperatures() const { return temperatures_; }
  const std::vector<double>& decay_lengths() const { return decay_lengths_; }
  std::string describe() const;

private:
  std::vector<double> temperatures_;   // ascending
  std::vector<double> decay_lengths_;  // descending in T
};

struct CalibrationSpec {
  GasParameters gas;  // box geometry: sets the basis the table is built on
  std::size_t grid_points = 512;
  std::size_t mode_count = 0;  // 0 = same default rule as the scenarios
  std::size_t realizations = 400;
  std::size_t temperature_count = 8;
  double t_min = 0;  // K; working range must bracket later queries
  double t_max = 0;
  std::uint64_t seed = 1;
};

CalibrationTable build_thermal_calibration(const CalibrationSpec& spec, int threads = 0);

/**
 * Decay length of a measured correlation curve mapped through the thermal
 * calibration: the effective temperature of a dephased state. Requires the
 * curve to decay by at least 1/e inside its window.
 */
FitReport fit_teff_from_decay(const CorrelationCurve& curve, const CalibrationTable& calib);

/**
 * Non-negative least squares min |A x - b|^2 over x >= 0 (active-set), with
 * optional Tikhonov shrinkage lambda = ridge * trace(A^T A) / cols.
 * `a` is row-major rows x cols.
 */
std::vector<double> solve_nnls(std::size_t rows, std::size_t cols, std::span<const double> a,
                               std::span<const double> b, double ridge = 0.0);

struct GgeOptions {
  std::size_t mode_count = 9;
  double ridge = 1e-4;          // 0 disables shrinkage (exact-recovery tests)
  double contrast_floor = 0.05; // pairs ever below this C are masked out
  std::size_t jackknife_blocks = 50;
};

/** Phonon occupations recovered from dephased phase correlations. */
struct GgeOccupations {
  std::vector<double> occupation;   // n_j, j = 1..modes
  std::vector<double> se;           // leave-block-out jackknife
  std::vector<double> shot_noise;   // fast-split reference occupation per mode
  std::vector<bool> squeezed;       // n_j below shot noise by >= 3 se
  double residual_rms = 0;          // of the variance fit
  std::size_t modes = 0;
  std::size_t realizations = 0;
  std::size_t pairs_used = 0;
};

/**
 * Design weights of the dephased Gaussian model
 *   -2 ln C(z_a, z_b) = sum_j n_j w_j(z_a, z_b),
 * w_j = phase_norm_j^2 (f_j(z_a) - f_j(z_b))^2 / 2 (half the energy of each
 * mode sits in the phase quadrature after dephasing). Row-major, one row
 * per pair (a < b over `indices`), mode_count columns.
 */
std::vector<double> gge_design_matrix(const ModeBasis& basis,
                                      std::span<const std::size_t> indices,
                                      std::size_t mode_count);

/**
 * Core solver on pair-averaged variances y = -2 ln C (already comb-averaged
 * over times). `mask` marks usable pairs. No error bars at this level.
 */
std::vector<double> fit_gge_occupations(const ModeBasis& basis,
                                        std::span<const std::size_t> indices,
                                        std::span<const double> variance_pairs,
                                        std::span<const char> mask, const GgeOptions& options);

/**
 * Times at which sin^2(omega_j t) averages to exactly 1/2 for every box
 * mode j < count: a comb of `count` points over one fundamental period.
 * Evaluating correlations on this comb realizes the dephased time average
 * without waiting for true dephasing.
 */
std::vector<double> dephasing_time_comb(const ModeBasis& basis, std::size_t count);

GgeOccupations fit_gge(const PhononEnsemble& ensemble, const DerivedScales& scales,
                       std::span<const double> times, std::span<const std::size_t> indices,
                       const GgeOptions& options = {}, int threads = 0);

/**
 * Grid-scan chi^2 thermometry of a ripple curve against a caller-supplied
 * forward model (same simulation pipeline, different T). 68% interval from
 * the chi^2_min + 1 contour; boundary or flat objectives are flagged.
 */
FitReport fit_temperature_ripples(const RippleCurve& observed,
                                  std::span<const double> temperature_grid,
                                  const std::function<RippleCurve(double)>& forward_model);

} // namespace q1d
