#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "q1d/dynamics.hpp"
#include "q1d/ensembles.hpp"
#include "q1d/stats.hpp"

namespace q1d {

/**
 * Relative phase sampled at selected grid points, R x P row-major. The
 * common currency between phonon ensembles, sine-Gordon field ensembles and
 * the correlation estimators.
 */
struct PhaseSamples {
  std::vector<std::size_t> indices;
  std::vector<double> z;
  std::size_t realizations = 0;
  std::vector<double> phi;
  double time = 0;
  double dz = 0;
  std::uint64_t seed = 0;  // carried along for bootstrap stream derivation

  std::size_t points() const { return indices.size(); }
  double& at(std::size_t r, std::size_t p) { return phi[r * points() + p]; }
  double at(std::size_t r, std::size_t p) const { return phi[r * points() + p]; }
};

PhaseSamples phase_samples(const PhononEnsemble& ensemble, double t,
                           std::span<const std::size_t> indices, int threads = 0);

PhaseSamples phase_samples(const std::vector<std::vector<double>>& fields,
                           const SpatialGrid& grid, std::span<const std::size_t> indices,
                           std::uint64_t seed = 0);

// Contiguous indices of the central `fraction` of the grid.
std::vector<std::size_t> central_window_indices(const SpatialGrid& grid, double fraction);

/** Two-point phase correlation matrix C(z1,z2) = <exp i(phi1 - phi2)>. */
struct CorrelationMatrix {
  std::vector<double> z;
  std::vector<std::complex<double>> c;  // n x n, C(i,i) = 1 exactly
  std::vector<double> se;               // sample SE of Re c
  std::size_t n = 0;
  std::size_t realizations = 0;
  double time = 0;

  std::complex<double> at(std::size_t i, std::size_t j) const { return c[i * n + j]; }
  double se_at(std::size_t i, std::size_t j) const { return se[i * n + j]; }
};

CorrelationMatrix phase_correlation_matrix(const PhaseSamples& samples);

/**
 * Stationary two-point correlation C(zbar) averaged over pairs inside the
 * central window. Standard errors are realization-level bootstrap.
 */
struct CorrelationCurve {
  std::vector<double> zbar;
  std::vector<double> c;
  std::vector<double> se;
  std::size_t realizations = 0;
  double time = 0;
};

CorrelationCurve stationary_correlation(const PhaseSamples& window_samples,
                                        std::span<const double> separations = {},
                                        std::size_t bootstrap_resamples = 200);

CorrelationCurve stationary_correlation(const PhononEnsemble& ensemble, double t,
                                        double window_fraction = 0.5,
                                        std::span<const double> separations = {},
                                        std::size_t bootstrap_resamples = 200,
                                        int threads = 0);

/**
 * C(zbar, t) over a time scan, settling times and horizon velocity. The
 * settling time t*(zbar) is the first scan time from which C stays within
 * `settle_band` (relative, widened by twice the point's standard error) of
 * its long-time value; v_fit comes from the through-origin fit
 * t* = zbar / v. horizon_flatness is the maximum relative deviation of C
 * from the beyond-horizon plateau at each time while that plateau is still
 * resolvable (> 0.2): outside the cone correlations do not decay with
 * distance. Keep the scan well inside the first boundary-reflection time;
 * in a box, wall echoes re-enter the window and end the plateau.
 */
struct LightConeScan {
  std::vector<double> times;
  std::vector<double> zbar;
  std::vector<double> c;   // times x zbar
  std::vector<double> se;  // times x zbar
  std::vector<double> c_longtime;
  std::vector<double> t_star;  // NaN where never settled
  double v_fit = 0;
  double v_fit_se = 0;
  double r2 = 0;
  double horizon_flatness = 0;

  double c_at(std::size_t it, std::size_t is) const { return c[it * zbar.size() + is]; }
};

LightConeScan light_cone_scan(const PhononEnsemble& ensemble, std::span<const double> times,
                              std::span<const double> separations,
                              double window_fraction = 0.5, double settle_band = 0.05,
                              int threads = 0);

/**
 * N-point correlation G(N) = <prod_i dphi_i> of phase differences
 * dphi_i = phi(z_i) - phi(z_i'), with the connected part obtained from the
 * moment-to-cumulant recursion over set partitions. N up to 10.
 */
struct NPointResult {
  int order = 0;
  double full = 0;
  double connected = 0;
  double disconnected = 0;
  double connected_se = 0;
};

NPointResult npoint_phase_correlation(const PhaseSamples& samples,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      std::size_t bootstrap_resamples = 200);

/**
 * Joint cumulant of the variables {1..order} given a moment oracle over
 * index subsets (bitmask). Exposed so exact (analytic) moments can be fed
 * through the same recursion used on sample moments.
 */
double connected_from_moments(std::size_t order,
                              const std::function<double(std::uint32_t)>& moment);

/** Interference-contrast statistics over one integration length. */
struct ContrastStatistics {
  double length = 0;          // actual window length used (multiple of dz)
  double mean_c2 = 0;         // <C^2>
  std::vector<double> alpha;  // C^2 / <C^2> per realization
  std::vector<double> c2;
  std::vector<double> phase;  // arg A per realization
  stats::Histogram fdf;       // of alpha
};

ContrastStatistics contrast_fdf(const PhaseSamples& window_samples, double integration_length,
                                std::size_t bins = 40);

ContrastStatistics contrast_fdf(const PhononEnsemble& ensemble, double t,
                                double integration_length, std::size_t bins = 40,
                                int threads = 0);

/** <C^2>(L) curve with the flat-to-1/L crossover length. */
struct ContrastLengthCurve {
  std::vector<double> length;
  std::vector<double> mean_c2;
  std::vector<double> se;
  double crossover_length = 0;
};

ContrastLengthCurve mean_sq_contrast_vs_length(const PhononEnsemble& ensemble, double t,
                                               std::span<const double> lengths,
                                               std::size_t bootstrap_resamples = 200,
                                               int threads = 0);

/** Phase-difference FDF at one separation, pooled over window positions. */
struct PhaseDiffFdf {
  double separation = 0;
  stats::Histogram hist;
  std::vector<double> samples;
};

PhaseDiffFdf phase_diff_fdf(const PhaseSamples& window_samples, double separation,
                            std::size_t bins, double lo, double hi);

/** Joint (phase of A, alpha) histogram: the polar FDF. */
struct PolarHistogram {
  std::vector<double> phase_edges;
  std::vector<double> alpha_edges;
  std::vector<double> prob;  // nphase x nalpha, sums to 1
};

PolarHistogram joint_contrast_phase_histogram(const ContrastStatistics& cs,
                                              std::size_t phase_bins, std::size_t alpha_bins);

} // namespace q1d
