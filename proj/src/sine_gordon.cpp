#include "q1d/sine_gordon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"
#include "q1d/parallel.hpp"
#include "q1d/rng.hpp"

namespace q1d {

namespace {

void validate_params(const SineGordonParams& p) {
  require(p.temperature > 0, "sine-Gordon: temperature must be positive");
  require(p.density > 0, "sine-Gordon: density must be positive");
  require(p.mass > 0, "sine-Gordon: mass must be positive");
  require(p.tunnel_rate >= 0, "sine-Gordon: tunnel rate must be non-negative");
}

// Dimensionless couplings of the discretized measure:
//   beta E = bond * sum (phi_{i+1} - phi_i)^2 - site * sum cos phi_i
struct Couplings {
  double bond = 0;
  double site = 0;
  double sigma_rw = 0;  // J = 0 bond standard deviation, sqrt(4 dz / lambda_T)
};

Couplings couplings_for(const SpatialGrid& grid, const SineGordonParams& p) {
  const double beta = 1.0 / (constants::kB * p.temperature);
  const double stiffness = constants::hbar * constants::hbar * p.density / (4.0 * p.mass);
  Couplings c;
  c.bond = beta * stiffness / grid.dz();
  c.site = beta * 2.0 * constants::hbar * p.tunnel_rate * p.density * grid.dz();
  c.sigma_rw = std::sqrt(0.5 / c.bond);
  return c;
}

// One Metropolis sweep over sites 1..n-1 (site 0 is the reference).
// Returns the number of accepted moves.
std::size_t metropolis_sweep(std::vector<double>& phi, const Couplings& c, double step,
                             Rng& rng) {
  const std::size_t n = phi.size();
  std::size_t accepted = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double old = phi[i];
    const double prop = old + step * rng.normal();
    const double dl = phi[i - 1];
    double d_beta_e = c.bond * ((prop - dl) * (prop - dl) - (old - dl) * (old - dl));
    if (i + 1 < n) {
      const double dr = phi[i + 1];
      d_beta_e += c.bond * ((dr - prop) * (dr - prop) - (dr - old) * (dr - old));
    }
    if (c.site != 0) d_beta_e -= c.site * (std::cos(prop) - std::cos(old));
    if (d_beta_e <= 0 || rng.uniform() < std::exp(-d_beta_e)) {
      phi[i] = prop;
      ++accepted;
    }
  }
  return accepted;
}

/**
 * Overrelaxation sweep: reflect each site through the mean of its Gaussian
 * (bond-term) conditional and Metropolis-correct for the cos term. The
 * reflection preserves the gradient energy exactly, so the proposal is its
 * own inverse and the acceptance only sees the site term. Mixed with the
 * stochastic sweeps this relaxes long-wavelength roughness in O(xi/dz)
 * sweeps instead of the O((xi/dz)^2) random walk of local updates alone.
 */
std::size_t overrelax_sweep(std::vector<double>& phi, const Couplings& c, Rng& rng) {
  const std::size_t n = phi.size();
  std::size_t accepted = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double mu = i + 1 < n ? 0.5 * (phi[i - 1] + phi[i + 1]) : phi[i - 1];
    const double prop = 2.0 * mu - phi[i];
    const double d_beta_e = -c.site * (std::cos(prop) - std::cos(phi[i]));
    if (d_beta_e <= 0 || rng.uniform() < std::exp(-d_beta_e)) {
      phi[i] = prop;
      ++accepted;
    }
  }
  return accepted;
}

// Composite update: one stochastic sweep for ergodicity, overrelaxation
// passes for wavelength transport, winding proposals for the kink sector.
constexpr std::size_t overrelax_per_sweep = 3;

// The minimizer of bond (phi')^2 + site (1 - cos phi) interpolating 0 ->
// 2 pi is phi(z) = 4 atan exp(z / w) with this width (in grid cells it is
// dz sqrt(bond / site)).
double kink_width(const SpatialGrid& grid, const Couplings& c) {
  return grid.dz() * std::sqrt(c.bond / c.site);
}

/**
 * Collective winding moves: propose phi += s * 2 pi K((z - zc) / w) with
 * K the kink ramp, zc uniform and s = +-1. The ramp is snapped to exactly
 * 0 (2 pi) beyond 8 w left (right) of the center, so the energy difference
 * is exact yet local: outside the support the site term is 2 pi periodic
 * and the bond differences are unchanged. Centers stay one support away
 * from the ends, which keeps site 0 (the reference) untouched.
 */
std::size_t kink_moves(std::vector<double>& phi, const SpatialGrid& grid, const Couplings& c,
                       std::size_t proposals, Rng& rng) {
  const std::size_t n = phi.size();
  const double w = kink_width(grid, c);
  const double half = 8.0 * w;
  const double lo = grid.z(1) + half;
  const double hi = grid.z(n - 1) - half;
  if (!(hi > lo)) return 0;  // chain shorter than one kink support: skip
  const double two_pi = 2.0 * constants::pi;
  std::size_t accepted = 0;
  std::vector<double> delta;
  for (std::size_t k = 0; k < proposals; ++k) {
    const double zc = rng.uniform(lo, hi);
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const auto i_lo = static_cast<std::size_t>(std::ceil((zc - half - grid.z(0)) / grid.dz()));
    const auto i_hi = static_cast<std::size_t>(std::floor((zc + half - grid.z(0)) / grid.dz()));
    delta.assign(i_hi - i_lo + 1, 0.0);
    for (std::size_t i = i_lo; i <= i_hi; ++i)
      delta[i - i_lo] = sign * 4.0 * std::atan(std::exp((grid.z(i) - zc) / w));
    const auto d_at = [&](std::size_t i) {
      if (i < i_lo) return 0.0;
      if (i > i_hi) return sign * two_pi;
      return delta[i - i_lo];
    };
    double d_beta_e = 0;
    for (std::size_t i = i_lo - 1; i <= i_hi && i + 1 < n; ++i) {
      const double od = phi[i + 1] - phi[i];
      const double nd = od + d_at(i + 1) - d_at(i);
      d_beta_e += c.bond * (nd * nd - od * od);
    }
    for (std::size_t i = i_lo; i <= i_hi; ++i)
      d_beta_e -= c.site * (std::cos(phi[i] + delta[i - i_lo]) - std::cos(phi[i]));
    if (d_beta_e <= 0 || rng.uniform() < std::exp(-d_beta_e)) {
      for (std::size_t i = i_lo; i <= i_hi; ++i) phi[i] += delta[i - i_lo];
      for (std::size_t i = i_hi + 1; i < n; ++i) phi[i] += sign * two_pi;
      ++accepted;
    }
  }
  return accepted;
}

std::size_t kink_proposals_per_sweep(std::size_t n) { return std::max<std::size_t>(1, n / 128); }

/**
 * Exact draw from the harmonic approximation (cos phi -> 1 - phi^2/2):
 * a pinned Gauss-Markov chain. Backward precision recursion for the
 * integrated-out right tail, then forward conditional sampling. Used as
 * the chain start: it puts the long-wavelength roughness at the right
 * scale immediately, so the local dynamics only has to relax kinks and
 * anharmonic corrections instead of diffusing wavelengths for
 * O((xi_J/dz)^2) sweeps.
 */
void harmonic_start(std::vector<double>& phi, const Couplings& c, Rng& rng) {
  const std::size_t n = phi.size();
  const double s2 = 0.5 * c.site;
  std::vector<double> a(n, 0.0);  // effective quadratic weight of the right tail
  for (std::size_t i = n - 1; i-- > 0;)
    a[i] = c.bond * (s2 + a[i + 1]) / (c.bond + s2 + a[i + 1]);
  phi[0] = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double b = c.bond + s2 + a[i];
    phi[i] = c.bond * phi[i - 1] / b + rng.normal() / std::sqrt(2.0 * b);
  }
}

// Integrated autocorrelation time of a scalar series, Sokal windowing:
// tau = 1 + 2 sum rho(t) up to the first lag where rho drops below 0.05.
// Returns a negative value when the window never closes (not converged).
double integrated_autocorr(std::span<const double> series) {
  const std::size_t n = series.size();
  const double m = stats::mean(series);
  double var = 0;
  for (double v : series) var += (v - m) * (v - m);
  if (var <= 0) return 1.0;  // constant series: uncorrelated by convention
  double tau = 1.0;
  const std::size_t max_lag = n / 4;
  for (std::size_t t = 1; t <= max_lag; ++t) {
    double acc = 0;
    for (std::size_t i = 0; i + t < n; ++i) acc += (series[i] - m) * (series[i + t] - m);
    const double rho = acc / var;
    if (rho < 0.05) return tau;
    tau += 2.0 * rho;
  }
  return -tau;  // window never closed within n/4 lags
}

struct PilotResult {
  double step = 0;
  double acceptance = 0;
  double kink_acceptance = 0;
  double tau = 0;
};

PilotResult run_pilot(const SpatialGrid& grid, const Couplings& c, std::uint64_t seed) {
  Rng rng(stream_seed(seed, 0x9110e));
  std::vector<double> phi(grid.size());
  harmonic_start(phi, c, rng);
  double step = c.sigma_rw;
  const std::size_t kinks = kink_proposals_per_sweep(grid.size());

  // Step adaptation toward 40% acceptance, multiplicative updates.
  const std::size_t adapt_sweeps = 200;
  const std::size_t adapt_block = 10;
  const std::size_t moves_per_sweep = grid.size() - 1;
  std::size_t accepted = 0;
  for (std::size_t s = 1; s <= adapt_sweeps; ++s) {
    accepted += metropolis_sweep(phi, c, step, rng);
    for (std::size_t k = 0; k < overrelax_per_sweep; ++k) overrelax_sweep(phi, c, rng);
    kink_moves(phi, grid, c, kinks, rng);
    if (s % adapt_block == 0) {
      const double rate =
          static_cast<double>(accepted) / static_cast<double>(adapt_block * moves_per_sweep);
      step *= std::exp(rate - 0.4);
      step = std::clamp(step, 1e-4 * c.sigma_rw, 1e2 * c.sigma_rw);
      accepted = 0;
    }
  }

  // Autocorrelation at the frozen step. Two observables: beta E (fast,
  // short-wavelength content) and mean cos phi, which tracks the slow
  // sectors (winding number, long-wavelength roughness) that the energy
  // barely sees. The budget is set by the slower of the two. Grow the
  // pilot until the estimate is trusted (series at least 10x tau).
  std::size_t pilot = 400;
  const std::size_t pilot_cap = 12800;
  double tau = -1;
  double rate = 0;
  double kink_rate = 0;
  while (true) {
    std::vector<double> energy(pilot), order(pilot);
    std::size_t acc = 0;
    std::size_t kink_acc = 0;
    std::vector<double> work = phi;
    for (std::size_t s = 0; s < pilot; ++s) {
      acc += metropolis_sweep(work, c, step, rng);
      for (std::size_t k = 0; k < overrelax_per_sweep; ++k) overrelax_sweep(work, c, rng);
      kink_acc += kink_moves(work, grid, c, kinks, rng);
      double e = 0;
      for (std::size_t i = 0; i + 1 < work.size(); ++i) {
        const double d = work[i + 1] - work[i];
        e += c.bond * d * d;
      }
      double u = 0;
      for (double v : work) u += std::cos(v);
      if (c.site != 0) e -= c.site * u;
      energy[s] = e;
      order[s] = u / static_cast<double>(work.size());
    }
    rate = static_cast<double>(acc) / static_cast<double>(pilot * moves_per_sweep);
    kink_rate = static_cast<double>(kink_acc) / static_cast<double>(pilot * kinks);
    // discard the leading fifth: the chain is still drifting in
    const std::size_t skip = pilot / 5;
    const double tau_e = integrated_autocorr(std::span<const double>(energy).subspan(skip));
    const double tau_u = integrated_autocorr(std::span<const double>(order).subspan(skip));
    tau = (tau_e > 0 && tau_u > 0) ? std::max(tau_e, tau_u) : -1;
    if (tau > 0 && static_cast<double>(pilot - skip) >= 10.0 * tau) break;
    if (pilot >= pilot_cap)
      fail_runtime("sine-Gordon sampler did not converge: autocorrelation time exceeds " +
                   std::to_string(pilot_cap) + " pilot sweeps; refine the grid or raise T");
    pilot *= 2;
  }
  return {step, rate, kink_rate, tau};
}

} // namespace

double phase_locking_ratio(const SineGordonParams& p) {
  validate_params(p);
  if (p.tunnel_rate == 0) return 0;
  const double lambda_t =
      2.0 * constants::hbar * constants::hbar * p.density / (p.mass * constants::kB * p.temperature);
  return lambda_t / tunnel_length(p);
}

double tunnel_length(const SineGordonParams& p) {
  require(p.tunnel_rate > 0, "tunnel_length: needs J > 0");
  require(p.mass > 0, "tunnel_length: mass must be positive");
  return std::sqrt(constants::hbar / (4.0 * p.mass * p.tunnel_rate));
}

double kink_energy(const SineGordonParams& p) {
  validate_params(p);
  if (p.tunnel_rate == 0) return 0;  // E_kink ~ sqrt(J): the uncoupled limit is free
  const double grad = constants::hbar * constants::hbar * p.density / (4.0 * p.mass);
  const double well = 2.0 * constants::hbar * p.tunnel_rate * p.density;
  return 8.0 * std::sqrt(grad * well);
}

double sine_gordon_beta_energy(const SpatialGrid& grid, std::span<const double> phi,
                               const SineGordonParams& p) {
  validate_params(p);
  require(phi.size() == grid.size(), "sine_gordon_beta_energy: field/grid size mismatch");
  const auto c = couplings_for(grid, p);
  double e = 0;
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
    const double d = phi[i + 1] - phi[i];
    e += c.bond * d * d;
  }
  if (c.site != 0)
    for (double v : phi) e -= c.site * std::cos(v);
  return e;
}

SineGordonEnsemble sample_sine_gordon(const SpatialGrid& grid, const SineGordonParams& p,
                                      std::size_t realizations, std::uint64_t seed,
                                      std::size_t sweeps, int threads) {
  validate_params(p);
  require(realizations >= 1, "sample_sine_gordon: need at least one realization");
  const auto c = couplings_for(grid, p);

  SineGordonEnsemble e;
  e.seed = seed;
  e.fields.resize(realizations);

  if (p.tunnel_rate == 0) {
    // Free field: exact Gaussian random walk from the reference point.
    e.diagnostics.metropolis = false;
    e.diagnostics.sweeps_per_chain = 0;
    parallel_for(realizations, threads, [&](std::size_t r) {
      Rng rng(stream_seed(seed, r));
      auto& phi = e.fields[r].phi;
      phi.resize(grid.size());
      phi[0] = 0;
      for (std::size_t i = 1; i < phi.size(); ++i)
        phi[i] = phi[i - 1] + c.sigma_rw * rng.normal();
    });
    return e;
  }

  const double xi = tunnel_length(p);
  require(grid.dz() < xi / 4.0,
          "sample_sine_gordon: grid spacing must resolve the tunnel length (dz < xi_J/4)");

  const auto pilot = run_pilot(grid, c, seed);
  const auto burn_in = static_cast<std::size_t>(std::ceil(10.0 * pilot.tau));
  std::size_t chain_sweeps = sweeps;
  if (chain_sweeps == 0) {
    chain_sweeps = std::max<std::size_t>(burn_in + burn_in / 4, 100);
  } else if (burn_in > chain_sweeps) {
    fail_runtime("sample_sine_gordon: burn-in of " + std::to_string(burn_in) +
                 " sweeps (10x autocorrelation) exceeds the " + std::to_string(chain_sweeps) +
                 "-sweep budget");
  }
  e.diagnostics.step = pilot.step;
  e.diagnostics.acceptance = pilot.acceptance;
  e.diagnostics.kink_acceptance = pilot.kink_acceptance;
  e.diagnostics.autocorr_sweeps = pilot.tau;
  e.diagnostics.burn_in_sweeps = burn_in;
  e.diagnostics.sweeps_per_chain = chain_sweeps;

  const std::size_t kinks = kink_proposals_per_sweep(grid.size());
  parallel_for(realizations, threads, [&](std::size_t r) {
    Rng rng(stream_seed(seed, r));
    auto& phi = e.fields[r].phi;
    phi.resize(grid.size());
    harmonic_start(phi, c, rng);
    for (std::size_t s = 0; s < chain_sweeps; ++s) {
      metropolis_sweep(phi, c, pilot.step, rng);
      for (std::size_t k = 0; k < overrelax_per_sweep; ++k) overrelax_sweep(phi, c, rng);
      kink_moves(phi, grid, c, kinks, rng);
    }
  });
  return e;
}

PhaseSamples phase_samples(const SineGordonEnsemble& ensemble, const SpatialGrid& grid,
                           std::span<const std::size_t> indices) {
  std::vector<std::vector<double>> fields(ensemble.fields.size());
  for (std::size_t r = 0; r < fields.size(); ++r) fields[r] = ensemble.fields[r].phi;
  return phase_samples(fields, grid, indices, ensemble.seed);
}

} // namespace q1d
