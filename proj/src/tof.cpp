#include "q1d/tof.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"
#include "q1d/parallel.hpp"
#include "q1d/stats.hpp"

namespace q1d {

namespace {

std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe; execution is

// In-place complex FFT pair of one fixed size. Plans use FFTW_ESTIMATE so
// the chosen algorithm (and therefore the last bits of the output) depends
// only on the transform size, never on timing.
class Fft {
public:
  explicit Fft(std::size_t n) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    require(buf_ != nullptr, "tof: fftw allocation failed");
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  std::size_t size() const { return n_; }
  void forward() { fftw_execute(fwd_); }
  // Normalized inverse, so forward followed by backward is the identity.
  void backward() {
    fftw_execute(bwd_);
    auto* a = data();
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) a[i] *= inv;
  }

private:
  std::size_t n_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

Fft& worker_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

double fresnel_length(double t_tof, double mass) {
  return std::sqrt(constants::hbar * t_tof / mass);
}

// Wavenumber of FFT bin i on an n-point grid with spacing dz.
double wavenumber(std::size_t i, std::size_t n, double dz) {
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  auto k = static_cast<std::ptrdiff_t>(i);
  if (k >= half) k -= static_cast<std::ptrdiff_t>(n);
  return 2.0 * constants::pi * static_cast<double>(k) / (static_cast<double>(n) * dz);
}

struct Layout {
  std::size_t n_fft = 0;
  std::size_t source_begin = 0;
  std::size_t pad_cells = 0;
  SpatialGrid grid;
};

Layout expanded_layout(const SpatialGrid& grid, double t_tof, double mass,
                       const TofOptions& options) {
  require(t_tof > 0, "expand_tof: expansion time must be positive");
  require(mass > 0, "expand_tof: mass must be positive");
  require(options.pad_factor >= 4.0,
          "expand_tof: guard band below 4 Fresnel lengths invites wrap-around artifacts");
  const double pad = options.pad_factor * fresnel_length(t_tof, mass) +
                     4.0 * options.resolution_sigma;
  const auto pad_cells = static_cast<std::size_t>(std::ceil(pad / grid.dz()));
  const std::size_t wanted = grid.size() + 2 * pad_cells;
  const std::size_t n_fft = std::bit_ceil(wanted);
  const std::size_t lead = (n_fft - grid.size()) / 2;
  Layout l{n_fft, lead, pad_cells,
           SpatialGrid(grid.z_min() - static_cast<double>(lead) * grid.dz(), grid.dz(), n_fft)};
  return l;
}

void propagate_into(const Layout& l, std::span<const double> phi, double n1d, double t_tof,
                    double mass, const TofOptions& options, TofProfile& out) {
  auto& fft = worker_fft(l.n_fft);
  auto* psi = fft.data();
  std::fill(psi, psi + l.n_fft, std::complex<double>{0, 0});
  const double amp = std::sqrt(n1d);
  for (std::size_t i = 0; i < phi.size(); ++i)
    psi[l.source_begin + i] = {amp * std::cos(phi[i]), amp * std::sin(phi[i])};

  fft.forward();
  const double dz = l.grid.dz();
  for (std::size_t i = 0; i < l.n_fft; ++i) {
    const double k = wavenumber(i, l.n_fft, dz);
    const double ph = -0.5 * constants::hbar * k * k * t_tof / mass;
    psi[i] *= std::complex<double>{std::cos(ph), std::sin(ph)};
  }
  fft.backward();

  out.density.resize(l.n_fft);
  for (std::size_t i = 0; i < l.n_fft; ++i) out.density[i] = std::norm(psi[i]);

  if (options.resolution_sigma > 0) {
    // Gaussian blur of the density, spectral again to stay O(n log n).
    for (std::size_t i = 0; i < l.n_fft; ++i) psi[i] = {out.density[i], 0.0};
    fft.forward();
    const double s2 = options.resolution_sigma * options.resolution_sigma;
    for (std::size_t i = 0; i < l.n_fft; ++i) {
      const double k = wavenumber(i, l.n_fft, dz);
      psi[i] *= std::exp(-0.5 * k * k * s2);
    }
    fft.backward();
    for (std::size_t i = 0; i < l.n_fft; ++i) out.density[i] = std::max(0.0, psi[i].real());
  }
}

// Bulk cell range: the source region shrunk on each side by the guard-band
// width, which the propagation already sized to cover edge diffraction
// (>= 4 Fresnel lengths plus the blur width). Not source_begin: that also
// holds the power-of-2 rounding slack, which says nothing about diffraction.
std::pair<std::size_t, std::size_t> bulk_range(const TofProfile& p) {
  const std::size_t margin_cells = p.bulk_margin;
  const std::size_t lo = p.source_begin + margin_cells;
  const std::size_t hi = p.source_end > margin_cells ? p.source_end - margin_cells : 0;
  require(lo + 16 < hi, "ripple statistics: bulk window too small after edge margins");
  return {lo, hi};
}

} // namespace

TofProfile expand_tof(std::span<const double> phi, const SpatialGrid& grid, double n1d,
                      double t_tof, double mass, const TofOptions& options) {
  require(phi.size() == grid.size(), "expand_tof: phase/grid size mismatch");
  require(n1d > 0, "expand_tof: density must be positive");
  const Layout l = expanded_layout(grid, t_tof, mass, options);
  TofProfile p{l.grid, {}, t_tof, n1d * grid.extent(), l.source_begin,
               l.source_begin + grid.size(), l.pad_cells};
  propagate_into(l, phi, n1d, t_tof, mass, options, p);
  return p;
}

std::vector<TofProfile> expand_tof_ensemble(const std::vector<std::vector<double>>& phases,
                                            const SpatialGrid& grid, double n1d, double t_tof,
                                            double mass, const TofOptions& options,
                                            int threads) {
  require(!phases.empty(), "expand_tof_ensemble: empty ensemble");
  for (const auto& phi : phases)
    require(phi.size() == grid.size(), "expand_tof_ensemble: phase/grid size mismatch");
  const Layout l = expanded_layout(grid, t_tof, mass, options);
  const TofProfile prototype{l.grid, {}, t_tof, n1d * grid.extent(), l.source_begin,
                             l.source_begin + grid.size(), l.pad_cells};
  std::vector<TofProfile> out(phases.size(), prototype);
  parallel_for(phases.size(), threads, [&](std::size_t r) {
    propagate_into(l, phases[r], n1d, t_tof, mass, options, out[r]);
  });
  return out;
}

RippleCurve ripple_correlation(std::span<const TofProfile> profiles, double max_separation,
                               std::size_t bootstrap_resamples, std::uint64_t seed) {
  require(profiles.size() >= 100, "ripple_correlation: needs at least 100 realizations");
  const auto& first = profiles.front();
  const double dz = first.grid.dz();
  const auto [lo, hi] = bulk_range(first);
  const auto kmax = static_cast<std::size_t>(std::llround(max_separation / dz));
  require(kmax >= 1, "ripple_correlation: max separation below the grid spacing");
  require(lo + kmax + 16 < hi, "ripple_correlation: max separation too large for the bulk");

  const std::size_t rn = profiles.size();
  // per-realization bulk mean and raw lag products
  std::vector<double> rho_bar(rn);
  std::vector<double> prod(rn * (kmax + 1));
  for (std::size_t r = 0; r < rn; ++r) {
    const auto& rho = profiles[r].density;
    require(profiles[r].grid.size() == first.grid.size() &&
                profiles[r].source_begin == first.source_begin,
            "ripple_correlation: profiles come from different layouts");
    double acc = 0;
    for (std::size_t i = lo; i < hi; ++i) acc += rho[i];
    rho_bar[r] = acc / static_cast<double>(hi - lo);
    for (std::size_t k = 0; k <= kmax; ++k) {
      double pk = 0;
      const std::size_t n_pairs = hi - lo - k;
      for (std::size_t i = lo; i + k < hi; ++i) pk += rho[i] * rho[i + k];
      prod[r * (kmax + 1) + k] = pk / static_cast<double>(n_pairs);
    }
  }
  const double mean_rho = stats::mean(rho_bar);

  RippleCurve curve;
  curve.mean_density = mean_rho;
  curve.realizations = rn;
  auto counts = bootstrap_resamples > 0
                    ? stats::bootstrap_counts(rn, bootstrap_resamples, seed ^ 0x7f4a7c15ull)
                    : std::vector<std::vector<std::uint32_t>>{};
  std::vector<double> col(rn);
  for (std::size_t k = 0; k <= kmax; ++k) {
    for (std::size_t r = 0; r < rn; ++r) col[r] = prod[r * (kmax + 1) + k];
    const double g2 = stats::mean(col) / (mean_rho * mean_rho);
    double se = 0;
    if (!counts.empty()) {
      std::vector<double> vals(counts.size());
      for (std::size_t b = 0; b < counts.size(); ++b) {
        double num = 0, den = 0;
        for (std::size_t r = 0; r < rn; ++r) {
          const double w = counts[b][r];
          num += w * col[r];
          den += w * rho_bar[r];
        }
        num /= static_cast<double>(rn);
        den /= static_cast<double>(rn);
        vals[b] = num / (den * den);
      }
      se = std::sqrt(stats::variance(vals));
    }
    curve.x.push_back(static_cast<double>(k) * dz);
    curve.g2.push_back(g2);
    curve.se.push_back(se);
  }
  return curve;
}

double ripple_variance(std::span<const TofProfile> profiles) {
  require(!profiles.empty(), "ripple_variance: empty ensemble");
  const auto& first = profiles.front();
  const auto [lo, hi] = bulk_range(first);
  double mean = 0;
  for (const auto& p : profiles) {
    double acc = 0;
    for (std::size_t i = lo; i < hi; ++i) acc += p.density[i];
    mean += acc / static_cast<double>(hi - lo);
  }
  mean /= static_cast<double>(profiles.size());
  double var = 0;
  for (const auto& p : profiles) {
    double acc = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = p.density[i] - mean;
      acc += d * d;
    }
    var += acc / static_cast<double>(hi - lo);
  }
  var /= static_cast<double>(profiles.size());
  return var / (mean * mean);
}

} // namespace q1d
