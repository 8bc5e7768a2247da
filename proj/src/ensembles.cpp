#include "q1d/ensembles.hpp"

#include <cmath>
#include <fstream>

#include "q1d/constants.hpp"
#include "q1d/error.hpp"
#include "q1d/io.hpp"
#include "q1d/parallel.hpp"
#include "q1d/rng.hpp"

namespace q1d {

using constants::hbar;
using constants::kB;

namespace {

PhononEnsemble make_empty(std::shared_ptr<const ModeBasis> basis, std::size_t realizations,
                          std::uint64_t seed, std::string sampler) {
  require(basis != nullptr, "sampler: basis must not be null");
  require(realizations >= 1, "sampler: need at least one realization");
  PhononEnsemble e;
  e.basis = std::move(basis);
  e.realizations = realizations;
  e.amplitudes.assign(realizations * e.basis->size(), {0.0, 0.0});
  e.sampler = std::move(sampler);
  e.seed = seed;
  return e;
}

} // namespace

PhononEnsemble sample_thermal(std::shared_ptr<const ModeBasis> basis, double temperature,
                              std::size_t realizations, std::uint64_t seed,
                              const ThermalOptions& opts, int threads) {
  require(temperature >= 0, "sample_thermal: temperature must be non-negative");
  auto e = make_empty(std::move(basis), realizations, seed,
                      opts.include_vacuum ? "thermal+vacuum" : "thermal");
  const std::size_t m = e.mode_count();
  std::vector<double> sigma(m);  // per-quadrature standard deviation
  for (std::size_t j = 0; j < m; ++j) {
    const double occ = kB * temperature / (hbar * e.basis->mode(j).omega);
    double var = 0.5 * occ;
    if (opts.include_vacuum) var += 0.25;
    sigma[j] = std::sqrt(var);
  }
  parallel_for(realizations, threads, [&](std::size_t r) {
    Rng rng(stream_seed(seed, r));
    auto row = e.row(r);
    for (std::size_t j = 0; j < m; ++j)
      row[j] = {sigma[j] * rng.normal(), sigma[j] * rng.normal()};
  });
  return e;
}

std::vector<double> shot_noise_occupations(const ModeBasis& basis, const DerivedScales& scales) {
  std::vector<double> occ(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j)
    occ[j] = scales.chemical_potential / (2.0 * hbar * basis.mode(j).omega);
  return occ;
}

PhononEnsemble sample_fast_split(std::shared_ptr<const ModeBasis> basis,
                                 const DerivedScales& scales, std::size_t realizations,
                                 std::uint64_t seed, int threads) {
  auto occ = shot_noise_occupations(*basis, scales);
  auto e = sample_squeezed_split(std::move(basis), occ, realizations, seed, threads);
  e.sampler = "fast_split";
  return e;
}

PhononEnsemble sample_squeezed_split(std::shared_ptr<const ModeBasis> basis,
                                     std::span<const double> occupations,
                                     std::size_t realizations, std::uint64_t seed, int threads) {
  auto e = make_empty(std::move(basis), realizations, seed, "squeezed_split");
  const std::size_t m = e.mode_count();
  require(occupations.size() == m, "sample_squeezed_split: occupation count mismatch");
  std::vector<double> sigma(m);
  for (std::size_t j = 0; j < m; ++j) {
    require(occupations[j] >= 0, "sample_squeezed_split: occupations must be non-negative");
    sigma[j] = std::sqrt(occupations[j]);
  }
  parallel_for(realizations, threads, [&](std::size_t r) {
    Rng rng(stream_seed(seed, r));
    auto row = e.row(r);
    for (std::size_t j = 0; j < m; ++j) row[j] = {sigma[j] * rng.normal(), 0.0};
  });
  return e;
}

BinomialSplitResult sample_binomial_split(std::uint64_t atom_number, double p_left,
                                          std::size_t realizations, std::uint64_t seed,
                                          int threads) {
  require(atom_number >= 1, "sample_binomial_split: need at least one atom");
  require(p_left > 0.0 && p_left < 1.0, "sample_binomial_split: p_left must be in (0,1)");
  require(realizations >= 1, "sample_binomial_split: need at least one realization");
  BinomialSplitResult out;
  out.atom_number = atom_number;
  out.p_left = p_left;
  out.n_left.assign(realizations, 0);
  parallel_for(realizations, threads, [&](std::size_t r) {
    Rng rng(stream_seed(seed, r));
    out.n_left[r] = rng.binomial(atom_number, p_left);
  });
  return out;
}

void write_ensemble_csv(const PhononEnsemble& ensemble, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail_runtime("write_ensemble_csv: cannot open " + path);
  os << "# sampler: " << ensemble.sampler << "\n";
  os << "# seed: " << ensemble.seed << "\n";
  os << "# basis: " << ensemble.basis->describe() << "\n";
  os << "realization,mode,re_a,im_a\n";
  for (std::size_t r = 0; r < ensemble.realizations; ++r)
    for (std::size_t j = 0; j < ensemble.mode_count(); ++j) {
      const auto& a = ensemble.a(r, j);
      os << r << ',' << ensemble.basis->mode(j).index << ',' << io::format_double(a.real())
         << ',' << io::format_double(a.imag()) << "\n";
    }
  if (!os) fail_runtime("write_ensemble_csv: write failed for " + path);
}

} // namespace q1d
