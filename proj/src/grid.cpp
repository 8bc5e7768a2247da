#include "q1d/grid.hpp"

#include <algorithm>
#include <cmath>

#include "q1d/error.hpp"

namespace q1d {

SpatialGrid::SpatialGrid(double z_min, double dz, std::size_t n_z)
    : z_min_(z_min), dz_(dz), n_z_(n_z) {
  require(std::isfinite(z_min), "grid: z_min must be finite");
  require(std::isfinite(dz) && dz > 0.0, "grid: dz must be positive");
  require(n_z >= 4, "grid: need at least 4 points");
}

SpatialGrid SpatialGrid::centered(double length, std::size_t n_z) {
  require(length > 0.0, "grid: length must be positive");
  require(n_z >= 4, "grid: need at least 4 points");
  return SpatialGrid(-0.5 * length, length / static_cast<double>(n_z), n_z);
}

std::vector<double> SpatialGrid::points() const {
  std::vector<double> p(n_z_);
  for (std::size_t i = 0; i < n_z_; ++i) p[i] = z(i);
  return p;
}

std::size_t SpatialGrid::nearest_index(double zq) const {
  double x = (zq - z_min_) / dz_ - 0.5;
  long i = std::lround(x);
  i = std::clamp(i, 0L, static_cast<long>(n_z_) - 1L);
  return static_cast<std::size_t>(i);
}

} // namespace q1d
