#pragma once

#include <cstddef>
#include <vector>

namespace q1d {

/**
 * Uniform 1D grid of cell centers, z_i = z_min + (i + 1/2) dz, spanning
 * exactly n_z * dz. Cell centering makes box cosine profiles exactly
 * orthogonal under the midpoint inner product (DCT-II), which the mode
 * projection round trip relies on.
 */
class SpatialGrid {
public:
  SpatialGrid(double z_min, double dz, std::size_t n_z);

  // Grid spanning [-length/2, length/2].
  static SpatialGrid centered(double length, std::size_t n_z);

  double z(std::size_t i) const { return z_min_ + (static_cast<double>(i) + 0.5) * dz_; }
  double dz() const { return dz_; }
  std::size_t size() const { return n_z_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_min_ + extent(); }
  double extent() const { return dz_ * static_cast<double>(n_z_); }
  double center() const { return z_min_ + 0.5 * extent(); }

  std::vector<double> points() const;
  std::size_t nearest_index(double z) const;

private:
  double z_min_;
  double dz_;
  std::size_t n_z_;
};

} // namespace q1d
