#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace heatlab {

/// Periodic lattice [-L/2, L/2)^d with M points per axis.
///
/// The physical sample with storage index n sits at x = n*dx for n < M/2 and
/// at x = (n - M)*dx otherwise, so the box centre is the origin.  The dual
/// lattice is k = (2*pi/L) * m with m in {-M/2, ..., M/2-1}^d.  Spectral
/// arrays use the real-to-complex half layout: the last axis keeps only
/// m = 0 .. M/2.
class Grid {
 public:
  Grid(int dimension, double period, int points_per_axis);

  int dimension() const { return dimension_; }
  double period() const { return period_; }
  int points() const { return points_; }
  int half_points() const { return points_ / 2 + 1; }

  std::size_t physical_size() const;
  std::size_t spectral_size() const;

  double spacing() const { return period_ / points_; }
  double cell_volume() const;
  double volume() const;
  /// Magnitude of the most negative per-axis wavenumber, pi*M/L.
  double nyquist() const;
  double dual_spacing() const;

  /// Signed wavenumber index for a storage index along a full axis.
  int signed_index(int storage) const { return storage < points_ / 2 ? storage : storage - points_; }
  /// Signed coordinate index for a physical storage index.
  int coordinate_index(int storage) const { return signed_index(storage); }

  /// Multi-index of a spectral storage slot (signed indices, last axis in [0, M/2]).
  std::array<int, 3> spectral_index(std::size_t slot) const;
  /// Storage slot for a signed multi-index whose last entry lies in [0, M/2].
  std::size_t spectral_slot(const std::array<int, 3>& m) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dimension_;
  double period_;
  int points_;
};

/// Per-grid tables shared by every operation on that grid.
struct SpectralGeometry {
  std::vector<double> k_squared;        // |k|^2 per spectral slot
  std::vector<std::int64_t> index_norm2;  // |m|^2 (integer) per slot
  std::vector<double> multiplicity;     // 1 or 2: number of full-lattice modes a half slot stands for
  std::vector<double> dealias_mask;     // 2/3 rule, 0 or 1
};

/// Cached geometry for a grid.  Thread-safe.
std::shared_ptr<const SpectralGeometry> geometry_for(const Grid& grid);

/// Physical coordinates of a lattice point given its flat storage index.
std::array<double, 3> position(const Grid& grid, std::size_t index);
/// Distance of a lattice point from the box centre.
double radius(const Grid& grid, std::size_t index);

}  // namespace heatlab
