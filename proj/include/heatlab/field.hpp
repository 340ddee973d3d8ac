#pragma once

#include <array>
#include <span>

#include "heatlab/fft.hpp"
#include "heatlab/grid.hpp"

namespace heatlab {

/// Real scalar field stored as its spectral coefficients on a Grid.
///
/// Only the half spectrum is kept; coefficient(-k) is the complex conjugate
/// of coefficient(k).  Slots on the self-conjugate planes (last-axis index 0
/// and M/2) must pair up Hermitian-wise, which to_physical() verifies.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, SpectralArray coefficients);

  const Grid& grid() const { return grid_; }
  std::span<const Complex> coefficients() const { return coeffs_; }
  std::span<Complex> coefficients() { return coeffs_; }
  const SpectralArray& data() const { return coeffs_; }

  /// Coefficient at an arbitrary signed lattice index (any sign on any axis).
  Complex coefficient(const std::array<int, 3>& m) const;
  /// Sets coefficient(m) = value and coefficient(-m) = conj(value).
  void set_mode(const std::array<int, 3>& m, Complex value);

  Complex mean() const { return coeffs_.front(); }
  void zero_mean() { coeffs_.front() = 0.0; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double scale);

 private:
  Grid grid_;
  SpectralArray coeffs_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field f);

/// Real samples on the lattice, in storage order (see Grid).
struct PhysicalField {
  Grid grid;
  RealArray values;

  explicit PhysicalField(Grid g) : grid(g), values(g.physical_size(), 0.0) {}
  PhysicalField(Grid g, RealArray v);
};

/// Largest Hermitian mismatch on the self-conjugate planes, relative to the
/// l^2 norm of the stored coefficients (0 for the zero field).
double hermitian_defect(const Field& f);

/// Inverse transform to lattice samples.  Throws SymmetryError when the
/// Hermitian defect exceeds `tolerance`.
PhysicalField to_physical(const Field& f, double tolerance = 1e-12);
Field to_spectral(const PhysicalField& f);

/// Pointwise product of a physical multiplier with a field.
Field multiply(const PhysicalField& multiplier, const Field& f);

}  // namespace heatlab
