#include "heatlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "heatlab/errors.hpp"

namespace heatlab {

Field::Field(Grid grid) : grid_(grid), coeffs_(grid.spectral_size(), Complex{0.0, 0.0}) {}

Field::Field(Grid grid, SpectralArray coefficients) : grid_(grid), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != grid_.spectral_size()) {
    throw std::invalid_argument("Field: coefficient array does not match grid");
  }
}

namespace {

// Maps a signed index onto the half layout; returns whether conjugation is needed.
std::pair<std::array<int, 3>, bool> canonical(const Grid& g, std::array<int, 3> m) {
  const int d = g.dimension();
  const int n = g.points();
  for (int i = 0; i < d; ++i) {
    m[i] = ((m[i] % n) + n) % n;
    if (m[i] >= n / 2 && !(i == d - 1 && m[i] == n / 2)) m[i] -= n;
  }
  // Last axis now in [-M/2+1, M/2]; negative means use the mirrored slot.
  bool conj = false;
  if (m[d - 1] < 0) {
    conj = true;
    for (int i = 0; i < d; ++i) {
      m[i] = -m[i];
      if (i < d - 1 && m[i] == n / 2) m[i] = -n / 2;
    }
  }
  return {m, conj};
}

std::array<int, 3> negate(const Grid& g, std::array<int, 3> m) {
  for (int i = 0; i < g.dimension(); ++i) m[i] = -m[i];
  return m;
}

}  // namespace

Complex Field::coefficient(const std::array<int, 3>& m) const {
  auto [c, conj] = canonical(grid_, m);
  const Complex v = coeffs_[grid_.spectral_slot(c)];
  return conj ? std::conj(v) : v;
}

void Field::set_mode(const std::array<int, 3>& m, Complex value) {
  {
    auto [c, conj] = canonical(grid_, m);
    coeffs_[grid_.spectral_slot(c)] = conj ? std::conj(value) : value;
  }
  {
    auto [c, conj] = canonical(grid_, negate(grid_, m));
    coeffs_[grid_.spectral_slot(c)] = conj ? value : std::conj(value);
  }
}

Field& Field::operator+=(const Field& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("Field: grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("Field: grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

Field& Field::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field f) { return f *= s; }

PhysicalField::PhysicalField(Grid g, RealArray v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.physical_size()) {
    throw std::invalid_argument("PhysicalField: value array does not match grid");
  }
}

double hermitian_defect(const Field& f) {
  const Grid& g = f.grid();
  const auto c = f.coefficients();
  double scale = 0.0;
  for (const auto& v : c) scale += std::norm(v);
  if (scale == 0.0) return 0.0;
  scale = std::sqrt(scale);
  const int d = g.dimension();
  const int nyq = g.points() / 2;
  double defect = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) {
    auto m = g.spectral_index(s);
    if (m[d - 1] != 0 && m[d - 1] != nyq) continue;
    // Mirror within the self-conjugate plane.
    auto mirror = m;
    for (int i = 0; i < d - 1; ++i) {
      mirror[i] = -m[i];
      if (mirror[i] == nyq) mirror[i] = -nyq;
    }
    const Complex partner = c[g.spectral_slot(mirror)];
    defect = std::max(defect, std::abs(c[s] - std::conj(partner)));
  }
  return defect / scale;
}

PhysicalField to_physical(const Field& f, double tolerance) {
  const double defect = hermitian_defect(f);
  if (defect > tolerance) {
    std::ostringstream msg;
    msg << "to_physical: coefficients are not Hermitian (relative defect " << defect << ")";
    throw SymmetryError(msg.str());
  }
  PhysicalField out(f.grid());
  FftPlan::for_grid(f.grid())->inverse(f.coefficients(), out.values);
  return out;
}

Field to_spectral(const PhysicalField& f) {
  Field out(f.grid);
  FftPlan::for_grid(f.grid)->forward(f.values, out.coefficients());
  return out;
}

Field multiply(const PhysicalField& multiplier, const Field& f) {
  if (!(multiplier.grid == f.grid())) throw std::invalid_argument("multiply: grid mismatch");
  PhysicalField p = to_physical(f);
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] *= multiplier.values[i];
  return to_spectral(p);
}

}  // namespace heatlab
