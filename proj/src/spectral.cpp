#include "heatlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "heatlab/errors.hpp"

namespace heatlab {

double lebesgue_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lebesgue_norm: p must be >= 1");
  double peak = 0.0;
  for (double v : f.values) peak = std::max(peak, std::abs(v));
  if (std::isinf(p) || peak == 0.0) return std::isinf(p) ? peak : 0.0;
  // Scale by the peak so large p cannot overflow.
  double sum = 0.0;
  if (p == 2.0) {
    for (double v : f.values) sum += (v / peak) * (v / peak);
  } else {
    for (double v : f.values) sum += std::pow(std::abs(v) / peak, p);
  }
  return peak * std::pow(sum * f.grid.cell_volume(), 1.0 / p);
}

double lebesgue_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lebesgue_norm: p must be >= 1");
  return lebesgue_norm(to_physical(f), p);
}

double sobolev_norm(const Field& f, double s) {
  const auto geo = geometry_for(f.grid());
  const auto c = f.coefficients();
  double sum = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double k2 = geo->k_squared[i];
    if (k2 == 0.0) continue;
    const double weight = s == 0.0 ? 1.0 : std::pow(k2, s);
    sum += geo->multiplicity[i] * weight * std::norm(c[i]);
  }
  return std::sqrt(sum * f.grid().volume());
}

double plancherel_mass(const Field& f) {
  const auto geo = geometry_for(f.grid());
  const auto c = f.coefficients();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += geo->multiplicity[i] * std::norm(c[i]);
  return sum * f.grid().volume();
}

Field fractional_laplacian(const Field& f, double s) {
  Field out = f;
  if (s == 0.0) return out;
  const auto geo = geometry_for(f.grid());
  auto c = out.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k2 = geo->k_squared[i];
    c[i] = k2 == 0.0 ? Complex{0.0, 0.0} : c[i] * std::pow(k2, 0.5 * s);
  }
  return out;
}

double critical_power(double v, int d) {
  if (v == 0.0) return 0.0;
  if (d == 2) return v * v * v;
  const double a = std::abs(v);
  return std::exp((4.0 / d) * std::log(a)) * v;
}

void dealias(Field& f) {
  const auto geo = geometry_for(f.grid());
  auto c = f.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= geo->dealias_mask[i];
}

Field nonlinearity(const Field& f, int d, double mu) {
  if (d != f.grid().dimension()) throw DomainError("nonlinearity: dimension mismatch");
  PhysicalField p = to_physical(f);
  for (double& v : p.values) v = mu * critical_power(v, d);
  Field out = to_spectral(p);
  dealias(out);
  return out;
}

}  // namespace heatlab
