#include "heatlab/littlewood_paley.hpp"

#include <cmath>

#include "heatlab/cutoff.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

namespace {
double flat_exp(double r) { return r > 0.0 ? std::exp(-1.0 / r) : 0.0; }
}  // namespace

double smooth_step(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = flat_exp(r);
  const double b = flat_exp(1.0 - r);
  return a / (a + b);
}

double bump(double xi) { return smooth_step(2.0 - std::abs(xi)); }

double DyadicProjector::symbol(double k) const {
  switch (mode) {
    case ProjectorMode::leq:
      return bump(k / scale);
    case ProjectorMode::band:
      return bump(k / scale) - bump(2.0 * k / scale);
    case ProjectorMode::gt:
      return 1.0 - bump(k / scale);
  }
  return 0.0;
}

Field project(const Field& f, const DyadicProjector& proj) {
  if (!(proj.scale > 0.0) || !std::isfinite(proj.scale)) {
    throw DomainError("project: dyadic scale must be positive and finite");
  }
  if (proj.mode == ProjectorMode::gt) {
    return f - project(f, DyadicProjector{proj.scale, ProjectorMode::leq});
  }
  const auto geo = geometry_for(f.grid());
  Field out = f;
  auto c = out.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= proj.symbol(std::sqrt(geo->k_squared[i]));
  return out;
}

double bernstein_ratio(const Field& f, double n, double p, double q) {
  if (!(q >= p)) throw DomainError("bernstein_ratio: requires q >= p");
  const Field band = project(f, DyadicProjector{n, ProjectorMode::band});
  const PhysicalField phys = to_physical(band);
  const double lp = lebesgue_norm(phys, p);
  if (lp == 0.0) return 0.0;
  const int d = f.grid().dimension();
  const double gain = std::pow(n, d / p - (std::isinf(q) ? 0.0 : d / q));
  return lebesgue_norm(phys, q) / (gain * lp);
}

double bernstein_derivative_ratio(const Field& f, double n, double s, double p) {
  const Field band = project(f, DyadicProjector{n, ProjectorMode::band});
  const double base = lebesgue_norm(band, p);
  if (base == 0.0) return 0.0;
  return lebesgue_norm(fractional_laplacian(band, s), p) / (std::pow(n, s) * base);
}

double mismatch_ratio(const Field& f, const CutoffProfile& inner, const CutoffProfile& outer, double n,
                      double p, double q, double m) {
  const double gap = support_gap(inner, outer);
  if (!(gap > 0.0)) throw PreconditionError("mismatch_ratio: cutoff supports overlap");
  const Grid& g = f.grid();
  const Field localized = multiply(make_cutoff(outer, g), f);
  const double base = lebesgue_norm(localized, p);
  if (base == 0.0) return 0.0;
  const Field leak = multiply(make_cutoff(inner, g), project(localized, at_least(n)));
  const int d = g.dimension();
  const double dq = std::isinf(q) ? 0.0 : d / q;
  const double scale = std::pow(gap, -m + dq - d / p) * std::pow(n, -m);
  return lebesgue_norm(leak, q) / (scale * base);
}

}  // namespace heatlab
