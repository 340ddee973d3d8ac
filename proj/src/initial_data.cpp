#include "heatlab/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/littlewood_paley.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

double gamma0_upper_bound(int d) { return static_cast<double>(d - 1) / static_cast<double>(d + 2); }

void check_gamma0(double gamma0, int d) {
  if (!(gamma0 >= 0.0 && gamma0 < gamma0_upper_bound(d))) {
    std::ostringstream msg;
    msg << "gamma0 = " << gamma0 << " is outside the admissible range [0, (d-1)/(d+2)) = [0, "
        << gamma0_upper_bound(d) << ") for d = " << d;
    throw ConfigError(msg.str());
  }
}

double shell_sign(std::uint64_t seed, std::int64_t shell) {
  // splitmix64 finalizer over (seed, counter).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(shell) + 1ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return (z >> 63) ? -1.0 : 1.0;
}

namespace {

double annulus_mass(double lo, double hi, double a) {
  if (a == 0.0) return std::log(hi / lo);
  return (std::pow(hi, a) - std::pow(lo, a)) / a;
}

}  // namespace

RoughSample sample_rough_radial_traced(const RoughDataSpec& spec, const Grid& grid) {
  const int d = grid.dimension();
  if (spec.dimension != d) throw ConfigError("rough data: dimension does not match grid");
  check_gamma0(spec.gamma0, d);
  if (!(spec.amplitude > 0.0)) throw ConfigError("rough data: amplitude must be positive");
  if (!(spec.epsilon0 > 0.0)) throw ConfigError("rough data: epsilon0 must be positive");

  const double dk = grid.dual_spacing();
  const double k_lo = spec.k_lo > 0.0 ? spec.k_lo : dk;
  const double k_hi = spec.k_hi > 0.0 ? spec.k_hi : (2.0 / 3.0) * grid.nyquist();
  if (k_hi > std::sqrt(static_cast<double>(d)) * grid.nyquist()) {
    throw ConfigError("rough data: k_hi exceeds the lattice");
  }

  const auto geo = geometry_for(grid);
  const std::size_t n = grid.spectral_size();

  // Distinct |m|^2 values and full-lattice mode counts.
  const std::int64_t max_n2 = *std::max_element(geo->index_norm2.begin(), geo->index_norm2.end());
  std::vector<double> count(static_cast<std::size_t>(max_n2) + 1, 0.0);
  for (std::size_t s = 0; s < n; ++s) count[static_cast<std::size_t>(geo->index_norm2[s])] += geo->multiplicity[s];
  std::vector<std::int64_t> radii;
  for (std::int64_t v = 1; v <= max_n2; ++v) {
    if (count[static_cast<std::size_t>(v)] > 0.0) radii.push_back(v);
  }

  const double a = 2.0 * spec.gamma0 - 2.0 * spec.epsilon0;
  std::vector<double> per_mode(static_cast<std::size_t>(max_n2) + 1, 0.0);
  bool any = false;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double r = dk * std::sqrt(static_cast<double>(radii[j]));
    if (r < k_lo * (1.0 - 1e-12) || r > k_hi * (1.0 + 1e-12)) continue;
    const double prev = j > 0 ? dk * std::sqrt(static_cast<double>(radii[j - 1])) : 0.0;
    const double next = j + 1 < radii.size() ? dk * std::sqrt(static_cast<double>(radii[j + 1])) : 2.0 * r - prev;
    double lo = j > 0 ? 0.5 * (prev + r) : (a > 0.0 ? 0.0 : 0.5 * r);
    const double hi = 0.5 * (r + next);
    per_mode[static_cast<std::size_t>(radii[j])] =
        std::sqrt(annulus_mass(lo, hi, a) / count[static_cast<std::size_t>(radii[j])]);
    any = true;
  }
  if (!any) throw ConfigError("rough data: frequency band contains no lattice shell");

  Field raw(grid);
  auto c = raw.coefficients();
  for (std::size_t s = 0; s < n; ++s) {
    const auto n2 = geo->index_norm2[s];
    const double amp = per_mode[static_cast<std::size_t>(n2)];
    if (amp == 0.0) continue;
    const double k = dk * std::sqrt(static_cast<double>(n2));
    const auto shell = spec.signs == SignGranularity::dyadic ? static_cast<std::int64_t>(std::floor(std::log2(k)))
                                                              : static_cast<std::int64_t>(n2);
    c[s] = shell_sign(spec.seed, shell) * amp;
  }

  Field cut = multiply(make_cutoff(1.0, CutoffDirection::geq, grid), raw);
  RoughSample out{std::move(cut), 0.0};
  out.removed_mean = out.field.mean().real();
  out.field.zero_mean();
  const double norm = sobolev_norm(out.field, -spec.gamma0);
  if (!(norm > 0.0)) throw DegenerateDataError("rough data: cutoff field has zero Sobolev norm");
  const double scale = spec.amplitude / norm;
  out.field *= scale;
  out.removed_mean *= scale;
  return out;
}

Field sample_rough_radial(const RoughDataSpec& spec, const Grid& grid) {
  return sample_rough_radial_traced(spec, grid).field;
}

Field gaussian_bump(const Grid& grid, double amplitude, double width) {
  if (!(width > 0.0)) throw DomainError("gaussian_bump: width must be positive");
  PhysicalField p(grid);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double r = radius(grid, i);
    p.values[i] = amplitude * std::exp(-(r * r) / (width * width));
  }
  return to_spectral(p);
}

Decomposition decompose(const Field& h0, double n, double gamma0) {
  const Grid& g = h0.grid();
  Decomposition out{Field(g), Field(g)};

  // Mean-zero data on the torus sits at a constant level inside |x| < 1, so the
  // support is measured modulo that constant.
  const PhysicalField phys = to_physical(h0);
  double level = 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < phys.values.size(); ++i) {
    if (radius(g, i) < 1.0) {
      level += phys.values[i];
      ++inside;
    }
  }
  level = inside ? level / static_cast<double>(inside) : 0.0;
  double inner = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < phys.values.size(); ++i) {
    const double v = phys.values[i];
    total += v * v;
    if (radius(g, i) < 1.0) inner += (v - level) * (v - level);
  }
  out.inner_level = level;
  out.inner_mass_fraction = total > 0.0 ? inner / total : 0.0;
  out.support_ok = out.inner_mass_fraction <= 1e-8;

  out.v0 = multiply(make_cutoff(0.5, CutoffDirection::geq, g), project(h0, at_least(n)));
  out.removed_mean = out.v0.mean().real();
  out.v0.zero_mean();
  out.w0 = h0 - out.v0;
  out.w0_l2 = std::sqrt(plancherel_mass(out.w0));
  out.v0_sobolev = sobolev_norm(out.v0, -gamma0);
  out.h0_sobolev = sobolev_norm(h0, -gamma0);
  return out;
}

double mismatch_leak(const Field& h0, double n) {
  const Grid& g = h0.grid();
  const PhysicalField high = to_physical(project(h0, at_least(n)));
  const PhysicalField chi = make_cutoff(0.5, CutoffDirection::leq, g);
  double sum = 0.0;
  for (std::size_t i = 0; i < high.values.size(); ++i) {
    const double v = chi.values[i] * high.values[i];
    sum += v * v;
  }
  return std::sqrt(sum * g.cell_volume());
}

}  // namespace heatlab
