#include "heatlab/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "heatlab/errors.hpp"

namespace heatlab {

Grid::Grid(int dimension, double period, int points_per_axis)
    : dimension_(dimension), period_(period), points_(points_per_axis) {
  if (dimension != 2 && dimension != 3) {
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dimension));
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw ConfigError("grid period must be a positive finite number");
  }
  if (points_per_axis < 4 || points_per_axis % 2 != 0) {
    throw ConfigError("points per axis must be an even integer >= 4, got " +
                      std::to_string(points_per_axis));
  }
}

std::size_t Grid::physical_size() const {
  std::size_t n = 1;
  for (int i = 0; i < dimension_; ++i) n *= static_cast<std::size_t>(points_);
  return n;
}

std::size_t Grid::spectral_size() const {
  return physical_size() / static_cast<std::size_t>(points_) * static_cast<std::size_t>(half_points());
}

double Grid::cell_volume() const { return std::pow(spacing(), dimension_); }
double Grid::volume() const { return std::pow(period_, dimension_); }
double Grid::nyquist() const { return std::numbers::pi * points_ / period_; }
double Grid::dual_spacing() const { return 2.0 * std::numbers::pi / period_; }

std::array<int, 3> Grid::spectral_index(std::size_t slot) const {
  const auto h = static_cast<std::size_t>(half_points());
  const auto m = static_cast<std::size_t>(points_);
  std::array<int, 3> idx{0, 0, 0};
  const int last = static_cast<int>(slot % h);
  slot /= h;
  if (dimension_ == 2) {
    idx[0] = signed_index(static_cast<int>(slot));
    idx[1] = last;
  } else {
    idx[1] = signed_index(static_cast<int>(slot % m));
    idx[0] = signed_index(static_cast<int>(slot / m));
    idx[2] = last;
  }
  return idx;
}

std::size_t Grid::spectral_slot(const std::array<int, 3>& m) const {
  const auto wrap = [this](int s) { return static_cast<std::size_t>(s < 0 ? s + points_ : s); };
  const auto h = static_cast<std::size_t>(half_points());
  const auto n = static_cast<std::size_t>(points_);
  if (dimension_ == 2) return wrap(m[0]) * h + static_cast<std::size_t>(m[1]);
  return (wrap(m[0]) * n + wrap(m[1])) * h + static_cast<std::size_t>(m[2]);
}

namespace {

std::shared_ptr<const SpectralGeometry> build_geometry(const Grid& grid) {
  auto geo = std::make_shared<SpectralGeometry>();
  const std::size_t n = grid.spectral_size();
  geo->k_squared.resize(n);
  geo->index_norm2.resize(n);
  geo->multiplicity.resize(n);
  geo->dealias_mask.resize(n);
  const double dk = grid.dual_spacing();
  const int d = grid.dimension();
  const int nyq = grid.points() / 2;
  // 2/3 rule: keep |m| < M/3 on every axis.
  const auto kept = [&](int m) { return 3 * std::abs(m) < grid.points(); };
  for (std::size_t s = 0; s < n; ++s) {
    auto m = grid.spectral_index(s);
    // The last-axis Nyquist slot stands for m = -M/2.
    const int last = m[d - 1] == nyq ? -nyq : m[d - 1];
    std::int64_t n2 = 0;
    bool keep = true;
    for (int i = 0; i < d; ++i) {
      const int mi = i == d - 1 ? last : m[i];
      n2 += static_cast<std::int64_t>(mi) * mi;
      keep = keep && kept(mi);
    }
    geo->index_norm2[s] = n2;
    geo->k_squared[s] = dk * dk * static_cast<double>(n2);
    geo->multiplicity[s] = (m[d - 1] == 0 || m[d - 1] == nyq) ? 1.0 : 2.0;
    geo->dealias_mask[s] = keep ? 1.0 : 0.0;
  }
  return geo;
}

}  // namespace

std::shared_ptr<const SpectralGeometry> geometry_for(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, int>, std::shared_ptr<const SpectralGeometry>> cache;
  const auto key = std::make_tuple(grid.dimension(), grid.period(), grid.points());
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto geo = build_geometry(grid);
  cache.emplace(key, geo);
  return geo;
}

std::array<double, 3> position(const Grid& grid, std::size_t index) {
  const auto m = static_cast<std::size_t>(grid.points());
  const double dx = grid.spacing();
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int i = grid.dimension() - 1; i >= 0; --i) {
    x[i] = dx * grid.coordinate_index(static_cast<int>(index % m));
    index /= m;
  }
  return x;
}

double radius(const Grid& grid, std::size_t index) {
  const auto x = position(grid, index);
  double r2 = 0.0;
  for (int i = 0; i < grid.dimension(); ++i) r2 += x[i] * x[i];
  return std::sqrt(r2);
}

}  // namespace heatlab
