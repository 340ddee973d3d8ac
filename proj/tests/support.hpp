#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "heatlab/field.hpp"
#include "heatlab/grid.hpp"

namespace testing {

using heatlab::Field;
using heatlab::Grid;
using heatlab::PhysicalField;

inline PhysicalField sample(const Grid& g, const std::function<double(const std::array<double, 3>&)>& fn) {
  PhysicalField p(g);
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = fn(heatlab::position(g, i));
  return p;
}

inline Field sample_field(const Grid& g, const std::function<double(const std::array<double, 3>&)>& fn) {
  return heatlab::to_spectral(sample(g, fn));
}

inline PhysicalField random_physical(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  PhysicalField p(g);
  for (double& v : p.values) v = n01(rng);
  return p;
}

inline Field random_field(const Grid& g, std::uint64_t seed) { return heatlab::to_spectral(random_physical(g, seed)); }

inline double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

/// Plain O(N^2) DFT normalized by 1/M^d, evaluated at one signed lattice index.
inline std::complex<double> direct_dft(const PhysicalField& f, const std::array<int, 3>& m) {
  const Grid& g = f.grid;
  const int d = g.dimension();
  const int M = g.points();
  std::complex<long double> acc = 0.0L;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::size_t rest = i;
    long double phase = 0.0L;
    for (int a = d - 1; a >= 0; --a) {
      const int n = static_cast<int>(rest % M);
      rest /= M;
      phase += static_cast<long double>(m[a]) * n;
    }
    phase *= -2.0L * 3.14159265358979323846264338327950288L / M;
    acc += static_cast<long double>(f.values[i]) * std::complex<long double>(std::cos(phase), std::sin(phase));
  }
  const long double norm = std::pow(static_cast<long double>(M), d);
  return {static_cast<double>(acc.real() / norm), static_cast<double>(acc.imag() / norm)};
}

}  // namespace testing
