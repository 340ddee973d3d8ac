#pragma once

#include <cstdint>

#include "heatlab/cutoff.hpp"
#include "heatlab/field.hpp"

namespace heatlab {

/// Granularity of the random signs: one per dyadic shell [2^j, 2^{j+1}) or one
/// per distinct lattice radius.
enum class SignGranularity { dyadic, radius };

/// Parameters of the rough radial data generator.
struct RoughDataSpec {
  double gamma0 = 0.2;
  int dimension = 2;
  /// Target homogeneous Sobolev norm of order -gamma0.
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  double epsilon0 = 0.01;
  /// Frequency band; k_lo <= 0 selects the lowest lattice shell and
  /// k_hi <= 0 selects two thirds of the Nyquist frequency.
  double k_lo = 0.0;
  double k_hi = 0.0;
  SignGranularity signs = SignGranularity::radius;
};

/// Upper end of the admissible roughness index, (d - 1) / (d + 2).
double gamma0_upper_bound(int d);

/// Throws ConfigError unless gamma0 lies in [0, (d-1)/(d+2)).
void check_gamma0(double gamma0, int d);

/// Counter-based sign draw in {-1, +1} for (seed, counter).
double shell_sign(std::uint64_t seed, std::int64_t shell);

struct RoughSample {
  Field field;
  /// Mean removed after the spatial cutoff.
  double removed_mean = 0.0;
};

/// Radial, mean-zero, real data supported in |x| >= 1 with spectral slope
/// |k|^{gamma0 - d/2 - epsilon0} and random signs per dyadic shell,
/// normalized to ||h0||_{H^{-gamma0}} = amplitude.
///
/// Each distinct lattice radius carries the mass of the continuum spectrum
/// k^{2 gamma0 - 2 epsilon0 - 1} dk over its annulus, the annuli being
/// delimited by midpoints between consecutive lattice radii.  The first
/// annulus reaches down to k = 0, which keeps the heat-flow decay of the
/// lattice field close to the continuum law on boxes of moderate size.
Field sample_rough_radial(const RoughDataSpec& spec, const Grid& grid);
RoughSample sample_rough_radial_traced(const RoughDataSpec& spec, const Grid& grid);

/// A exp(-|x|^2 / w^2), used for smooth and blow-up experiments.
Field gaussian_bump(const Grid& grid, double amplitude, double width);

struct Decomposition {
  Field v0;
  Field w0;
  double w0_l2 = 0.0;
  double v0_sobolev = 0.0;
  double h0_sobolev = 0.0;
  /// L^2 mass of h0 - inner_level inside |x| < 1, relative to ||h0||^2.
  double inner_mass_fraction = 0.0;
  /// Average of h0 over |x| < 1.
  double inner_level = 0.0;
  bool support_ok = true;
  double removed_mean = 0.0;
};

/// v0 = chi_{>=1/2} P_{>=N} h0 and w0 = h0 - v0; Sobolev norms use order -gamma0.
/// A violated support precondition is reported through support_ok.
Decomposition decompose(const Field& h0, double n, double gamma0);

/// ||chi_{<=1/2} P_{>=N} h0||_{L^2}.
double mismatch_leak(const Field& h0, double n);

}  // namespace heatlab
