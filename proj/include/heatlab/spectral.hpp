#pragma once

#include <limits>

#include "heatlab/field.hpp"

namespace heatlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (sum |f(x)|^p dx^d)^(1/p) over the lattice; lattice max for p = inf.
double lebesgue_norm(const PhysicalField& f, double p);
double lebesgue_norm(const Field& f, double p);

/// Homogeneous Sobolev norm (L^d * sum_{k != 0} |k|^{2s} |c_k|^2)^(1/2).
/// The k = 0 mode never contributes, for any s.
double sobolev_norm(const Field& f, double s);

/// L^d * sum |c_k|^2 over the whole lattice, mean included.
double plancherel_mass(const Field& f);

/// Fourier multiplier |k|^s; the k = 0 mode is set to zero unless s == 0.
Field fractional_laplacian(const Field& f, double s);

/// Pointwise |f|^(4/d) f scaled by mu, transformed back and truncated by the
/// 2/3 rule on every axis.
Field nonlinearity(const Field& f, int d, double mu);

/// The pointwise power used by nonlinearity(): |v|^(4/d) v, with 0 at v = 0.
double critical_power(double v, int d);

/// Applies the 2/3-rule mask in place.
void dealias(Field& f);

}  // namespace heatlab
