#pragma once

#include "heatlab/field.hpp"

namespace heatlab {

/// Smooth monotone transition: 0 for r <= 0, 1 for r >= 1, built from
/// g(r) = exp(-1/r) as g(r) / (g(r) + g(1 - r)).
double smooth_step(double r);

/// Radial frequency bump: 1 on |xi| <= 1, 0 on |xi| >= 2, monotone between.
double bump(double xi);

enum class ProjectorMode { leq, band, gt };

/// Littlewood-Paley multiplier at dyadic scale N (physical frequency units).
///
///   leq:  phi(xi/N)                 (P_{<=N})
///   band: phi(xi/N) - phi(2 xi/N)   (P_N)
///   gt:   1 - phi(xi/N)             (P_{>N})
struct DyadicProjector {
  double scale;
  ProjectorMode mode;

  double symbol(double k) const;
};

/// P_{>=N} = I - P_{<N} = P_{>N/2}.
inline DyadicProjector at_least(double n) { return {0.5 * n, ProjectorMode::gt}; }
/// P_{<N} = P_{<=N/2}.
inline DyadicProjector below(double n) { return {0.5 * n, ProjectorMode::leq}; }

/// Coefficient-wise symbol multiplication.  The gt mode is computed as
/// f - P_{<=N} f so that leq + gt reproduces f.
Field project(const Field& f, const DyadicProjector& proj);

/// ||P_N f||_q / (N^{d/p - d/q} ||P_N f||_p); 0 when P_N f vanishes.
double bernstein_ratio(const Field& f, double n, double p, double q);

/// ||(|grad|^s) P_N f||_p / (N^s ||P_N f||_p); 0 when P_N f vanishes.
double bernstein_derivative_ratio(const Field& f, double n, double s, double p = 2.0);

class CutoffProfile;

/// ||phi1 P_{>=N}(phi2 f)||_q / (A^{-m + d/q - d/p} N^{-m} ||phi2 f||_p) for
/// spatial cutoffs phi1 = inner, phi2 = outer separated by distance A.
/// Throws PreconditionError when the supports are not separated.
double mismatch_ratio(const Field& f, const CutoffProfile& inner, const CutoffProfile& outer, double n,
                      double p, double q, double m);

}  // namespace heatlab
