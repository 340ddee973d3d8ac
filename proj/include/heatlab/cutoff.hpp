#pragma once

#include "heatlab/field.hpp"

namespace heatlab {

enum class CutoffDirection { leq, geq };

/// Radial spatial cutoff chi_{<=a} or chi_{>=a} = 1 - chi_{<=a}.
///
/// chi_{<=a}(r) = 1 for r <= a, 0 for r >= 1.1 a, with the smooth_step blend
/// in between.
class CutoffProfile {
 public:
  CutoffProfile(double threshold, CutoffDirection direction);

  double threshold() const { return threshold_; }
  CutoffDirection direction() const { return direction_; }
  double operator()(double r) const;

  /// Radii bounding the support: [inner, outer] (outer may be +inf).
  double support_inner() const;
  double support_outer() const;

 private:
  double threshold_;
  CutoffDirection direction_;
};

/// Lattice samples of the cutoff about the box centre.  Throws ConfigError
/// when 1.1 a does not fit inside half the box.
PhysicalField make_cutoff(double a, CutoffDirection direction, const Grid& grid);
PhysicalField make_cutoff(const CutoffProfile& profile, const Grid& grid);

/// Distance between the supports of two cutoffs; <= 0 when they overlap.
double support_gap(const CutoffProfile& a, const CutoffProfile& b);

}  // namespace heatlab
