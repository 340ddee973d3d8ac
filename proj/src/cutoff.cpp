#include "heatlab/cutoff.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "heatlab/errors.hpp"
#include "heatlab/littlewood_paley.hpp"

namespace heatlab {

CutoffProfile::CutoffProfile(double threshold, CutoffDirection direction)
    : threshold_(threshold), direction_(direction) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw DomainError("CutoffProfile: threshold must be positive");
  }
}

double CutoffProfile::operator()(double r) const {
  const double inner = smooth_step((1.1 * threshold_ - r) / (0.1 * threshold_));
  return direction_ == CutoffDirection::leq ? inner : 1.0 - inner;
}

double CutoffProfile::support_inner() const {
  return direction_ == CutoffDirection::leq ? 0.0 : threshold_;
}

double CutoffProfile::support_outer() const {
  return direction_ == CutoffDirection::leq ? 1.1 * threshold_ : std::numeric_limits<double>::infinity();
}

PhysicalField make_cutoff(const CutoffProfile& profile, const Grid& grid) {
  if (!(1.1 * profile.threshold() < 0.5 * grid.period())) {
    std::ostringstream msg;
    msg << "cutoff radius " << profile.threshold() << " does not fit in a box of period " << grid.period();
    throw ConfigError(msg.str());
  }
  PhysicalField out(grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = profile(radius(grid, i));
  return out;
}

PhysicalField make_cutoff(double a, CutoffDirection direction, const Grid& grid) {
  return make_cutoff(CutoffProfile(a, direction), grid);
}

double support_gap(const CutoffProfile& a, const CutoffProfile& b) {
  if (a.direction() == b.direction()) return -std::numeric_limits<double>::infinity();
  const CutoffProfile& ball = a.direction() == CutoffDirection::leq ? a : b;
  const CutoffProfile& shell = a.direction() == CutoffDirection::leq ? b : a;
  return shell.support_inner() - ball.support_outer();
}

}  // namespace heatlab
