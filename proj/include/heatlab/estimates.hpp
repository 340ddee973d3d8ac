#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "heatlab/field.hpp"
#include "heatlab/heat_flow.hpp"

namespace heatlab {

// Fits ----------------------------------------------------------------------

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  std::size_t points = 0;
};

/// Least squares of log v against log x.  Needs two distinct abscissae and
/// positive values.
FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& v);

/// Fraction of the requested window dropped at its upper end.
inline constexpr double kFitTrim = 0.2;

/// Power-law fit of the L^2 records over [t_a, t_a + (1 - trim)(t_b - t_a)].
/// Requires t_a >= 1 and at least 8 records in the trimmed window.
FitResult decay_fit(const Trajectory& traj, double t_a, double t_b, double trim = kFitTrim);

// Space-time norms -----------------------------------------------------------

struct SpaceTimeNorm {
  double q = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double value = 0.0;
};

/// (int ||h(t)||_{L^q}^q dt)^{1/q} by the trapezoid rule over the records in
/// [t_a, t_b].  q = 2 and q = 2 + 4/d read the record columns; other
/// exponents need snapshots.
SpaceTimeNorm spacetime_norm(const Trajectory& traj, double q, double t_a = 0.0,
                             double t_b = std::numeric_limits<double>::infinity());

/// max over records in [t_a, t_b] (t > 0) of t^{beta/2} ||h(t)||_{L^2}.
double weighted_sup_norm(const Trajectory& traj, double beta, double t_a = 0.0,
                         double t_b = std::numeric_limits<double>::infinity());

struct LinearSpacetime {
  double value = 0.0;          // (int_0^inf ||e^{t Lap} f||_q^q dt)^{1/q}
  double tail_fraction = 0.0;  // share of the q-th power coming from [horizon, inf)
};

/// Space-time L^q norm of the free heat flow of f.  Sampled exactly on a
/// log-spaced time grid up to `horizon`; the remainder is extrapolated from
/// the slope of the final decade (infinite when that slope is >= -1).
LinearSpacetime linear_spacetime_norm(const Field& f, double q, double horizon, int samples_per_decade = 40);

struct StrichartzResult {
  double ratio = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double tail_fraction = 0.0;
};

/// ||e^{t Lap} h0||_{L^{2+4/d}_{t,x}} / ||h0||_{H^{-gamma0}}.  Throws
/// DegenerateDataError for a vanishing denominator.
StrichartzResult strichartz_ratio(const Field& h0, double gamma0, double horizon);

/// ||e^{t Lap} f||_{L^q_{t,x}} / || |grad|^delta f ||_{L^2} with the
/// scaling-matched delta = d/2 - (d+2)/q.
StrichartzResult heat_spacetime_ratio(const Field& f, double q, double horizon);

// Pointwise inequalities -----------------------------------------------------

/// || |x|^alpha f ||_{L^q} / || |grad|^s f ||_{L^p}.  Requires
/// alpha + s = d (1/p - 1/q) to 1e-12 (PreconditionError otherwise).
double radial_embedding_ratio(const Field& f, double alpha, double q, double p, double s);

/// t^{(d/2)(1/p - 1/q)} ||e^{t Lap} f||_{L^q} / ||f||_{L^p}.
double heat_smoothing_ratio(const Field& f, double t, double p, double q);

// Low-frequency bootstrap ----------------------------------------------------

enum class LowFreqVariant { weak, improved };

struct LowFreqReport {
  LowFreqVariant variant = LowFreqVariant::weak;
  double alpha = 0.0;
  double gamma0 = 0.0;
  double c_budget = 0.0;
  std::vector<double> t;
  /// Left side over the bracketed right side with the constant set to 1.
  std::vector<double> raw_quotient;
  double max_raw = 0.0;
  /// max_raw / c_budget.
  double max_quotient = 0.0;
  bool closes() const { return max_quotient <= 1.0; }
};

/// Per-record check of
///   weak:     ||P_{<=N} h|| <= C t^{-alpha/2} (1 + N t^{alpha/2} + N t^{1/2} Y_alpha(t))
///   improved: ||P_{<=N} h|| <= C t^{-g/2} (1 + N t^{g/2} + N t^{(1-alpha)/2} Y_g(t))
/// over records with t >= 1, where Y_beta(t) = sup_{s <= t} s^{beta/2} ||h(s)||
/// is read from the trajectory and g = gamma0.  The trajectory must carry the
/// schedule N(t) = sqrt(2 alpha / t) for this alpha (PreconditionError
/// otherwise).
LowFreqReport lowfreq_diagnostic(const Trajectory& traj, double alpha, double c_budget,
                                 LowFreqVariant variant = LowFreqVariant::weak, double gamma0 = 0.0);

// Duhamel ---------------------------------------------------------------------

struct DuhamelReport {
  /// sup_t ||u||_{L^2}, ||u||_{L^{2(d+2)/d}_{t,x}}, ||grad u||_{L^2_t L^2_x}
  /// each divided by ||F||_{L^{2(d+2)/(d+4)}_{t,x}}.
  double energy = 0.0;
  double strichartz = 0.0;
  double gradient = 0.0;
  double forcing_norm = 0.0;
  std::vector<Field> response;  // u at each sample time
};

/// u(t) = int_0^t e^{(t-s) Lap} F(s) ds for F linear between samples, advanced
/// exactly interval by interval.  Needs at least 40 increasing sample times
/// starting at 0.
DuhamelReport duhamel_norm_check(const std::vector<double>& times, const std::vector<Field>& forcing);

// Ensembles and reports ---------------------------------------------------------

/// Lattice point cloud: `count` deltas of random sign and weight in [0.5, 1]
/// at uniformly drawn lattice sites.  Deterministic in seed.
Field random_point_cloud(const Grid& grid, std::uint64_t seed, int count);

/// Runs fn(seed) for every seed on at most `jobs` worker threads and returns
/// results in the order of `seeds`.
template <class R>
std::vector<R> ensemble_map(const std::vector<std::uint64_t>& seeds, int jobs,
                            const std::function<R(std::uint64_t)>& fn);

/// Worker count from the request and HEATLAB_THREADS (the smaller wins; 0 or
/// negative means unset).  Always at least 1.
int resolve_jobs(int requested);

struct MemberResult {
  std::uint64_t seed = 0;
  nlohmann::ordered_json ratios = nlohmann::ordered_json::object();
  nlohmann::ordered_json fits = nlohmann::ordered_json::object();
};

struct Verdict {
  std::string criterion_id;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string config_digest;
  std::vector<MemberResult> members;
  std::vector<Verdict> verdicts;

  /// Members sorted by seed; aggregates recomputed from them.
  nlohmann::ordered_json to_json() const;
  bool all_pass() const;
};

/// max, median and per-ratio slope aggregates of member ratios, keyed by name.
nlohmann::ordered_json aggregate_members(const std::vector<MemberResult>& members);

double median(std::vector<double> v);

}  // namespace heatlab

#include "heatlab/ensemble_impl.hpp"
