#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatlab/field.hpp"

namespace heatlab {

/// Raised by step() when the update produces non-finite values.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DtPolicy {
  enum class Kind { fixed, geometric };
  Kind kind = Kind::geometric;
  double dt = 1e-3;       // fixed
  double dt0 = 1e-4;      // geometric
  double ratio = 1.02;
  double dt_max = 0.05;

  static DtPolicy fixed(double dt) { return {Kind::fixed, dt, dt, 1.0, dt}; }
  static DtPolicy geometric(double dt0, double ratio, double dt_max) {
    return {Kind::geometric, dt0, dt0, ratio, dt_max};
  }
};

struct SolverConfig {
  double mu = -1.0;
  double t_end = 100.0;
  DtPolicy dt_policy;
  /// Sorted observation times in [0, t_end]; empty selects default_sample_times.
  std::vector<double> sample_times;
  bool record_snapshots = false;
  double blowup_threshold = 1e6;
  /// false switches the nonlinearity off (linear limit).
  bool nonlinear = true;
  /// Caps dt at guard / ||h||_inf^{4/d}; 0 disables the cap.
  double nonlinear_dt_guard = 0.2;
};

/// {0} followed by `count` geometrically spaced times from t_first to t_end.
std::vector<double> default_sample_times(double t_end, int count = 60, double t_first = 1e-3);

/// Time-dependent frequency cutoff N(t) = sqrt(2 alpha / t).
struct CutoffSchedule {
  enum class Kind { none, sqrt_schedule };
  Kind kind = Kind::none;
  double alpha = 0.0;

  static CutoffSchedule none() { return {}; }
  static CutoffSchedule sqrt_schedule(double alpha);
  bool active() const { return kind != Kind::none; }
  double at(double t) const;
};

struct Record {
  double t = 0.0;
  double l2 = 0.0;
  double l2p4d = 0.0;  // ||h||_{L^{2+4/d}}
  double h1 = 0.0;     // ||grad h||_{L^2}
  double linf = 0.0;
  double lowfreq_l2 = std::numeric_limits<double>::quiet_NaN();
  double n_of_t = std::numeric_limits<double>::quiet_NaN();
};

enum class TrajectoryStatus { completed, blowup_detected, step_failure };

std::string to_string(TrajectoryStatus s);

struct Trajectory {
  TrajectoryStatus status = TrajectoryStatus::completed;
  /// Time at which a non-completed status was raised.
  double status_time = 0.0;
  int dimension = 2;
  /// Effective nonlinear coefficient (mu, or 0 for linear runs).
  double coupling = 0.0;
  CutoffSchedule schedule;
  std::vector<Record> records;
  /// One per record when snapshots were requested.
  std::vector<Field> snapshots;
  std::size_t steps = 0;
};

/// Observables of a single field at time t.
Record observe(const Field& f, double t, const CutoffSchedule& schedule = CutoffSchedule::none());

/// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near z = 0.
void phi_functions(double z, double& phi1, double& phi2);

/// Exact heat semigroup: coefficient(k) -> exp(-t |k|^2) coefficient(k).
Field linear_propagate(const Field& f, double t);

/// One ETDRK2 step of dh/dt = Lap h + mu |h|^{4/d} h.
Field step(const Field& f, double dt, const SolverConfig& cfg);

/// Integrates to t_end (or detects blow-up), recording observables at the
/// sample times.
Trajectory evolve(const Field& h0, const SolverConfig& cfg,
                  const CutoffSchedule& schedule = CutoffSchedule::none());

/// Records of the exact linear flow of f at the given times.
Trajectory linear_trajectory(const Field& f, const std::vector<double>& times, bool record_snapshots = false);

struct SplitTrajectory {
  Field v0;
  Field w0;
  Trajectory linear;     // v_L(t) = exp(t Lap) v0
  Trajectory remainder;  // w(t) = h(t) - v_L(t)
};

/// Evolves the v_L / w split of h0 = v0 + w0 (decomposition at scale N).
SplitTrajectory evolve_split(const Field& h0, double n, const SolverConfig& cfg);

/// ||(v_L + w) - h|| / ||h|| at each common sample time.  All three
/// trajectories need snapshots.
std::vector<double> reconstruction_errors(const SplitTrajectory& split, const Trajectory& full);

/// Max relative residual of (1/2) d/dt ||h||^2 = -||grad h||^2 + mu ||h||_{2+4/d}^{2+4/d}
/// over interior records in [t_from, t_to], using three-point differences.
double energy_identity_residual(const Trajectory& traj, double t_from = 0.0,
                                double t_to = std::numeric_limits<double>::infinity());

// Artifacts ---------------------------------------------------------------

/// CSV with a "#schema=1" line and columns t,l2,l2p4d_x,h1,linf,lowfreq_l2,N_of_t.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::vector<Record> read_trajectory_csv(std::istream& in);

/// 32-byte header (magic "HLF1", u32 d, f64 L, u32 M, f64 t, "LE" tag and
/// two zero bytes; all little-endian) followed by the half-spectrum
/// coefficients as interleaved f64 (re, im) in storage order.
void write_snapshot(std::ostream& out, const Field& f, double t);
Field read_snapshot(std::istream& in, double* t = nullptr);

}  // namespace heatlab
