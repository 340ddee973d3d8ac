#include "heatlab/heat_flow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "heatlab/cutoff.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/littlewood_paley.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

std::vector<double> default_sample_times(double t_end, int count, double t_first) {
  if (!(t_end > 0.0)) throw DomainError("default_sample_times: t_end must be positive");
  std::vector<double> times{0.0};
  if (count <= 1 || t_first >= t_end) {
    times.push_back(t_end);
    return times;
  }
  const double ratio = std::log(t_end / t_first) / (count - 1);
  for (int i = 0; i < count; ++i) times.push_back(t_first * std::exp(ratio * i));
  times.back() = t_end;
  return times;
}

CutoffSchedule CutoffSchedule::sqrt_schedule(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("sqrt_schedule: alpha must be positive");
  return {Kind::sqrt_schedule, alpha};
}

double CutoffSchedule::at(double t) const {
  if (kind == Kind::none) return std::numeric_limits<double>::quiet_NaN();
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * alpha / t);
}

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::completed:
      return "completed";
    case TrajectoryStatus::blowup_detected:
      return "blowup_detected";
    case TrajectoryStatus::step_failure:
      return "step_failure";
  }
  return "unknown";
}

Record observe(const Field& f, double t, const CutoffSchedule& schedule) {
  const int d = f.grid().dimension();
  const PhysicalField p = to_physical(f, 1e-10);
  Record r;
  r.t = t;
  r.l2 = lebesgue_norm(p, 2.0);
  r.l2p4d = lebesgue_norm(p, 2.0 + 4.0 / d);
  r.h1 = sobolev_norm(f, 1.0);
  r.linf = lebesgue_norm(p, kInfinity);
  if (schedule.active()) {
    r.n_of_t = schedule.at(t);
    r.lowfreq_l2 = std::isinf(r.n_of_t)
                       ? r.l2
                       : std::sqrt(plancherel_mass(project(f, DyadicProjector{r.n_of_t, ProjectorMode::leq})));
  }
  return r;
}

Field linear_propagate(const Field& f, double t) {
  if (!(t >= 0.0)) throw DomainError("linear_propagate: t must be non-negative");
  Field out = f;
  if (t == 0.0) return out;
  const auto geo = geometry_for(f.grid());
  auto c = out.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-t * geo->k_squared[i]);
  return out;
}

void phi_functions(double z, double& phi1, double& phi2) {
  if (std::abs(z) < 0.1) {
    // Taylor series; |z|^9 / 11! is far below double precision here.
    double term1 = 1.0;  // z^n/(n+1)!
    double term2 = 0.5;  // z^n/(n+2)!
    phi1 = 0.0;
    phi2 = 0.0;
    for (int n = 0; n < 10; ++n) {
      phi1 += term1;
      phi2 += term2;
      term1 *= z / (n + 2);
      term2 *= z / (n + 3);
    }
    return;
  }
  const double em1 = std::expm1(z);
  phi1 = em1 / z;
  phi2 = (em1 - z) / (z * z);
}

namespace {

// Exponential integrator state for one grid.  Spectral work arrays use the
// half layout of Field.
class Stepper {
 public:
  Stepper(const Grid& grid, double mu, bool nonlinear)
      : grid_(grid),
        plan_(FftPlan::for_grid(grid)),
        geo_(geometry_for(grid)),
        coupling_(nonlinear ? mu : 0.0),
        physical_(grid.physical_size()),
        scratch_(grid.spectral_size()),
        n1_(grid.spectral_size()),
        n2_(grid.spectral_size()),
        stage_(grid.spectral_size()) {}

  double coupling() const { return coupling_; }

  // Evaluates mu D[|u + b|^{4/d}(u + b)] into `out`; returns max |u + b|.
  double nonlinear_term(const SpectralArray& u, const SpectralArray* background, SpectralArray& out) {
    scratch_ = u;
    if (background) {
      for (std::size_t i = 0; i < scratch_.size(); ++i) scratch_[i] += (*background)[i];
    }
    plan_->inverse_destructive(scratch_, physical_);
    double peak = 0.0;
    const int d = grid_.dimension();
    for (double& v : physical_) {
      const double a = std::abs(v);
      peak = (a > peak || std::isnan(a)) ? a : peak;
      v = coupling_ * critical_power(v, d);
    }
    if (coupling_ == 0.0) {
      std::fill(out.begin(), out.end(), Complex{0.0, 0.0});
      return peak;
    }
    plan_->forward_aligned(physical_, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= geo_->dealias_mask[i];
    return peak;
  }

  // Max |u + b| on the lattice without evaluating the nonlinearity.
  double peak(const SpectralArray& u, const SpectralArray* background) {
    scratch_ = u;
    if (background) {
      for (std::size_t i = 0; i < scratch_.size(); ++i) scratch_[i] += (*background)[i];
    }
    plan_->inverse_destructive(scratch_, physical_);
    double p = 0.0;
    for (double v : physical_) {
      const double a = std::abs(v);
      p = (a > p || std::isnan(a)) ? a : p;
    }
    return p;
  }

  // Advances u (and background b, which follows the linear flow) by dt.
  // `start_peak` receives max |u + b| at the start of the step.
  void advance(SpectralArray& u, SpectralArray* background, double dt, double& start_peak) {
    prepare(dt);
    if (coupling_ == 0.0) {
      start_peak = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < u.size(); ++i) u[i] *= decay_[i];
      if (background) {
        for (std::size_t i = 0; i < u.size(); ++i) (*background)[i] *= decay_[i];
      }
      return;
    }
    start_peak = nonlinear_term(u, background, n1_);
    for (std::size_t i = 0; i < u.size(); ++i) stage_[i] = decay_[i] * u[i] + w1_[i] * n1_[i];
    if (background) {
      for (std::size_t i = 0; i < u.size(); ++i) (*background)[i] *= decay_[i];
    }
    nonlinear_term(stage_, background, n2_);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = stage_[i] + w2_[i] * (n2_[i] - n1_[i]);
  }

 private:
  void prepare(double dt) {
    if (dt == cached_dt_) return;
    const std::size_t n = geo_->k_squared.size();
    decay_.resize(n);
    w1_.resize(n);
    w2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = -dt * geo_->k_squared[i];
      double p1 = 0.0;
      double p2 = 0.0;
      phi_functions(z, p1, p2);
      decay_[i] = std::exp(z);
      w1_[i] = dt * p1;
      w2_[i] = dt * p2;
    }
    cached_dt_ = dt;
  }

  Grid grid_;
  std::shared_ptr<const FftPlan> plan_;
  std::shared_ptr<const SpectralGeometry> geo_;
  double coupling_;
  RealArray physical_;
  SpectralArray scratch_, n1_, n2_, stage_;
  std::vector<double> decay_, w1_, w2_;
  double cached_dt_ = -1.0;
};

bool all_finite(const SpectralArray& u) {
  return std::all_of(u.begin(), u.end(), [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

std::vector<double> resolved_samples(const SolverConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw DomainError("evolve: t_end must be positive");
  std::vector<double> s = cfg.sample_times.empty() ? default_sample_times(cfg.t_end) : cfg.sample_times;
  for (double t : s) {
    if (!(t >= 0.0 && t <= cfg.t_end)) throw DomainError("evolve: sample time outside [0, t_end]");
  }
  if (!std::is_sorted(s.begin(), s.end())) throw DomainError("evolve: sample times must be sorted");
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.back() != cfg.t_end) s.push_back(cfg.t_end);
  return s;
}

void check_policy(const DtPolicy& p) {
  const bool ok = p.kind == DtPolicy::Kind::fixed ? p.dt > 0.0
                                                   : (p.dt0 > 0.0 && p.ratio >= 1.0 && p.dt_max >= p.dt0);
  if (!ok) throw DomainError("evolve: invalid time-step policy");
}

// Shared driver for evolve() and the remainder part of evolve_split().
Trajectory integrate(const Field& start, const Field* background0, const SolverConfig& cfg,
                     const CutoffSchedule& schedule) {
  check_policy(cfg.dt_policy);
  const Grid& g = start.grid();
  const int d = g.dimension();
  const auto samples = resolved_samples(cfg);

  Stepper stepper(g, cfg.mu, cfg.nonlinear);
  Trajectory traj;
  traj.dimension = d;
  traj.coupling = stepper.coupling();
  traj.schedule = schedule;

  SpectralArray u = start.data();
  std::unique_ptr<SpectralArray> bg;
  if (background0) bg = std::make_unique<SpectralArray>(background0->data());

  double t = 0.0;
  double nominal = cfg.dt_policy.kind == DtPolicy::Kind::fixed ? cfg.dt_policy.dt : cfg.dt_policy.dt0;
  const double nominal_max = cfg.dt_policy.kind == DtPolicy::Kind::fixed ? cfg.dt_policy.dt : cfg.dt_policy.dt_max;
  // Peak of the state about to be stepped; refreshed by every step.
  double peak = (traj.coupling != 0.0) ? stepper.peak(u, bg.get()) : 0.0;

  auto fail = [&](double at, bool nonfinite) {
    traj.status_time = at;
    // Focusing runs that overflow are treated as blow-up; defocusing ones cannot
    // blow up, so non-finite values there mean the scheme broke down.
    traj.status = (!nonfinite || traj.coupling > 0.0) ? TrajectoryStatus::blowup_detected
                                                       : TrajectoryStatus::step_failure;
  };

  for (double target : samples) {
    while (t < target) {
      if (traj.coupling != 0.0) {
        if (!std::isfinite(peak)) {
          fail(t, true);
          return traj;
        }
        if (peak > cfg.blowup_threshold) {
          fail(t, false);
          return traj;
        }
      }
      double dt = nominal;
      if (cfg.nonlinear_dt_guard > 0.0 && traj.coupling != 0.0 && peak > 0.0) {
        dt = std::min(dt, cfg.nonlinear_dt_guard / std::pow(peak, 4.0 / d));
      }
      // Land exactly on the target; absorb slivers into the current step.
      if (t + dt >= target || target - (t + dt) < 1e-6 * dt) dt = target - t;
      double start_peak = 0.0;
      stepper.advance(u, bg.get(), dt, start_peak);
      ++traj.steps;
      t = (t + dt >= target) ? target : t + dt;
      if (cfg.dt_policy.kind == DtPolicy::Kind::geometric) {
        nominal = std::min(nominal * cfg.dt_policy.ratio, nominal_max);
      }
      if (!all_finite(u)) {
        fail(t, true);
        return traj;
      }
      if (traj.coupling != 0.0) peak = stepper.peak(u, bg.get());
    }
    Field state(g, u);
    traj.records.push_back(observe(state, t, schedule));
    if (cfg.record_snapshots) traj.snapshots.push_back(std::move(state));
  }
  traj.status = TrajectoryStatus::completed;
  traj.status_time = t;
  return traj;
}

}  // namespace

Field step(const Field& f, double dt, const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  Stepper stepper(f.grid(), cfg.mu, cfg.nonlinear);
  SpectralArray u = f.data();
  double peak = 0.0;
  stepper.advance(u, nullptr, dt, peak);
  if (!all_finite(u)) throw StepFailure("step: non-finite values after update");
  return Field(f.grid(), std::move(u));
}

Trajectory evolve(const Field& h0, const SolverConfig& cfg, const CutoffSchedule& schedule) {
  return integrate(h0, nullptr, cfg, schedule);
}

Trajectory linear_trajectory(const Field& f, const std::vector<double>& times, bool record_snapshots) {
  Trajectory traj;
  traj.dimension = f.grid().dimension();
  traj.coupling = 0.0;
  for (double t : times) {
    Field state = linear_propagate(f, t);
    traj.records.push_back(observe(state, t));
    if (record_snapshots) traj.snapshots.push_back(std::move(state));
  }
  traj.status_time = times.empty() ? 0.0 : times.back();
  return traj;
}

SplitTrajectory evolve_split(const Field& h0, double n, const SolverConfig& cfg) {
  const Grid& g = h0.grid();
  // Same construction as decompose(), without the norm bookkeeping.
  Field v0 = multiply(make_cutoff(0.5, CutoffDirection::geq, g), project(h0, at_least(n)));
  v0.zero_mean();
  Field w0 = h0 - v0;
  Trajectory w = integrate(w0, &v0, cfg, CutoffSchedule::none());
  std::vector<double> times;
  for (const auto& r : w.records) times.push_back(r.t);
  Trajectory lin = linear_trajectory(v0, times, cfg.record_snapshots);
  return SplitTrajectory{std::move(v0), std::move(w0), std::move(lin), std::move(w)};
}

std::vector<double> reconstruction_errors(const SplitTrajectory& split, const Trajectory& full) {
  const auto& a = split.linear;
  const auto& b = split.remainder;
  if (a.snapshots.size() != a.records.size() || b.snapshots.size() != b.records.size() ||
      full.snapshots.size() != full.records.size()) {
    throw PreconditionError("reconstruction_errors: snapshots required");
  }
  std::vector<double> errors;
  std::size_t j = 0;
  for (std::size_t i = 0; i < full.records.size() && j < b.records.size(); ++i) {
    const double t = full.records[i].t;
    while (j < b.records.size() && b.records[j].t < t) ++j;
    if (j == b.records.size() || b.records[j].t != t) continue;
    Field sum = a.snapshots[j] + b.snapshots[j];
    sum -= full.snapshots[i];
    const double denom = std::sqrt(plancherel_mass(full.snapshots[i]));
    const double num = std::sqrt(plancherel_mass(sum));
    errors.push_back(denom > 0.0 ? num / denom : num);
  }
  return errors;
}

double energy_identity_residual(const Trajectory& traj, double t_from, double t_to) {
  std::vector<const Record*> window;
  for (const auto& r : traj.records) {
    if (r.t >= t_from && r.t <= t_to) window.push_back(&r);
  }
  if (window.size() < 3) throw PreconditionError("energy_identity_residual: need at least 3 records");
  const double q = 2.0 + 4.0 / traj.dimension;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const Record& a = *window[i - 1];
    const Record& b = *window[i];
    const Record& c = *window[i + 1];
    const double h0 = b.t - a.t;
    const double h1 = c.t - b.t;
    const double ea = 0.5 * a.l2 * a.l2;
    const double eb = 0.5 * b.l2 * b.l2;
    const double ec = 0.5 * c.l2 * c.l2;
    // Second-order derivative on a non-uniform stencil.
    const double lhs = (-h1 / (h0 * (h0 + h1))) * ea + ((h1 - h0) / (h0 * h1)) * eb + (h0 / (h1 * (h0 + h1))) * ec;
    const double dissipation = b.h1 * b.h1;
    const double reaction = std::pow(b.l2p4d, q);
    const double rhs = -dissipation + traj.coupling * reaction;
    const double scale = dissipation + std::abs(traj.coupling) * reaction;
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

// Artifacts ---------------------------------------------------------------

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "#schema=1\n";
  out << "t,l2,l2p4d_x,h1,linf,lowfreq_l2,N_of_t\n";
  for (const auto& r : traj.records) {
    out << format_double(r.t) << ',' << format_double(r.l2) << ',' << format_double(r.l2p4d) << ','
        << format_double(r.h1) << ',' << format_double(r.linf) << ',' << format_double(r.lowfreq_l2) << ','
        << format_double(r.n_of_t) << '\n';
  }
}

std::vector<Record> read_trajectory_csv(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 7) throw std::runtime_error("trajectory csv: expected 7 columns");
    records.push_back(Record{v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
  }
  return records;
}

void write_snapshot(std::ostream& out, const Field& f, double t) {
  const Grid& g = f.grid();
  out.write("HLF1", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dimension()));
  put_le<double>(out, g.period());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points()));
  put_le<double>(out, t);
  out.write("LE\0\0", 4);
  for (const auto& c : f.coefficients()) {
    put_le<double>(out, c.real());
    put_le<double>(out, c.imag());
  }
}

Field read_snapshot(std::istream& in, double* t) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HLF1", 4) != 0) throw std::runtime_error("snapshot: bad magic");
  const auto d = get_le<std::uint32_t>(in);
  const auto period = get_le<double>(in);
  const auto m = get_le<std::uint32_t>(in);
  const auto time = get_le<double>(in);
  char tag[4];
  in.read(tag, 4);
  if (!in || tag[0] != 'L' || tag[1] != 'E') throw std::runtime_error("snapshot: missing endianness tag");
  Grid g(static_cast<int>(d), period, static_cast<int>(m));
  SpectralArray coeffs(g.spectral_size());
  for (auto& c : coeffs) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    c = Complex{re, im};
  }
  if (t) *t = time;
  return Field(g, std::move(coeffs));
}

}  // namespace heatlab
