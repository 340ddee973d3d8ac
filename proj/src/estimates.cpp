#include "heatlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>

#include "heatlab/errors.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() != v.size() || x.size() < 2) throw PreconditionError("fit_power_law: need at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(v[i] > 0.0)) throw DomainError("fit_power_law: non-positive value");
    sx += std::log(x[i]);
    sy += std::log(v[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(v[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw PreconditionError("fit_power_law: abscissae coincide");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::log(v[i]) - (r.intercept + r.slope * std::log(x[i]));
    ss_res += e * e;
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  r.t_a = *std::min_element(x.begin(), x.end());
  r.t_b = *std::max_element(x.begin(), x.end());
  r.points = x.size();
  return r;
}

FitResult decay_fit(const Trajectory& traj, double t_a, double t_b, double trim) {
  if (!(t_a >= 1.0)) throw PreconditionError("decay_fit: window must start at t >= 1");
  if (!(t_b > t_a)) throw PreconditionError("decay_fit: empty window");
  if (!(trim >= 0.0 && trim < 1.0)) throw DomainError("decay_fit: trim must lie in [0, 1)");
  const double upper = t_a + (1.0 - trim) * (t_b - t_a);
  std::vector<double> t;
  std::vector<double> v;
  for (const auto& r : traj.records) {
    if (r.t >= t_a && r.t <= upper * (1.0 + 1e-12)) {
      t.push_back(r.t);
      v.push_back(r.l2);
    }
  }
  if (t.size() < 8) throw PreconditionError("decay_fit: fewer than 8 records in window");
  FitResult r = fit_power_law(t, v);
  r.t_a = t_a;
  r.t_b = upper;
  return r;
}

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& g) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (g[i] + g[i - 1]);
  return sum;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

SpaceTimeNorm spacetime_norm(const Trajectory& traj, double q, double t_a, double t_b) {
  if (!(q >= 1.0) || std::isinf(q)) throw DomainError("spacetime_norm: q must be finite and >= 1");
  const bool from_l2 = near(q, 2.0);
  const bool from_crit = near(q, 2.0 + 4.0 / traj.dimension);
  if (!from_l2 && !from_crit && traj.snapshots.size() != traj.records.size()) {
    throw PreconditionError("spacetime_norm: this exponent needs snapshots");
  }
  std::vector<double> t;
  std::vector<double> g;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    if (r.t < t_a || r.t > t_b) continue;
    const double norm = from_l2 ? r.l2 : from_crit ? r.l2p4d : lebesgue_norm(traj.snapshots[i], q);
    t.push_back(r.t);
    g.push_back(std::pow(norm, q));
  }
  if (t.size() < 3) throw PreconditionError("spacetime_norm: fewer than 3 records in window");
  return SpaceTimeNorm{q, t.front(), t.back(), std::pow(trapezoid(t, g), 1.0 / q)};
}

double weighted_sup_norm(const Trajectory& traj, double beta, double t_a, double t_b) {
  double best = 0.0;
  for (const auto& r : traj.records) {
    if (r.t <= 0.0 || r.t < t_a || r.t > t_b) continue;
    best = std::max(best, std::pow(r.t, 0.5 * beta) * r.l2);
  }
  return best;
}

LinearSpacetime linear_spacetime_norm(const Field& f, double q, double horizon, int samples_per_decade) {
  if (!(q >= 1.0) || std::isinf(q)) throw DomainError("linear_spacetime_norm: q must be finite and >= 1");
  if (samples_per_decade < 4) throw DomainError("linear_spacetime_norm: too few samples per decade");
  const auto geo = geometry_for(f.grid());
  const double k2max = *std::max_element(geo->k_squared.begin(), geo->k_squared.end());
  const double t_min = 1e-2 / k2max;
  if (!(horizon > 10.0 * t_min)) throw DomainError("linear_spacetime_norm: horizon too short");

  const int count = static_cast<int>(std::ceil(std::log10(horizon / t_min) * samples_per_decade)) + 1;
  std::vector<double> t(static_cast<std::size_t>(count));
  std::vector<double> g(t.size());
  for (int i = 0; i < count; ++i) {
    t[static_cast<std::size_t>(i)] = t_min * std::pow(horizon / t_min, static_cast<double>(i) / (count - 1));
  }
  t.back() = horizon;
  for (std::size_t i = 0; i < t.size(); ++i) g[i] = std::pow(lebesgue_norm(linear_propagate(f, t[i]), q), q);
  const double g0 = std::pow(lebesgue_norm(f, q), q);

  // [0, t_min] by one trapezoid, then the log-spaced part in the variable log t.
  double body = 0.5 * t_min * (g0 + g.front());
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double du = std::log(t[i] / t[i - 1]);
    body += 0.5 * du * (g[i] * t[i] + g[i - 1] * t[i - 1]);
  }

  std::vector<double> tt;
  std::vector<double> gg;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= 0.1 * horizon && g[i] > 0.0) {
      tt.push_back(t[i]);
      gg.push_back(g[i]);
    }
  }
  double tail = 0.0;
  if (g.back() > 0.0) {
    const double s = tt.size() >= 2 ? fit_power_law(tt, gg).slope : 0.0;
    tail = s < -1.0 ? g.back() * horizon / (-s - 1.0) : std::numeric_limits<double>::infinity();
  }
  const double total = body + tail;
  LinearSpacetime out;
  out.value = std::pow(total, 1.0 / q);
  out.tail_fraction = std::isinf(tail) ? 1.0 : total > 0.0 ? tail / total : 0.0;
  return out;
}

StrichartzResult strichartz_ratio(const Field& h0, double gamma0, double horizon) {
  const int d = h0.grid().dimension();
  StrichartzResult r;
  r.denominator = sobolev_norm(h0, -gamma0);
  if (!(r.denominator > 0.0)) throw DegenerateDataError("strichartz_ratio: data has zero Sobolev norm");
  const auto num = linear_spacetime_norm(h0, 2.0 + 4.0 / d, horizon);
  r.numerator = num.value;
  r.tail_fraction = num.tail_fraction;
  r.ratio = r.numerator / r.denominator;
  return r;
}

StrichartzResult heat_spacetime_ratio(const Field& f, double q, double horizon) {
  const int d = f.grid().dimension();
  const double delta = 0.5 * d - (d + 2.0) / q;
  StrichartzResult r;
  r.denominator = sobolev_norm(f, delta);
  if (!(r.denominator > 0.0)) throw DegenerateDataError("heat_spacetime_ratio: data has zero Sobolev norm");
  const auto num = linear_spacetime_norm(f, q, horizon);
  r.numerator = num.value;
  r.tail_fraction = num.tail_fraction;
  r.ratio = r.numerator / r.denominator;
  return r;
}

double radial_embedding_ratio(const Field& f, double alpha, double q, double p, double s) {
  const int d = f.grid().dimension();
  const double relation = d * (1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q));
  if (std::abs(alpha + s - relation) > 1e-12) {
    throw PreconditionError("radial_embedding_ratio: alpha + s must equal d (1/p - 1/q)");
  }
  PhysicalField weighted = to_physical(f);
  for (std::size_t i = 0; i < weighted.values.size(); ++i) {
    weighted.values[i] *= std::pow(radius(f.grid(), i), alpha);
  }
  const double den = lebesgue_norm(fractional_laplacian(f, s), p);
  if (!(den > 0.0)) throw DegenerateDataError("radial_embedding_ratio: zero denominator");
  return lebesgue_norm(weighted, q) / den;
}

double heat_smoothing_ratio(const Field& f, double t, double p, double q) {
  if (!(t > 0.0)) throw DomainError("heat_smoothing_ratio: t must be positive");
  if (!(q >= p)) throw DomainError("heat_smoothing_ratio: requires q >= p");
  const int d = f.grid().dimension();
  const double den = lebesgue_norm(f, p);
  if (!(den > 0.0)) throw DegenerateDataError("heat_smoothing_ratio: zero denominator");
  const double gain = 0.5 * d * (1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q));
  return std::pow(t, gain) * lebesgue_norm(linear_propagate(f, t), q) / den;
}

LowFreqReport lowfreq_diagnostic(const Trajectory& traj, double alpha, double c_budget, LowFreqVariant variant,
                                 double gamma0) {
  if (!traj.schedule.active() || !near(traj.schedule.alpha, alpha)) {
    throw PreconditionError("lowfreq_diagnostic: trajectory schedule does not match alpha");
  }
  if (!(c_budget > 0.0)) throw DomainError("lowfreq_diagnostic: c_budget must be positive");
  if (variant == LowFreqVariant::improved && !(gamma0 >= alpha)) {
    throw DomainError("lowfreq_diagnostic: improved variant needs gamma0 >= alpha");
  }
  LowFreqReport out;
  out.variant = variant;
  out.alpha = alpha;
  out.gamma0 = gamma0;
  out.c_budget = c_budget;
  const double beta = variant == LowFreqVariant::weak ? alpha : gamma0;
  double y = 0.0;
  for (const auto& r : traj.records) {
    if (r.t > 0.0) y = std::max(y, std::pow(r.t, 0.5 * beta) * r.l2);
    if (r.t < 1.0) continue;
    const double n = r.n_of_t;
    const double tail = variant == LowFreqVariant::weak ? n * std::sqrt(r.t) * y
                                                        : n * std::pow(r.t, 0.5 * (1.0 - alpha)) * y;
    const double bracket = std::pow(r.t, -0.5 * beta) * (1.0 + n * std::pow(r.t, 0.5 * beta) + tail);
    out.t.push_back(r.t);
    out.raw_quotient.push_back(r.lowfreq_l2 / bracket);
  }
  if (out.t.empty()) throw PreconditionError("lowfreq_diagnostic: no records with t >= 1");
  out.max_raw = *std::max_element(out.raw_quotient.begin(), out.raw_quotient.end());
  out.max_quotient = out.max_raw / c_budget;
  return out;
}

DuhamelReport duhamel_norm_check(const std::vector<double>& times, const std::vector<Field>& forcing) {
  if (times.size() != forcing.size()) throw PreconditionError("duhamel_norm_check: size mismatch");
  if (times.size() < 40) throw PreconditionError("duhamel_norm_check: need at least 40 samples");
  if (times.front() != 0.0) throw PreconditionError("duhamel_norm_check: sampling must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw PreconditionError("duhamel_norm_check: times must increase");
  }
  const Grid& g = forcing.front().grid();
  const int d = g.dimension();
  const auto geo = geometry_for(g);
  const double r_in = 2.0 * (d + 2.0) / (d + 4.0);
  const double q_out = 2.0 * (d + 2.0) / d;

  DuhamelReport out;
  std::vector<double> f_pow(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) f_pow[i] = std::pow(lebesgue_norm(forcing[i], r_in), r_in);
  out.forcing_norm = std::pow(trapezoid(times, f_pow), 1.0 / r_in);

  Field u(g);
  out.response.push_back(u);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double h = times[j + 1] - times[j];
    auto c = u.coefficients();
    const auto f0 = forcing[j].coefficients();
    const auto f1 = forcing[j + 1].coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double z = -h * geo->k_squared[i];
      double p1 = 0.0;
      double p2 = 0.0;
      phi_functions(z, p1, p2);
      c[i] = std::exp(z) * c[i] + h * p1 * f0[i] + h * p2 * (f1[i] - f0[i]);
    }
    out.response.push_back(u);
  }
  if (out.forcing_norm == 0.0) return out;

  double energy = 0.0;
  std::vector<double> s_pow(times.size());
  std::vector<double> grad2(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const PhysicalField p = to_physical(out.response[i]);
    energy = std::max(energy, lebesgue_norm(p, 2.0));
    s_pow[i] = std::pow(lebesgue_norm(p, q_out), q_out);
    const double gn = sobolev_norm(out.response[i], 1.0);
    grad2[i] = gn * gn;
  }
  out.energy = energy / out.forcing_norm;
  out.strichartz = std::pow(trapezoid(times, s_pow), 1.0 / q_out) / out.forcing_norm;
  out.gradient = std::sqrt(trapezoid(times, grad2)) / out.forcing_norm;
  return out;
}

Field random_point_cloud(const Grid& grid, std::uint64_t seed, int count) {
  if (count <= 0) throw DomainError("random_point_cloud: count must be positive");
  std::mt19937_64 rng(seed);
  const auto m = static_cast<std::uint64_t>(grid.points());
  const int d = grid.dimension();
  PhysicalField p(grid);
  for (int j = 0; j < count; ++j) {
    std::size_t index = 0;
    for (int a = 0; a < d; ++a) index = index * m + rng() % m;
    const double weight = 0.5 + 0.5 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double sign = (rng() >> 63) ? -1.0 : 1.0;
    p.values[index] += sign * weight;
  }
  return to_spectral(p);
}

int resolve_jobs(int requested) {
  int jobs = requested > 0 ? requested : 1;
  if (const char* env = std::getenv("HEATLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) jobs = requested > 0 ? std::min(jobs, cap) : cap;
  }
  return std::max(1, jobs);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

std::vector<MemberResult> sorted_members(std::vector<MemberResult> members) {
  std::stable_sort(members.begin(), members.end(),
                   [](const MemberResult& a, const MemberResult& b) { return a.seed < b.seed; });
  return members;
}

}  // namespace

nlohmann::ordered_json aggregate_members(const std::vector<MemberResult>& members_in) {
  const auto members = sorted_members(members_in);
  std::vector<std::string> ratio_keys;
  std::vector<std::string> fit_keys;
  std::map<std::string, std::vector<double>> ratio_values;
  std::map<std::string, std::vector<double>> slope_values;
  for (const auto& m : members) {
    for (const auto& [key, value] : m.ratios.items()) {
      if (!value.is_number()) continue;
      if (!ratio_values.count(key)) ratio_keys.push_back(key);
      ratio_values[key].push_back(value.get<double>());
    }
    for (const auto& [key, value] : m.fits.items()) {
      if (!value.is_object() || !value.contains("slope")) continue;
      if (!slope_values.count(key)) fit_keys.push_back(key);
      slope_values[key].push_back(value["slope"].get<double>());
    }
  }
  nlohmann::ordered_json agg;
  agg["max"] = nlohmann::ordered_json::object();
  agg["median"] = nlohmann::ordered_json::object();
  agg["slopes"] = nlohmann::ordered_json::object();
  for (const auto& key : ratio_keys) {
    const auto& v = ratio_values[key];
    agg["max"][key] = *std::max_element(v.begin(), v.end());
    agg["median"][key] = median(v);
  }
  for (const auto& key : fit_keys) {
    const auto& v = slope_values[key];
    agg["slopes"][key] = {{"min", *std::min_element(v.begin(), v.end())},
                          {"max", *std::max_element(v.begin(), v.end())},
                          {"median", median(v)}};
  }
  return agg;
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["config_digest"] = config_digest;
  j["per_member"] = nlohmann::ordered_json::array();
  for (const auto& m : sorted_members(members)) {
    j["per_member"].push_back({{"seed", m.seed}, {"ratios", m.ratios}, {"fits", m.fits}});
  }
  j["aggregates"] = aggregate_members(members);
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    j["verdicts"].push_back({{"criterion_id", v.criterion_id}, {"pass", v.pass}, {"detail", v.detail}});
  }
  return j;
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

}  // namespace heatlab
