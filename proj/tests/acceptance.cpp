// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.  Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "heatlab/config.hpp"
#include "heatlab/estimates.hpp"
#include "heatlab/heat_flow.hpp"
#include "heatlab/initial_data.hpp"
#include "heatlab/littlewood_paley.hpp"
#include "heatlab/runner.hpp"
#include "heatlab/spectral.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kL = 128.0;
constexpr int kM = 512;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5, 6, 7, 8};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

Field rough(double gamma0, double amplitude, std::uint64_t seed, const Grid& g, double k_hi = 0.0) {
  RoughDataSpec s;
  s.gamma0 = gamma0;
  s.amplitude = amplitude;
  s.seed = seed;
  s.dimension = g.dimension();
  s.k_hi = k_hi;
  return sample_rough_radial(s, g);
}

// Two thirds of the Nyquist frequency of the coarse grid, so that both
// refinement levels carry the same modes.
double coarse_band(double L, int m_coarse) { return (2.0 / 3.0) * kPi * m_coarse / L; }

// Nonlinear runs shared by criteria 2 and 4.
struct NonlinearRun {
  double gamma0, amplitude;
  std::uint64_t seed;
  Trajectory traj;
};

const std::vector<NonlinearRun>& defocusing_runs() {
  static std::optional<std::vector<NonlinearRun>> runs;
  if (!runs) {
    runs.emplace();
    const Grid g(2, kL, kM);
    for (double g0 : {0.1, 0.2}) {
      for (double amp : {1.0, 4.0}) {
        for (auto seed : kSeeds) {
          SolverConfig sc;
          sc.mu = -1.0;
          sc.t_end = 80.0;
          runs->push_back({g0, amp, seed, evolve(rough(g0, amp, seed, g), sc)});
        }
      }
    }
  }
  return *runs;
}

// Independent L^2 norm of the free heat flow: sum over the full lattice of
// |c_m|^2 exp(-2 t |k|^2), times the box volume.
std::vector<double> quadrature_l2(const Field& f, const std::vector<double>& times) {
  const Grid& g = f.grid();
  const int M = g.points();
  const double dk = 2.0 * kPi / g.period();
  std::vector<long double> mass;
  std::vector<long double> k2;
  for (int a = -M / 2; a < M / 2; ++a) {
    for (int b = -M / 2; b < M / 2; ++b) {
      const auto c = f.coefficient({a, b, 0});
      mass.push_back(std::norm(c));
      k2.push_back(dk * dk * (static_cast<long double>(a) * a + static_cast<long double>(b) * b));
    }
  }
  std::vector<double> out;
  for (double t : times) {
    long double s = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) s += mass[i] * std::exp(-2.0L * t * k2[i]);
    out.push_back(static_cast<double>(std::sqrt(s * g.period() * g.period())));
  }
  return out;
}

Outcome linear_decay() {
  Outcome o;
  const Grid g(2, kL, kM);
  const auto times = default_sample_times(50.0);
  double elapsed = 0.0;
  double oracle_time = 0.0;
  double worst_dev = 0.0;
  double worst_oracle = 0.0;
  std::string slopes;
  for (double g0 : {0.1, 0.2}) {
    double lo = kInfinity;
    double hi = -kInfinity;
    for (auto seed : kSeeds) {
      const auto t0 = std::chrono::steady_clock::now();
      const Field h0 = rough(g0, 1.0, seed, g);
      const Trajectory tr = linear_trajectory(h0, times);
      const double slope = decay_fit(tr, 1.0, 50.0).slope;
      elapsed += seconds_since(t0);
      const auto t1 = std::chrono::steady_clock::now();
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
      worst_dev = std::max(worst_dev, std::abs(slope + 0.5 * g0));
      const auto oracle = quadrature_l2(h0, times);
      for (std::size_t i = 0; i < times.size(); ++i) {
        worst_oracle = std::max(worst_oracle, std::abs(tr.records[i].l2 - oracle[i]) / oracle[i]);
      }
      oracle_time += seconds_since(t1);
    }
    slopes += " g0=" + fmt("%.1f", g0) + " slopes [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]";
  }
  o.require(worst_dev <= 0.02, "max |slope + g0/2| = " + fmt("%.4f", worst_dev) + " (<= 0.02)," + slopes);
  o.require(worst_oracle <= 1e-8, "oracle max rel diff = " + fmt("%.2e", worst_oracle) + " (<= 1e-8)");
  o.require(elapsed < 60.0, "runtime " + fmt("%.1f", elapsed) + " s (< 60 s), oracle " + fmt("%.1f", oracle_time) + " s");
  return o;
}

Outcome nonlinear_decay() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::pair<double, double>> worst;  // group -> (max |dev|, min r2)
  bool completed = true;
  for (const auto& r : defocusing_runs()) {
    const std::string key = "g0=" + fmt("%.1f", r.gamma0) + " A=" + fmt("%g", r.amplitude);
    auto& w = worst.try_emplace(key, 0.0, 1.0).first->second;
    if (r.traj.status != TrajectoryStatus::completed) {
      completed = false;
      continue;
    }
    const auto fit = decay_fit(r.traj, 1.0, 80.0);
    w.first = std::max(w.first, std::abs(fit.slope + 0.5 * r.gamma0));
    w.second = std::min(w.second, fit.r_squared);
  }
  o.require(completed, "all 32 runs completed");
  for (const auto& [key, w] : worst) {
    o.require(w.first <= 0.05 && w.second >= 0.95,
              key + " max |slope + g0/2| " + fmt("%.4f", w.first) + " min r2 " + fmt("%.4f", w.second));
  }
  o.detail += "; " + fmt("%.0f", seconds_since(t0)) + " s";
  return o;
}

Outcome focusing_small_data() {
  Outcome o;
  const Grid g(2, kL, kM);
  double dev = 0.0;
  double r2 = 1.0;
  bool completed = true;
  for (auto seed : kSeeds) {
    SolverConfig sc;
    sc.mu = 1.0;
    sc.t_end = 100.0;
    const Trajectory tr = evolve(rough(0.2, 1e-2, seed, g), sc);
    if (tr.status != TrajectoryStatus::completed || tr.records.back().t != 100.0) {
      completed = false;
      continue;
    }
    const auto fit = decay_fit(tr, 1.0, 80.0);
    dev = std::max(dev, std::abs(fit.slope + 0.1));
    r2 = std::min(r2, fit.r_squared);
  }
  o.require(completed, "8 runs completed to t = 100");
  o.require(dev <= 0.05, "max |slope + 0.1| = " + fmt("%.4f", dev));
  o.require(r2 >= 0.95, "min r2 = " + fmt("%.4f", r2));
  return o;
}

Outcome mass_and_energy() {
  Outcome o;
  double worst_rise = -kInfinity;
  for (const auto& r : defocusing_runs()) {
    for (std::size_t i = 1; i < r.traj.records.size(); ++i) {
      worst_rise = std::max(worst_rise, r.traj.records[i].l2 - r.traj.records[i - 1].l2);
    }
  }
  o.require(worst_rise <= 1e-10, "largest L2 increase over 32 runs = " + fmt("%.3e", worst_rise));

  const Grid g(2, kL, kM);
  const Field h0 = rough(0.2, 4.0, 1, g);
  auto residual = [&](double dt) {
    SolverConfig sc;
    sc.mu = -1.0;
    sc.t_end = 10.0;
    sc.dt_policy = DtPolicy::fixed(dt);
    sc.nonlinear_dt_guard = 0.0;
    for (long i = 0; i <= std::lround(10.0 / dt); ++i) sc.sample_times.push_back(i * dt);
    return energy_identity_residual(evolve(h0, sc), 1.0, 10.0);
  };
  const double r1 = residual(0.05);
  const double r2 = residual(0.025);
  o.require(r1 <= 1e-2, "energy residual dt=0.05: " + fmt("%.3e", r1));
  o.require(r2 <= 0.5 * r1, "dt=0.025: " + fmt("%.3e", r2) + " (ratio " + fmt("%.3f", r2 / r1) + ")");
  return o;
}

Outcome strichartz() {
  Outcome o;
  const double band = coarse_band(kL, 256);
  std::vector<double> fine;
  double drift = 0.0;
  for (std::uint64_t seed = 1; seed <= 32; ++seed) {
    const double a = strichartz_ratio(rough(0.2, 1.0, seed, Grid(2, kL, 512), band), 0.2, 2000.0).ratio;
    const double b = strichartz_ratio(rough(0.2, 1.0, seed, Grid(2, kL, 256), band), 0.2, 2000.0).ratio;
    fine.push_back(a);
    drift = std::max(drift, std::abs(b / a - 1.0));
  }
  const double spread = *std::max_element(fine.begin(), fine.end()) / median(fine);
  o.require(spread < 10.0, "max/median over 32 members = " + fmt("%.4f", spread));
  o.require(drift <= 0.10, "max |r(256)/r(512) - 1| = " + fmt("%.2e", drift));
  return o;
}

Outcome decomposition() {
  Outcome o;
  const Grid g(2, 32.0, 512);
  const std::vector<double> ns{4, 8, 16, 32, 64};
  for (double g0 : {0.1, 0.2}) {
    double leak = -kInfinity;
    double w0 = -kInfinity;
    double control = 0.0;
    for (auto seed : kSeeds) {
      const Field h0 = rough(g0, 1.0, seed, g);
      std::vector<double> leaks;
      std::vector<double> w0s;
      for (double n : ns) {
        const auto d = decompose(h0, n, g0);
        leaks.push_back(mismatch_leak(h0, n));
        w0s.push_back(d.w0_l2);
        control = std::max(control, d.v0_sobolev / d.h0_sobolev);
      }
      leak = std::max(leak, fit_power_law(ns, leaks).slope);
      w0 = std::max(w0, fit_power_law(ns, w0s).slope);
    }
    const std::string tag = "g0=" + fmt("%.1f", g0) + " ";
    o.require(leak <= -0.8, tag + "leak slope " + fmt("%.4f", leak));
    o.require(w0 <= g0 + 0.1, tag + "w0 slope " + fmt("%.4f", w0));
    o.require(control < 5.0, tag + "v0 control " + fmt("%.4f", control));
  }
  return o;
}

Outcome bernstein() {
  Outcome o;
  const Grid g(2, 32.0, 256);
  double lo = kInfinity;
  double hi = 0.0;
  int outside = 0;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 64; ++seed) {
    const Field cloud = random_point_cloud(g, seed, 64);
    for (double n = 2.0 * g.dual_spacing(); 2.0 * n <= g.nyquist(); n *= 2.0) {
      const double r = bernstein_ratio(cloud, n, 2.0, kInfinity);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      for (double s : {-1.0, -0.5, 0.5, 1.0}) {
        const double q = bernstein_derivative_ratio(cloud, n, s);
        const double bound = std::pow(2.0, std::abs(s));
        ++checked;
        if (q > bound || q < 1.0 / bound) ++outside;
      }
    }
  }
  o.require(hi / lo < 10.0, "(2,inf) max/min over N and 64 members = " + fmt("%.4f", hi / lo));
  o.require(outside == 0, std::to_string(outside) + " of " + std::to_string(checked) + " band ratios outside [2^-|s|, 2^|s|]");
  return o;
}

Outcome bootstrap() {
  Outcome o;
  const double alpha = 0.05;
  const double c_budget = 1.0;
  const double band = coarse_band(kL, 256);
  double worst_drift = 0.0;
  double worst_q = 0.0;
  for (std::uint64_t seed : {1, 2}) {
    std::vector<double> raw;
    for (int m : {256, 512}) {
      SolverConfig sc;
      sc.mu = -1.0;
      sc.t_end = 80.0;
      const Trajectory tr = evolve(rough(0.2, 1.0, seed, Grid(2, kL, m), band), sc, CutoffSchedule::sqrt_schedule(alpha));
      const auto rep = lowfreq_diagnostic(tr, alpha, c_budget);
      raw.push_back(rep.max_raw);
      worst_q = std::max(worst_q, rep.max_quotient);
    }
    worst_drift = std::max(worst_drift, std::abs(raw[0] / raw[1] - 1.0));
  }
  o.require(worst_q <= 1.0, "max quotient with c_budget = 1: " + fmt("%.4f", worst_q));
  o.require(worst_drift <= 0.2, "max drift M 256 -> 512: " + fmt("%.2e", worst_drift));
  return o;
}

// Closed-form response to F(t, x) = b cos(t) cos(x) on [0, 2 pi]^2:
// u = b cos(x) (a cos t + sin t - a e^{-a t}) / (a^2 + 1), a = 1.
double duhamel_amplitude(double t) { return (std::cos(t) + std::sin(t) - std::exp(-t)) / 2.0; }

// Simpson rule on [lo, hi] with n (even) panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

Outcome convergence() {
  Outcome o;
  {
    const Grid g(2, 16.0, 64);
    const Field h0 = gaussian_bump(g, 2.0, 1.0);
    auto final_state = [&](double dt) {
      SolverConfig sc;
      sc.mu = -1.0;
      sc.t_end = 1.0;
      sc.dt_policy = DtPolicy::fixed(dt);
      sc.sample_times = {0.0, 1.0};
      sc.record_snapshots = true;
      sc.nonlinear_dt_guard = 0.0;
      return evolve(h0, sc).snapshots.back();
    };
    const double dt = 0.0125;
    const Field ref = final_state(dt / 16);
    const double e1 = std::sqrt(plancherel_mass(final_state(dt) - ref));
    const double e2 = std::sqrt(plancherel_mass(final_state(dt / 2) - ref));
    const double order = std::log2(e1 / e2);
    o.require(order >= 1.7 && order <= 2.3, "Richardson order " + fmt("%.3f", order));
  }
  {
    const double b = 0.7;
    const double T = 2.0 * kPi;
    const Grid g(2, 2.0 * kPi, 32);
    Field mode(g);
    mode.set_mode({1, 0, 0}, 0.5 * b);
    std::vector<double> times;
    std::vector<Field> forcing;
    for (int i = 0; i <= 160; ++i) {
      times.push_back(T * i / 160);
      forcing.push_back(std::cos(times.back()) * mode);
    }
    const auto rep = duhamel_norm_check(times, forcing);

    const double area = g.volume();
    auto cos_mean = [&](double q) { return simpson([q](double x) { return std::pow(std::abs(std::cos(x)), q); }, 0, 2 * kPi) / (2 * kPi); };
    const double r = 4.0 / 3.0;
    const double forcing_norm =
        std::pow(simpson([r](double t) { return std::pow(std::abs(std::cos(t)), r); }, 0, T) * std::pow(b, r) * cos_mean(r) * area, 1 / r);
    double sup = 0.0;
    for (int i = 0; i <= 20000; ++i) sup = std::max(sup, std::abs(duhamel_amplitude(T * i / 20000)));
    const double energy = sup * b * std::sqrt(area / 2);
    const double strich =
        std::pow(simpson([](double t) { return std::pow(duhamel_amplitude(t), 4); }, 0, T) * std::pow(b, 4) * cos_mean(4) * area, 0.25);
    const double grad = std::sqrt(simpson([](double t) { return std::pow(duhamel_amplitude(t), 2); }, 0, T) * b * b * area / 2);

    double worst = std::abs(rep.forcing_norm / forcing_norm - 1);
    worst = std::max(worst, std::abs(rep.energy / (energy / forcing_norm) - 1));
    worst = std::max(worst, std::abs(rep.strichartz / (strich / forcing_norm) - 1));
    worst = std::max(worst, std::abs(rep.gradient / (grad / forcing_norm) - 1));
    double field_err = 0.0;
    for (std::size_t i = 0; i < times.size(); i += 16) {
      const Field exact = duhamel_amplitude(times[i]) * mode;
      field_err = std::max(field_err, std::sqrt(plancherel_mass(rep.response[i] - exact) / plancherel_mass(mode)));
    }
    o.require(worst <= 0.02, "Duhamel norms max rel diff " + fmt("%.2e", worst));
    o.require(field_err <= 0.02, "Duhamel response max rel error " + fmt("%.2e", field_err));
  }
  return o;
}

std::map<std::string, std::string> listed_artifacts(const fs::path& root) {
  std::ifstream in(root / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  std::map<std::string, std::string> out;
  for (const auto& a : m["artifacts"]) out[a["path"].get<std::string>()] = a["sha256"].get<std::string>();
  return out;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "heatlab_acceptance_determinism";
  fs::remove_all(base);
  const std::string config = std::string(HEATLAB_CONFIGS) + "/verify.ini";
  std::ostringstream quiet;
  RunOptions opt;
  opt.plots = true;
  opt.log = &quiet;
  std::vector<int> codes;
  for (const char* name : {"a", "b"}) {
    opt.output_dir = (base / name).string();
    codes.push_back(run_command("verify", config, opt));
  }
  o.require(codes[0] == 0 && codes[1] == 0, "verify exit codes " + std::to_string(codes[0]) + ", " + std::to_string(codes[1]));
  const auto a = listed_artifacts(base / "a");
  const auto b = listed_artifacts(base / "b");
  int differing = 0;
  for (const auto& [path, sum] : a) {
    if (file_bytes(base / "a" / path) != file_bytes(base / "b" / path)) ++differing;
  }
  o.require(a == b && !a.empty(), std::to_string(a.size()) + " listed artifacts with equal checksums");
  o.require(differing == 0, std::to_string(differing) + " artifacts differ byte-wise");
  fs::remove_all(base);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "linear decay", linear_decay},
      {2, "defocusing decay", nonlinear_decay},
      {3, "focusing small data", focusing_small_data},
      {4, "mass and energy", mass_and_energy},
      {5, "space-time ratio", strichartz},
      {6, "decomposition slopes", decomposition},
      {7, "Bernstein suite", bernstein},
      {8, "low-frequency bootstrap", bootstrap},
      {9, "scheme convergence", convergence},
      {10, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
