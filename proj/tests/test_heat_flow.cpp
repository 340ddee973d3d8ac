#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "heatlab/errors.hpp"
#include "heatlab/estimates.hpp"
#include "heatlab/heat_flow.hpp"
#include "heatlab/initial_data.hpp"
#include "heatlab/littlewood_paley.hpp"
#include "heatlab/spectral.hpp"
#include "support.hpp"

using namespace heatlab;
using testing::sample_field;

namespace {

constexpr double kPi = std::numbers::pi;

SolverConfig fixed_run(double mu, double t_end, double dt) {
  SolverConfig cfg;
  cfg.mu = mu;
  cfg.t_end = t_end;
  cfg.dt_policy = DtPolicy::fixed(dt);
  cfg.sample_times = {0.0, t_end};
  cfg.record_snapshots = true;
  cfg.nonlinear_dt_guard = 0.0;
  return cfg;
}

double l2_distance(const Field& a, const Field& b) { return std::sqrt(plancherel_mass(a - b)); }

Field rough(const Grid& g, double gamma0, std::uint64_t seed, double amplitude = 1.0) {
  RoughDataSpec s;
  s.gamma0 = gamma0;
  s.dimension = g.dimension();
  s.seed = seed;
  s.amplitude = amplitude;
  return sample_rough_radial(s, g);
}

}  // namespace

TEST_CASE("phi functions against closed forms") {
  for (double z = -40.0; z <= 1.0; z += 0.0173) {
    double p1 = 0;
    double p2 = 0;
    phi_functions(z, p1, p2);
    if (std::abs(z) < 1e-3) continue;
    const long double zl = z;
    const long double e1 = std::expm1(zl);
    CHECK(p1 == doctest::Approx(static_cast<double>(e1 / zl)).epsilon(1e-14));
    CHECK(p2 == doctest::Approx(static_cast<double>((e1 - zl) / (zl * zl))).epsilon(1e-12));
  }
  double p1 = 0;
  double p2 = 0;
  phi_functions(0.0, p1, p2);
  CHECK(p1 == 1.0);
  CHECK(p2 == 0.5);
  // Continuity across the series switch.
  double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  phi_functions(-0.0999999999, a1, a2);
  phi_functions(-0.1000000001, b1, b2);
  CHECK(std::abs(a1 - b1) < 1e-10);
  CHECK(std::abs(a2 - b2) < 1e-10);
}

TEST_CASE("linear propagation") {
  const Grid g(2, 2 * kPi, 32);
  SUBCASE("t = 0 is the identity") {
    const Field f = testing::random_field(g, 1);
    const Field p = linear_propagate(f, 0.0);
    for (std::size_t s = 0; s < g.spectral_size(); ++s) CHECK(p.coefficients()[s] == f.coefficients()[s]);
  }
  SUBCASE("single mode |k| = 2 at t = 1/4 decays by 1/e") {
    const Field f = sample_field(g, [](const auto& x) { return 3.0 * std::cos(2 * x[1]); });
    const auto p = to_physical(linear_propagate(f, 0.25));
    const auto e = testing::sample(g, [](const auto& x) { return 3.0 * std::exp(-1.0) * std::cos(2 * x[1]); });
    CHECK(testing::max_abs_diff(p, e) < 1e-14);
  }
  SUBCASE("semigroup") {
    const Field f = testing::random_field(g, 2);
    for (double s : {0.01, 0.3}) {
      for (double t : {0.02, 1.1}) {
        const Field a = linear_propagate(linear_propagate(f, s), t);
        const Field b = linear_propagate(f, s + t);
        CHECK(l2_distance(a, b) <= 1e-13 * std::sqrt(plancherel_mass(b)));
      }
    }
  }
  SUBCASE("negative time") { CHECK_THROWS_AS(linear_propagate(Field(g), -1e-9), DomainError); }
}

TEST_CASE("linear decay matches the Fourier quadrature") {
  const Grid g(2, 64.0, 256);
  const Field h0 = rough(g, 0.2, 3);
  const auto geo = geometry_for(g);
  for (double t : {0.5, 2.0, 20.0}) {
    long double sum = 0;
    const auto c = h0.coefficients();
    for (std::size_t s = 0; s < c.size(); ++s) {
      sum += geo->multiplicity[s] * std::exp(-2.0L * t * geo->k_squared[s]) * std::norm(c[s]);
    }
    const double oracle = static_cast<double>(std::sqrt(sum * g.volume()));
    CHECK(lebesgue_norm(linear_propagate(h0, t), 2.0) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("step") {
  const Grid g(2, 16.0, 64);
  SolverConfig cfg;
  cfg.mu = -1.0;
  SUBCASE("zero is a fixed point") {
    const Field z = step(Field(g), 0.1, cfg);
    CHECK(plancherel_mass(z) == 0.0);
  }
  SUBCASE("linear limit is the exact propagator") {
    cfg.nonlinear = false;
    const Field f = testing::random_field(g, 5);
    const Field a = step(f, 0.037, cfg);
    const Field b = linear_propagate(f, 0.037);
    CHECK(l2_distance(a, b) <= 1e-13 * std::sqrt(plancherel_mass(b)));
  }
  SUBCASE("spatially constant data follows the ODE to second order") {
    // u' = -u^3 with u(0) = 1: u(t) = 1 / sqrt(1 + 2t).
    Field f(g);
    f.coefficients()[0] = 1.0;
    double e_prev = 0.0;
    for (double dt : {0.02, 0.01, 0.005}) {
      Field u = f;
      for (int i = 0; i < static_cast<int>(std::lround(0.2 / dt)); ++i) u = step(u, dt, cfg);
      const double err = std::abs(u.mean().real() - 1.0 / std::sqrt(1.4));
      if (e_prev > 0.0) CHECK(std::log2(e_prev / err) == doctest::Approx(2.0).epsilon(0.1));
      e_prev = err;
    }
  }
  SUBCASE("non-positive dt") { CHECK_THROWS_AS(step(Field(g), 0.0, cfg), DomainError); }
  SUBCASE("overflow raises StepFailure") {
    Field f(g);
    f.coefficients()[0] = 1e120;
    cfg.mu = 1.0;
    CHECK_THROWS_AS(step(f, 0.1, cfg), StepFailure);
  }
}

TEST_CASE("Richardson self-convergence on a smooth defocusing run") {
  const Grid g(2, 16.0, 64);
  const Field h0 = gaussian_bump(g, 1.0, 1.0);
  auto final_state = [&](double dt) { return evolve(h0, fixed_run(-1.0, 1.0, dt)).snapshots.back(); };
  const double dt = 0.05;
  const Field ref = final_state(dt / 16);
  const double e1 = l2_distance(final_state(dt), ref);
  const double e2 = l2_distance(final_state(dt / 2), ref);
  const double order = std::log2(e1 / e2);
  CAPTURE(order);
  CHECK(order > 1.7);
  CHECK(order < 2.3);
}

TEST_CASE("defocusing mass is non-increasing and records stay finite") {
  const Grid g(2, 32.0, 128);
  SolverConfig cfg;
  cfg.mu = -1.0;
  cfg.t_end = 20.0;
  for (std::uint64_t seed : {1, 2}) {
    const Trajectory tr = evolve(rough(g, 0.2, seed, 4.0), cfg);
    REQUIRE(tr.status == TrajectoryStatus::completed);
    CHECK(tr.records.back().t == 20.0);
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      CHECK(tr.records[i].t > tr.records[i - 1].t);
      CHECK(tr.records[i].l2 <= tr.records[i - 1].l2 + 1e-10);
      CHECK(std::isfinite(tr.records[i].linf));
      CHECK(std::isfinite(tr.records[i].h1));
    }
  }
}

TEST_CASE("small focusing data completes and decays") {
  const Grid g(2, 32.0, 128);
  SolverConfig cfg;
  cfg.mu = 1.0;
  cfg.t_end = 10.0;
  const Trajectory tr = evolve(rough(g, 0.2, 1, 1e-3), cfg);
  CHECK(tr.status == TrajectoryStatus::completed);
  CHECK(tr.records.back().l2 < tr.records.front().l2);
  CHECK(tr.records.back().linf < tr.records[1].linf);
}

TEST_CASE("a large positive bump blows up") {
  const Grid g(2, 16.0, 64);
  SolverConfig cfg;
  cfg.mu = 1.0;
  cfg.t_end = 5.0;
  const Trajectory tr = evolve(gaussian_bump(g, 8.0, 1.0), cfg);
  CHECK(tr.status == TrajectoryStatus::blowup_detected);
  CHECK(tr.status_time > 0.0);
  CHECK(tr.status_time < 0.1);
  cfg.mu = -1.0;
  CHECK(evolve(gaussian_bump(g, 8.0, 1.0), cfg).status == TrajectoryStatus::completed);
}

TEST_CASE("sample times") {
  const auto t = default_sample_times(100.0);
  CHECK(t.size() == 61);
  CHECK(t.front() == 0.0);
  CHECK(t[1] == doctest::Approx(1e-3));
  CHECK(t.back() == 100.0);
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK_THROWS_AS(default_sample_times(0.0), DomainError);
  const Grid g(2, 8.0, 16);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.sample_times = {0.0, 2.0};
  CHECK_THROWS_AS(evolve(Field(g), cfg), DomainError);
  cfg.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(evolve(Field(g), cfg), DomainError);
}

TEST_CASE("observables") {
  const Grid g(2, 16.0, 64);
  const Field f = rough(g, 0.2, 7);
  const auto sched = CutoffSchedule::sqrt_schedule(0.05);
  const Record r = observe(f, 0.4, sched);
  CHECK(r.l2 == doctest::Approx(lebesgue_norm(f, 2.0)).epsilon(1e-14));
  CHECK(r.l2p4d == doctest::Approx(lebesgue_norm(f, 4.0)).epsilon(1e-14));
  CHECK(r.h1 == doctest::Approx(sobolev_norm(f, 1.0)).epsilon(1e-14));
  CHECK(r.linf == lebesgue_norm(f, kInfinity));
  CHECK(r.n_of_t == doctest::Approx(std::sqrt(0.1 / 0.4)));
  CHECK(r.lowfreq_l2 == doctest::Approx(lebesgue_norm(project(f, {0.5, ProjectorMode::leq}), 2.0)).epsilon(1e-12));
  CHECK(std::isnan(observe(f, 0.4).lowfreq_l2));
  CHECK(sched.at(1.0) > sched.at(2.0));
  CHECK(std::isinf(sched.at(0.0)));
  CHECK_THROWS_AS(CutoffSchedule::sqrt_schedule(0.0), DomainError);
}

TEST_CASE("split evolution") {
  const Grid g(2, 32.0, 128);
  SolverConfig cfg;
  cfg.mu = -1.0;
  cfg.t_end = 10.0;
  cfg.record_snapshots = true;
  cfg.sample_times = default_sample_times(10.0, 20);
  const Field h0 = rough(g, 0.2, 3, 1.0);
  const Trajectory full = evolve(h0, cfg);

  SUBCASE("a scale above the lattice reproduces the full run") {
    const auto split = evolve_split(h0, 4 * g.nyquist(), cfg);
    CHECK(plancherel_mass(split.v0) == 0.0);
    for (double e : reconstruction_errors(split, full)) CHECK(e <= 1e-8);
  }
  SUBCASE("defocusing reconstruction") {
    for (double n : {2.0, 8.0}) {
      const auto split = evolve_split(h0, n, cfg);
      const auto errors = reconstruction_errors(split, full);
      CHECK(errors.size() == full.records.size());
      for (double e : errors) CHECK(e <= 1e-4);
    }
  }
  SUBCASE("linear part obeys the negative Sobolev decay bound") {
    const double gamma0 = 0.2;
    const auto split = evolve_split(h0, 4.0, cfg);
    const double h0_norm = sobolev_norm(h0, -gamma0);
    const auto geo = geometry_for(g);
    for (const auto& r : split.linear.records) {
      if (r.t < 1.0) continue;
      // Oracle: sum of e^{-2 t k^2} |v0_k|^2 over the lattice.
      long double sum = 0;
      const auto c = split.v0.coefficients();
      for (std::size_t s = 0; s < c.size(); ++s) sum += geo->multiplicity[s] * std::exp(-2.0L * r.t * geo->k_squared[s]) * std::norm(c[s]);
      const double oracle = static_cast<double>(std::sqrt(sum * g.volume()));
      CHECK(r.l2 == doctest::Approx(oracle).epsilon(1e-10));
      CHECK(r.l2 <= 2.0 * std::pow(r.t, -0.5 * gamma0) * h0_norm);
    }
  }
  SUBCASE("snapshots are required") {
    SolverConfig plain = cfg;
    plain.record_snapshots = false;
    const auto split = evolve_split(h0, 8.0, plain);
    CHECK_THROWS_AS(reconstruction_errors(split, full), PreconditionError);
  }
}

TEST_CASE("energy identity") {
  const Grid g(2, 16.0, 64);
  SUBCASE("zero field") {
    const Trajectory tr = linear_trajectory(Field(g), {0.0, 0.1, 0.2, 0.3});
    CHECK(energy_identity_residual(tr) == 0.0);
  }
  SUBCASE("linear flow") {
    std::vector<double> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.1 + 0.0025 * i);
    const Trajectory tr = linear_trajectory(gaussian_bump(g, 1.0, 1.0), times);
    CHECK(energy_identity_residual(tr) <= 1e-4);
  }
  SUBCASE("defocusing residual shrinks with dt") {
    const Field h0 = gaussian_bump(g, 2.0, 1.0);
    auto residual = [&](double dt) {
      SolverConfig cfg = fixed_run(-1.0, 1.0, dt);
      cfg.record_snapshots = false;
      cfg.sample_times.clear();
      for (int i = 0; i <= static_cast<int>(std::lround(1.0 / dt)); ++i) cfg.sample_times.push_back(i * dt);
      return energy_identity_residual(evolve(h0, cfg), 0.1);
    };
    const double r1 = residual(0.02);
    const double r2 = residual(0.01);
    CAPTURE(r1);
    CAPTURE(r2);
    CHECK(r1 <= 1e-2);
    CHECK(r2 <= 0.55 * r1);
  }
  SUBCASE("needs three records") {
    CHECK_THROWS_AS(energy_identity_residual(linear_trajectory(Field(g), {0.0, 1.0})), PreconditionError);
  }
}

TEST_CASE("scaling covariance") {
  // h_lambda(t, x) = lambda^{d/2} h(lambda^2 t, lambda x) solves the same equation.
  const double lambda = 2.0;
  const Grid g(2, 16.0, 64);
  const Grid gs(2, 16.0 / lambda, 64);
  const Field h0 = gaussian_bump(g, 2.0, 1.5);
  const Field h0s = lambda * gaussian_bump(gs, 2.0, 1.5 / lambda);
  const Field a = evolve(h0, fixed_run(-1.0, 0.8, 0.01)).snapshots.back();
  const Field b = evolve(h0s, fixed_run(-1.0, 0.8 / (lambda * lambda), 0.01 / (lambda * lambda))).snapshots.back();
  const auto pa = to_physical(a);
  auto pb = to_physical(b);
  for (double& v : pb.values) v /= lambda;
  double peak = 0.0;
  for (double v : pa.values) peak = std::max(peak, std::abs(v));
  CHECK(testing::max_abs_diff(pa, pb) <= 1e-12 * peak);
}

TEST_CASE("heat smoothing constant") {
  const Grid g(2, 32.0, 256);
  // A lattice delta of unit mass tends to the sharp L1 -> L2 constant (8 pi)^{-d/4}.
  PhysicalField delta(g);
  delta.values[0] = 1.0 / g.cell_volume();
  const Field f = to_spectral(delta);
  const double sharp = std::pow(8 * kPi, -0.5);
  CHECK(heat_smoothing_ratio(f, 1.0, 1.0, 2.0) == doctest::Approx(sharp).epsilon(1e-6));
  // Same constant for L2 -> Linf.
  CHECK(heat_smoothing_ratio(f, 1.0, 2.0, kInfinity) <= sharp * (1 + 1e-9));
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Field cloud = random_point_cloud(g, seed, 64);
    for (double t : {0.1, 1.0, 10.0}) {
      CHECK(heat_smoothing_ratio(cloud, t, 1.0, 2.0) <= sharp * (1 + 1e-9));
      CHECK(heat_smoothing_ratio(cloud, t, 2.0, kInfinity) <= sharp * (1 + 1e-9));
    }
  }
}

TEST_CASE("trajectory CSV round trip") {
  const Grid g(2, 16.0, 64);
  SolverConfig cfg;
  cfg.t_end = 2.0;
  cfg.sample_times = default_sample_times(2.0, 10);
  const Trajectory tr = evolve(gaussian_bump(g, 1.0, 1.0), cfg, CutoffSchedule::sqrt_schedule(0.1));
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const std::string text = ss.str();
  CHECK(text.rfind("#schema=1\nt,l2,l2p4d_x,h1,linf,lowfreq_l2,N_of_t\n", 0) == 0);
  const auto back = read_trajectory_csv(ss);
  REQUIRE(back.size() == tr.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t == tr.records[i].t);
    CHECK(back[i].l2 == tr.records[i].l2);
    CHECK(back[i].h1 == tr.records[i].h1);
    CHECK(back[i].lowfreq_l2 == tr.records[i].lowfreq_l2);
    CHECK(back[i].n_of_t == tr.records[i].n_of_t);
  }
  CHECK(std::isinf(back[0].n_of_t));
  std::stringstream bad("t,l2\n1,2\n");
  CHECK_THROWS(read_trajectory_csv(bad));
}

TEST_CASE("snapshot round trip") {
  for (int d : {2, 3}) {
    const Grid g(d, 5.5, d == 2 ? 32 : 8);
    const Field f = testing::random_field(g, 3);
    std::stringstream ss;
    write_snapshot(ss, f, 0.125);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 32 + 16 * g.spectral_size());
    CHECK(bytes.substr(0, 4) == "HLF1");
    CHECK(bytes.substr(28, 2) == "LE");
    CHECK(static_cast<unsigned char>(bytes[4]) == d);
    double t = 0;
    const Field back = read_snapshot(ss, &t);
    CHECK(t == 0.125);
    CHECK(back.grid() == g);
    for (std::size_t s = 0; s < g.spectral_size(); ++s) CHECK(back.coefficients()[s] == f.coefficients()[s]);
  }
  std::stringstream bad("HLF2xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx");
  CHECK_THROWS(read_snapshot(bad));
  std::stringstream truncated(std::string("HLF1\x02\0\0\0", 8));
  CHECK_THROWS(read_snapshot(truncated));
}
