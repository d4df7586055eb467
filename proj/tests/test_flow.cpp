// Flow assembly and time integration: right-hand-side identities, exact
// solutions, scaling equivariance, step-size policy, termination paths, and
// the DeTurck pullback equivalence.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "crflow/curvature.hpp"
#include "crflow/diagnostics.hpp"
#include "crflow/elliptic.hpp"
#include "crflow/errors.hpp"
#include "crflow/flow.hpp"
#include "crflow/gauge.hpp"
#include "crflow/metrics.hpp"
#include "crflow/radial_grid.hpp"
#include "oracles/reference_values.hpp"

using namespace crflow;

namespace {

std::shared_ptr<const RadialGrid> shared_grid(double lo, double hi,
                                              std::size_t n, int m) {
  return std::make_shared<const RadialGrid>(build_radial_grid(lo, hi, n, m));
}

RadialMetric bump_metric(const std::shared_ptr<const RadialGrid>& grid) {
  std::vector<double> A(grid->n_nodes), B(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double x = grid->x[i];
    A[i] = 1.0 + 0.15 * std::exp(-0.5 * (x - 1.0) * (x - 1.0) / 0.36);
    B[i] = 1.0 - 0.1 * std::exp(-0.5 * (x - 1.6) * (x - 1.6) / 0.49);
  }
  return make_radial_metric(grid, std::move(A), std::move(B), 0.0);
}

RadialMetric schwarzschild_flat(const std::shared_ptr<const RadialGrid>& grid,
                                double A0) {
  std::vector<double> A(grid->n_nodes), B(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double w = 1.0 + 0.5 * A0 / grid->nodes[i];
    A[i] = B[i] = w * w;
  }
  return make_radial_metric(grid, std::move(A), std::move(B), 1.0);
}

}  // namespace

TEST_CASE("radial right-hand sides assemble from their ingredients") {
  const auto grid = shared_grid(0.5, 50.0, 128, 3);
  const auto g = bump_metric(grid);
  const auto curv = ricci_radial(g, 0.0);
  const auto a = g.a_profile();
  const auto b = g.b_profile();

  // ricci: exactly -2 Ric
  const auto rr = ricci_rhs(g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(rr.rr[i] == -2.0 * curv.ricci.rr[i]);
    CHECK(rr.tt[i] == -2.0 * curv.ricci.tt[i]);
  }

  // crf: -2 E - 2 p g with the solved pressure
  std::vector<double> source(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i)
    source[i] = -curv.deviation_norm_sq[i];
  const auto p = solve_pressure_radial(g, 0.0, source);
  const auto rc = crf_rhs(g, p, 0.0);
  double scale = 1.0;
  for (std::size_t i = 0; i < grid->n_nodes; ++i)
    scale = std::max(scale, std::abs(rc.rr[i]));
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double want_rr =
        -2.0 * curv.deviation.rr[i] - 2.0 * p.values[i] * a[i];
    const double want_tt =
        -2.0 * curv.deviation.tt[i] - 2.0 * p.values[i] * b[i];
    CHECK(std::abs(rc.rr[i] - want_rr) <= 1e-13 * scale);
    CHECK(std::abs(rc.tt[i] - want_tt) <= 1e-13 * scale);
  }

  // dtcrf: crf + L_W g against the flat reference
  const auto ref = flat_radial_metric(grid);
  const auto rd = dtcrf_rhs(g, p, 0.0, ref);
  const auto gauge = deturck_gauge_term(g, ref);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(std::abs(rd.rr[i] - rc.rr[i] - gauge.lie_wg.rr[i]) <= 1e-13 * scale);
    CHECK(std::abs(rd.tt[i] - rc.tt[i] - gauge.lie_wg.tt[i]) <= 1e-13 * scale);
  }
}

TEST_CASE("homogeneous right-hand sides assemble from their ingredients") {
  const auto g = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  const double s0 = 4.0;
  const auto curv = curvature_homogeneous(g, s0);
  const auto p = pressure_homogeneous(curv.deviation_norm_sq, s0);

  const auto rc = crf_rhs(g, p, s0);
  const auto rieq = ricci_rhs(g);
  for (int i = 0; i < 3; ++i) {
    CHECK(rc.d[i] == doctest::Approx(-2.0 * curv.deviation.d[i] -
                                     2.0 * p.values[0] * g.coeff[i])
                         .epsilon(1e-14));
    CHECK(rieq.d[i] == -2.0 * curv.ricci.d[i]);
  }

  // dtcrf coincides with crf: W = 0 on this class
  const auto ref = make_homogeneous_metric({1.0, 1.0, 1.0}, 2.0);
  const auto rd = dtcrf_rhs(g, p, s0, ref);
  for (int i = 0; i < 3; ++i) CHECK(rd.d[i] == rc.d[i]);

  // frozen numbers: p = -8/3, rhs = -2 E - 2 p g
  CHECK(p.values[0] == doctest::Approx(oracle::kSquashedPressure).epsilon(1e-14));
  for (int i = 0; i < 3; ++i) {
    const double want = -2.0 * oracle::kSquashedDeviation[i] +
                        16.0 / 3.0 * g.coeff[i];
    CHECK(rc.d[i] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("flat radial data is a numerical fixed point of crf") {
  const auto grid = shared_grid(0.5, 50.0, 128, 3);
  const auto g0 = flat_radial_metric(grid);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.t_end = 1.0e-3;
  const auto traj = run_flow(cfg, g0);
  CHECK(traj.termination == Termination::completed);
  REQUIRE(traj.states.size() >= 2);
  const auto& gT = traj.states.back().radial();
  double drift = 0.0;
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    drift = std::max(drift, std::abs(gT.A[i] - 1.0));
    drift = std::max(drift, std::abs(gT.B[i] - 1.0));
  }
  CHECK(drift < 1e-10);
}

TEST_CASE("squashed crf run: constraint held, matches a fine reference integration") {
  const auto g0 = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.geometry_kind = GeometryKind::homogeneous;
  cfg.s0 = 4.0;
  cfg.dt_safety = 0.01;
  cfg.t_end = 0.1;
  const auto traj = run_flow(cfg, g0);
  CHECK(traj.termination == Termination::completed);
  REQUIRE(!traj.states.empty());

  // |s - s0| <= 1e-8 on every recorded frame
  double drift = 0.0;
  for (const auto& st : traj.states)
    drift = std::max(drift,
                     std::abs(st.frame_curvature().scalar - cfg.s0));
  CHECK(drift <= 1e-8);

  // frame 0 carries the frozen pressure
  CHECK(traj.states.front().pressure.values[0] ==
        doctest::Approx(oracle::kSquashedPressure).epsilon(1e-13));

  // independent reference: RK4 at dt/20 on rhs formulas written out here
  const double lam2 = 4.0;
  auto rhs = [&](const std::array<double, 3>& x) {
    std::array<double, 3> rhat{}, ric{}, E{}, out{};
    const double prod = 2.0 * x[0] * x[1] * x[2];
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      rhat[i] = lam2 * (x[i] * x[i] - (x[j] - x[k]) * (x[j] - x[k])) / prod;
    }
    double e2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      ric[i] = x[i] * rhat[i];
      E[i] = ric[i] - cfg.s0 / 3.0 * x[i];
      e2 += (E[i] / x[i]) * (E[i] / x[i]);
    }
    const double p = -e2 / cfg.s0;
    for (int i = 0; i < 3; ++i) out[i] = -2.0 * E[i] - 2.0 * p * x[i];
    return out;
  };
  std::array<double, 3> x{1.0, 1.0, 2.0};
  const double hstep = traj.dt / 20.0;
  const std::size_t nsteps = traj.steps_taken * 20;
  for (std::size_t s = 0; s < nsteps; ++s) {
    const auto k1 = rhs(x);
    std::array<double, 3> x2{}, x3{}, x4{};
    for (int i = 0; i < 3; ++i) x2[i] = x[i] + 0.5 * hstep * k1[i];
    const auto k2 = rhs(x2);
    for (int i = 0; i < 3; ++i) x3[i] = x[i] + 0.5 * hstep * k2[i];
    const auto k3 = rhs(x3);
    for (int i = 0; i < 3; ++i) x4[i] = x[i] + hstep * k3[i];
    const auto k4 = rhs(x4);
    for (int i = 0; i < 3; ++i)
      x[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  const auto& xT = traj.states.back().homogeneous().coeff;
  for (int i = 0; i < 3; ++i)
    CHECK(xT[i] == doctest::Approx(x[i]).epsilon(1e-9));
}

TEST_CASE("round sphere under ricci flow: exact linear collapse, clean breakdown") {
  // Ric = 2 g0 / x(t) * ... : for coeff (c,c,c) with lambda = 2 the Ricci
  // endomorphism is 2/c, so Ric_ii = 2 and dx/dt = -4 exactly; the solution
  // x(t) = 1 - 4t is linear and RK4 reproduces it to roundoff until the
  // metric loses positivity.
  const auto g0 = make_homogeneous_metric({1.0, 1.0, 1.0}, 2.0);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::ricci;
  cfg.geometry_kind = GeometryKind::homogeneous;
  cfg.t_end = 0.5;  // beyond the collapse at t = 1/4
  const auto traj = run_flow(cfg, g0);
  CHECK(traj.termination == Termination::numerical_breakdown);
  CHECK(!traj.termination_detail.empty());
  REQUIRE(!traj.states.empty());
  for (const auto& st : traj.states) {
    for (int i = 0; i < 3; ++i)
      CHECK(st.homogeneous().coeff[i] ==
            doctest::Approx(1.0 - 4.0 * st.t).epsilon(1e-12));
  }
  // partial trajectory: breakdown happened strictly before t_end
  CHECK(traj.states.back().t < cfg.t_end);
  CHECK(traj.steps_taken < std::size_t(cfg.t_end / traj.dt + 0.5));
}

TEST_CASE("round sphere is a crf fixed point at s0 = 6 (with resonance warning)") {
  const auto g0 = make_homogeneous_metric({1.0, 1.0, 1.0}, 2.0);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.geometry_kind = GeometryKind::homogeneous;
  cfg.s0 = 6.0;
  cfg.t_end = 1.0;
  const auto traj = run_flow(cfg, g0);
  CHECK(traj.termination == Termination::completed);
  // s0 = 6 sits exactly on an eigenband of (m-1) Lap + s0: flagged, not fatal
  CHECK(traj.termination_detail.find("near-resonant") != std::string::npos);
  for (const auto& st : traj.states)
    for (int i = 0; i < 3; ++i)
      CHECK(st.homogeneous().coeff[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scaling equivariance: g -> g/4, s0 -> 4 s0, same step count") {
  const auto g1 = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  const auto g2 = make_homogeneous_metric({0.25, 0.25, 0.5}, 2.0);
  FlowConfig c1;
  c1.flow_kind = FlowKind::crf;
  c1.geometry_kind = GeometryKind::homogeneous;
  c1.s0 = 4.0;
  c1.dt_safety = 0.01;
  c1.t_end = 0.1;
  FlowConfig c2 = c1;
  c2.s0 = 16.0;
  c2.t_end = 0.025;

  const auto t1 = run_flow(c1, g1);
  const auto t2 = run_flow(c2, g2);
  CHECK(t1.termination == Termination::completed);
  CHECK(t2.termination == Termination::completed);
  CHECK(t1.steps_taken == t2.steps_taken);
  CHECK(t2.dt == doctest::Approx(t1.dt / 4.0).epsilon(1e-15));
  REQUIRE(t1.states.size() == t2.states.size());
  for (std::size_t k = 0; k < t1.states.size(); ++k) {
    const auto& x1 = t1.states[k].homogeneous().coeff;
    const auto& x2 = t2.states[k].homogeneous().coeff;
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(x2[i] - 0.25 * x1[i]) <= 1e-8 * x1[i]);
    // pressure scales by 4
    CHECK(t2.states[k].pressure.values[0] ==
          doctest::Approx(4.0 * t1.states[k].pressure.values[0])
              .epsilon(1e-12));
  }
}

TEST_CASE("step-size policy matches its documented formulas") {
  const auto grid = shared_grid(0.5, 50.0, 128, 3);
  const auto g = bump_metric(grid);
  FlowConfig cfg;
  cfg.dt_safety = 0.3;
  double min_spacing = 1e300;
  for (std::size_t i = 0; i + 1 < grid->n_nodes; ++i)
    min_spacing = std::min(
        min_spacing, g.A[i] * (grid->nodes[i + 1] - grid->nodes[i]));
  CHECK(stable_time_step(g, cfg) ==
        doctest::Approx(0.3 * min_spacing * min_spacing / 6.0).epsilon(1e-12));

  const auto hg = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  FlowConfig hcfg;
  hcfg.geometry_kind = GeometryKind::homogeneous;
  hcfg.dt_safety = 0.01;
  hcfg.s0 = 4.0;
  // Rhat = (0, 0, 4): dt = 0.01 / (6 * 4)
  CHECK(stable_time_step(hg, hcfg) ==
        doctest::Approx(0.01 / 24.0).epsilon(1e-14));

  FlowConfig bad = cfg;
  bad.dt_safety = 0.0;
  CHECK_THROWS_AS(stable_time_step(g, bad), ConfigError);
  bad.dt_safety = 1.5;
  CHECK_THROWS_AS(stable_time_step(g, bad), ConfigError);
}

TEST_CASE("preconditions: s0, constraint consistency, t_end") {
  const auto grid = shared_grid(0.5, 50.0, 64, 3);
  const auto flat = flat_radial_metric(grid);
  FlowConfig cfg;

  FlowConfig s0bad = cfg;
  s0bad.s0 = 1.0;
  CHECK_THROWS_AS(run_flow(s0bad, flat), ConfigError);

  FlowConfig tbad = cfg;
  tbad.t_end = 0.0;
  CHECK_THROWS_AS(run_flow(tbad, flat), ConfigError);

  // crf on data violating s = s0: rejected before stepping
  const auto g = bump_metric(grid);
  CHECK_THROWS_AS(run_flow(cfg, g), ConfigError);
  // ...but the comparison ricci flow has no constraint to violate
  FlowConfig ric = cfg;
  ric.flow_kind = FlowKind::ricci;
  ric.t_end = 1e-5;
  const auto traj = run_flow(ric, g);
  CHECK(traj.termination == Termination::completed);

  // homogeneous: s0 mismatching s[g0] is rejected
  const auto round = make_homogeneous_metric({1.0, 1.0, 1.0}, 2.0);
  FlowConfig hcfg;
  hcfg.geometry_kind = GeometryKind::homogeneous;
  hcfg.s0 = 4.0;
  CHECK_THROWS_AS(run_flow(hcfg, round), ConfigError);

  // geometry kind must match the data
  FlowConfig wrong;
  wrong.geometry_kind = GeometryKind::homogeneous;
  CHECK_THROWS_AS(run_flow(wrong, flat), ConfigError);
}

TEST_CASE("pressure failure terminates the run, not the process") {
  // coeff (1,1,4) is scalar-flat, so s0 = 0 passes the constraint check but
  // puts the constants in the kernel of (m-1) Lap + s0: the first stage
  // pressure solve must fail and the trajectory must say so.
  const auto g0 = make_homogeneous_metric({1.0, 1.0, 4.0}, 2.0);
  CHECK(curvature_homogeneous(g0).scalar == 0.0);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.geometry_kind = GeometryKind::homogeneous;
  cfg.s0 = 0.0;
  cfg.t_end = 0.1;
  const auto traj = run_flow(cfg, g0);
  CHECK(traj.termination == Termination::pressure_failure);
  CHECK(traj.steps_taken == 0);
}

TEST_CASE("output stride records every k-th frame plus the last") {
  const auto g0 = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.geometry_kind = GeometryKind::homogeneous;
  cfg.s0 = 4.0;
  cfg.dt_safety = 0.01;
  cfg.t_end = 0.1;
  cfg.output_stride = 7;
  const auto traj = run_flow(cfg, g0);
  std::size_t expect = 1;  // frame at t = 0
  for (std::size_t k = 1; k <= traj.steps_taken; ++k)
    if (k % 7 == 0 || k == traj.steps_taken) ++expect;
  CHECK(traj.states.size() == expect);
}

TEST_CASE("deturck pullback reproduces the ungauged flow") {
  const auto grid = shared_grid(0.5, 1000.0, 400, 3);
  const auto seed = schwarzschild_flat(grid, 0.1);
  const auto g0 = conformal_flatten(seed).metric;

  FlowConfig cfg;
  cfg.flow_kind = FlowKind::crf;
  cfg.t_end = 2.3e-3;
  cfg.output_stride = 64;
  const auto direct = run_flow(cfg, g0);
  REQUIRE(direct.termination == Termination::completed);

  FlowConfig dcfg = cfg;
  dcfg.flow_kind = FlowKind::dtcrf;
  const auto gauged = run_flow(dcfg, g0);
  REQUIRE(gauged.termination == Termination::completed);
  // the gauged trajectory stores its vector field
  CHECK(!gauged.states.back().gauge_w.empty());

  const auto pulled = gauge_pullback(gauged);
  CHECK(pulled.config.flow_kind == FlowKind::crf);
  REQUIRE(pulled.states.size() == direct.states.size());

  // geometric invariants agree at the final frame to 1e-4
  const std::vector<double> radii{30.0, 100.0, 300.0, 900.0};
  const auto& gd = direct.states.back().radial();
  const auto& gp = pulled.states.back().radial();
  const double md = adm_mass(gd, radii).mass;
  const double mp = adm_mass(gp, radii).mass;
  CHECK(std::abs(md - mp) <= 1e-4 * std::abs(md));

  const auto cd = ricci_radial(gd, 0.0);
  const auto cp = ricci_radial(gp, 0.0);
  const double Id = volume_integral(gd, cd.ric_norm_sq);
  const double Ip = volume_integral(gp, cp.ric_norm_sq);
  CHECK(std::abs(Id - Ip) <= 1e-4 * std::abs(Id));

  // time stamps carried over
  for (std::size_t k = 0; k < pulled.states.size(); ++k)
    CHECK(pulled.states[k].t == direct.states[k].t);

  // pullback demands a dtcrf radial trajectory
  CHECK_THROWS_AS(gauge_pullback(direct), ConfigError);

  // homogenous trajectories pass through unchanged (W = 0)
  const auto hg = make_homogeneous_metric({1.0, 1.0, 2.0}, 2.0);
  FlowConfig hcfg;
  hcfg.flow_kind = FlowKind::dtcrf;
  hcfg.geometry_kind = GeometryKind::homogeneous;
  hcfg.s0 = 4.0;
  hcfg.dt_safety = 0.01;
  hcfg.t_end = 0.01;
  const auto htraj = run_flow(hcfg, hg);
  const auto hpull = gauge_pullback(htraj);
  CHECK(hpull.states.size() == htraj.states.size());
}
