#include "crflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"
#include "crflow/gauge.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Right-hand sides
//----------------------------------------------------------------------------

RadialSymTensor crf_rhs(const RadialMetric& g, const PressureField& p,
                        double s0) {
  const RadialCurvature curv = ricci_radial(g, s0);
  const std::size_t N = g.size();
  if (p.values.size() != N)
    throw InvalidGrid("crf_rhs: pressure shape does not match grid");
  RadialSymTensor rhs(N, TensorRole::MetricPerturbation);
  for (std::size_t i = 0; i < N; ++i) {
    const double a = g.A[i] * g.A[i];
    const double b = g.B[i] * g.B[i];
    rhs.rr[i] = -2.0 * curv.deviation.rr[i] - 2.0 * p.values[i] * a;
    rhs.tt[i] = -2.0 * curv.deviation.tt[i] - 2.0 * p.values[i] * b;
  }
  return rhs;
}

FrameDiagTensor crf_rhs(const HomogeneousMetric& g, const PressureField& p,
                        double s0) {
  const FrameCurvature curv = curvature_homogeneous(g, s0);
  if (p.values.size() != 1)
    throw InvalidGrid("crf_rhs: homogeneous pressure must be a constant");
  FrameDiagTensor rhs;
  rhs.role = TensorRole::MetricPerturbation;
  for (int i = 0; i < 3; ++i)
    rhs.d[i] = -2.0 * curv.deviation.d[i] - 2.0 * p.values[0] * g.coeff[i];
  return rhs;
}

RadialSymTensor dtcrf_rhs(const RadialMetric& g, const PressureField& p,
                          double s0, const RadialMetric& g_ref) {
  RadialSymTensor rhs = crf_rhs(g, p, s0);
  const RadialGaugeTerm gauge = deturck_gauge_term(g, g_ref);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs.rr[i] += gauge.lie_wg.rr[i];
    rhs.tt[i] += gauge.lie_wg.tt[i];
  }
  return rhs;
}

FrameDiagTensor dtcrf_rhs(const HomogeneousMetric& g, const PressureField& p,
                          double s0, const HomogeneousMetric& g_ref) {
  // gauge term vanishes identically; keep the reference check for parity
  (void)deturck_gauge_term(g, g_ref);
  return crf_rhs(g, p, s0);
}

RadialSymTensor ricci_rhs(const RadialMetric& g) {
  const RadialCurvature curv = ricci_radial(g, 0.0);
  RadialSymTensor rhs(g.size(), TensorRole::MetricPerturbation);
  for (std::size_t i = 0; i < g.size(); ++i) {
    rhs.rr[i] = -2.0 * curv.ricci.rr[i];
    rhs.tt[i] = -2.0 * curv.ricci.tt[i];
  }
  return rhs;
}

FrameDiagTensor ricci_rhs(const HomogeneousMetric& g) {
  const FrameCurvature curv = curvature_homogeneous(g, 0.0);
  FrameDiagTensor rhs;
  rhs.role = TensorRole::MetricPerturbation;
  for (int i = 0; i < 3; ++i) rhs.d[i] = -2.0 * curv.ricci.d[i];
  return rhs;
}

//----------------------------------------------------------------------------
// Step-size policies
//----------------------------------------------------------------------------

double stable_time_step(const RadialMetric& g0, const FlowConfig& config) {
  if (!(config.dt_safety > 0.0 && config.dt_safety <= 1.0))
    throw ConfigError("stable_time_step: dt_safety must lie in (0,1]");
  const int m = g0.dimension();
  double min_spacing = 0.0;
  for (std::size_t i = 0; i + 1 < g0.size(); ++i) {
    const double proper = g0.A[i] * (g0.grid->nodes[i + 1] - g0.grid->nodes[i]);
    min_spacing = (i == 0) ? proper : std::min(min_spacing, proper);
  }
  return config.dt_safety * min_spacing * min_spacing / (2.0 * m);
}

double stable_time_step(const HomogeneousMetric& g0, const FlowConfig& config) {
  if (!(config.dt_safety > 0.0 && config.dt_safety <= 1.0))
    throw ConfigError("stable_time_step: dt_safety must lie in (0,1]");
  const int m = HomogeneousMetric::dimension();
  const FrameCurvature curv = curvature_homogeneous(g0, 0.0);
  double rhat_max = 0.0;
  for (int i = 0; i < 3; ++i)
    rhat_max = std::max(rhat_max, std::abs(curv.ricci.d[i] / g0.coeff[i]));
  if (rhat_max == 0.0) return config.t_end;
  return config.dt_safety / (2.0 * m * rhat_max);
}

//----------------------------------------------------------------------------
// Radial integration
//----------------------------------------------------------------------------

namespace {

struct RadialStage {
  RadialSymTensor rhs;
  PressureField pressure;
};

// Rebuild a validated metric from the evolving profile squares (a, b).
RadialMetric metric_from_profiles(const RadialMetric& proto,
                                  const std::vector<double>& a,
                                  const std::vector<double>& b) {
  const std::size_t N = proto.size();
  std::vector<double> A(N), B(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]) || a[i] <= 0.0 ||
        b[i] <= 0.0)
      throw NumericalBreakdown(
          "flow: metric profile lost positivity or finiteness");
    A[i] = std::sqrt(a[i]);
    B[i] = std::sqrt(b[i]);
  }
  RadialMetric g;
  g.grid = proto.grid;
  g.A = std::move(A);
  g.B = std::move(B);
  g.tau = proto.tau;
  return g;
}

RadialStage radial_stage(const FlowConfig& config, const RadialMetric& g,
                         const RadialMetric& g_ref) {
  RadialStage stage;
  if (config.flow_kind == FlowKind::ricci) {
    stage.pressure.values.assign(g.size(), 0.0);
    stage.pressure.status = PressureStatus::ok;
    stage.rhs = ricci_rhs(g);
    return stage;
  }
  const RadialCurvature curv = ricci_radial(g, config.s0);
  std::vector<double> source(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    source[i] = -curv.deviation_norm_sq[i];
  stage.pressure = solve_pressure_radial(g, config.s0, source);
  if (stage.pressure.status == PressureStatus::failed)
    throw NonInvertibleOperator(
        "flow: pressure solve residual exceeded tolerance");
  stage.rhs = config.flow_kind == FlowKind::dtcrf
                  ? dtcrf_rhs(g, stage.pressure, config.s0, g_ref)
                  : crf_rhs(g, stage.pressure, config.s0);
  return stage;
}

void record_radial_state(FlowTrajectory& traj, const FlowConfig& config,
                         double t, const RadialMetric& g,
                         const RadialMetric& g_ref) {
  FlowState state;
  state.t = t;
  state.metric = g;
  state.curvature = ricci_radial(g, config.s0);
  if (config.flow_kind == FlowKind::ricci) {
    state.pressure.values.assign(g.size(), 0.0);
    state.pressure.status = PressureStatus::ok;
  } else {
    const RadialCurvature& curv = std::get<RadialCurvature>(state.curvature);
    std::vector<double> source(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      source[i] = -curv.deviation_norm_sq[i];
    state.pressure = solve_pressure_radial(g, config.s0, source);
    if (state.pressure.status == PressureStatus::failed)
      throw NonInvertibleOperator(
          "flow: pressure solve residual exceeded tolerance");
  }
  if (config.flow_kind == FlowKind::dtcrf)
    state.gauge_w = deturck_gauge_term(g, g_ref).W;
  traj.states.push_back(std::move(state));
}

}  // namespace

FlowTrajectory run_flow(const FlowConfig& config, const RadialMetric& g0) {
  if (config.geometry_kind != GeometryKind::radial_af)
    throw ConfigError("run_flow: radial initial data needs geometry_kind "
                      "radial_af");
  if (config.s0 != 0.0)
    throw ConfigError(
        "run_flow: the radial asymptotically flat class requires s0 = 0 "
        "(scalar-flat hypothesis)");
  if (!(config.t_end > 0.0)) throw ConfigError("run_flow: t_end must be > 0");

  FlowTrajectory traj;
  traj.config = config;

  // Constraint consistency and ellipticity of the initial data (crf/dtcrf).
  if (config.flow_kind != FlowKind::ricci) {
    const RadialCurvature curv0 = ricci_radial(g0, config.s0);
    double drift = 0.0;
    for (double s : curv0.scalar)
      drift = std::max(drift, std::abs(s - config.s0));
    if (drift > 1e-6)
      throw ConfigError(
          "run_flow: initial scalar curvature deviates from s0 by " +
          std::to_string(drift) + "; constraint violated at t = 0");
    const ConditionReport cond = invertibility_estimate(g0, config.s0);
    if (cond.status == PressureStatus::failed)
      throw ConfigError(
          "run_flow: pressure operator is not invertible on the initial "
          "data");
    if (cond.status == PressureStatus::near_resonant)
      traj.termination_detail =
          "warning: pressure operator near-resonant on the initial data "
          "(smallest singular value " +
          std::to_string(cond.sigma_min) + ")";
  }

  const RadialMetric g_ref = config.reference_metric == ReferenceKind::initial
                                 ? g0
                                 : flat_radial_metric(g0.grid);

  traj.dt = stable_time_step(g0, config);

  const std::size_t N = g0.size();
  std::vector<double> a = g0.a_profile();
  std::vector<double> b = g0.b_profile();
  RadialMetric g = g0;

  const std::size_t stride = std::max<std::size_t>(1, config.output_stride);

  std::size_t step = 0;
  double t = 0.0;
  try {
    record_radial_state(traj, config, 0.0, g, g_ref);
    while (t < config.t_end) {
      const double dt = std::min(traj.dt, config.t_end - t);

      // classical four-stage Runge-Kutta on y = (a, b)
      const RadialStage k1 = radial_stage(config, g, g_ref);
      std::vector<double> a2(N), b2(N);
      for (std::size_t i = 0; i < N; ++i) {
        a2[i] = a[i] + 0.5 * dt * k1.rhs.rr[i];
        b2[i] = b[i] + 0.5 * dt * k1.rhs.tt[i];
      }
      const RadialStage k2 =
          radial_stage(config, metric_from_profiles(g, a2, b2), g_ref);
      for (std::size_t i = 0; i < N; ++i) {
        a2[i] = a[i] + 0.5 * dt * k2.rhs.rr[i];
        b2[i] = b[i] + 0.5 * dt * k2.rhs.tt[i];
      }
      const RadialStage k3 =
          radial_stage(config, metric_from_profiles(g, a2, b2), g_ref);
      for (std::size_t i = 0; i < N; ++i) {
        a2[i] = a[i] + dt * k3.rhs.rr[i];
        b2[i] = b[i] + dt * k3.rhs.tt[i];
      }
      const RadialStage k4 =
          radial_stage(config, metric_from_profiles(g, a2, b2), g_ref);

      for (std::size_t i = 0; i < N; ++i) {
        a[i] += dt / 6.0 *
                (k1.rhs.rr[i] + 2.0 * k2.rhs.rr[i] + 2.0 * k3.rhs.rr[i] +
                 k4.rhs.rr[i]);
        b[i] += dt / 6.0 *
                (k1.rhs.tt[i] + 2.0 * k2.rhs.tt[i] + 2.0 * k3.rhs.tt[i] +
                 k4.rhs.tt[i]);
      }
      g = metric_from_profiles(g, a, b);
      ++step;
      t = (dt == traj.dt) ? step * traj.dt : config.t_end;

      if (step % stride == 0 || t >= config.t_end)
        record_radial_state(traj, config, t, g, g_ref);
    }
    traj.termination = Termination::completed;
  } catch (const NonInvertibleOperator& e) {
    traj.termination = Termination::pressure_failure;
    traj.termination_detail = e.what();
  } catch (const NumericalBreakdown& e) {
    traj.termination = Termination::numerical_breakdown;
    traj.termination_detail = e.what();
  }
  traj.steps_taken = step;
  return traj;
}

//----------------------------------------------------------------------------
// Homogeneous integration
//----------------------------------------------------------------------------

namespace {

struct HomogeneousStage {
  FrameDiagTensor rhs;
  PressureField pressure;
};

HomogeneousMetric metric_from_coeff(const HomogeneousMetric& proto,
                                    const std::array<double, 3>& x) {
  for (double v : x)
    if (!std::isfinite(v) || v <= 0.0)
      throw NumericalBreakdown(
          "flow: frame coefficient lost positivity or finiteness");
  HomogeneousMetric g = proto;
  g.coeff = x;
  return g;
}

HomogeneousStage homogeneous_stage(const FlowConfig& config,
                                   const HomogeneousMetric& g) {
  HomogeneousStage stage;
  if (config.flow_kind == FlowKind::ricci) {
    stage.pressure.values.assign(1, 0.0);
    stage.pressure.status = PressureStatus::ok;
    stage.rhs = ricci_rhs(g);
    return stage;
  }
  const FrameCurvature curv = curvature_homogeneous(g, config.s0);
  stage.pressure = pressure_homogeneous(curv.deviation_norm_sq, config.s0);
  stage.rhs = crf_rhs(g, stage.pressure, config.s0);
  return stage;
}

void record_homogeneous_state(FlowTrajectory& traj, const FlowConfig& config,
                              double t, const HomogeneousMetric& g) {
  FlowState state;
  state.t = t;
  state.metric = g;
  state.curvature = curvature_homogeneous(g, config.s0);
  if (config.flow_kind == FlowKind::ricci) {
    state.pressure.values.assign(1, 0.0);
    state.pressure.status = PressureStatus::ok;
  } else {
    const FrameCurvature& curv = std::get<FrameCurvature>(state.curvature);
    state.pressure =
        pressure_homogeneous(curv.deviation_norm_sq, config.s0);
  }
  traj.states.push_back(std::move(state));
}

}  // namespace

FlowTrajectory run_flow(const FlowConfig& config, const HomogeneousMetric& g0) {
  if (config.geometry_kind != GeometryKind::homogeneous)
    throw ConfigError(
        "run_flow: homogeneous initial data needs geometry_kind homogeneous");
  if (!(config.t_end > 0.0)) throw ConfigError("run_flow: t_end must be > 0");

  FlowTrajectory traj;
  traj.config = config;

  if (config.flow_kind != FlowKind::ricci) {
    const FrameCurvature curv0 = curvature_homogeneous(g0, config.s0);
    if (std::abs(curv0.scalar - config.s0) > 1e-6)
      throw ConfigError(
          "run_flow: initial scalar curvature " +
          std::to_string(curv0.scalar) + " does not match s0 = " +
          std::to_string(config.s0));
    const ConditionReport cond = invertibility_estimate(g0, config.s0);
    if (cond.status == PressureStatus::failed)
      throw ConfigError(
          "run_flow: pressure operator is not invertible on the initial "
          "data");
    if (cond.status == PressureStatus::near_resonant)
      traj.termination_detail =
          "warning: pressure operator near-resonant on the initial data "
          "(smallest singular value " +
          std::to_string(cond.sigma_min) + ")";
  }

  traj.dt = stable_time_step(g0, config);

  std::array<double, 3> x = g0.coeff;
  HomogeneousMetric g = g0;
  const std::size_t stride = std::max<std::size_t>(1, config.output_stride);

  std::size_t step = 0;
  double t = 0.0;
  try {
    record_homogeneous_state(traj, config, 0.0, g);
    while (t < config.t_end) {
      const double dt = std::min(traj.dt, config.t_end - t);

      const HomogeneousStage k1 = homogeneous_stage(config, g);
      std::array<double, 3> x2;
      for (int i = 0; i < 3; ++i) x2[i] = x[i] + 0.5 * dt * k1.rhs.d[i];
      const HomogeneousStage k2 =
          homogeneous_stage(config, metric_from_coeff(g, x2));
      for (int i = 0; i < 3; ++i) x2[i] = x[i] + 0.5 * dt * k2.rhs.d[i];
      const HomogeneousStage k3 =
          homogeneous_stage(config, metric_from_coeff(g, x2));
      for (int i = 0; i < 3; ++i) x2[i] = x[i] + dt * k3.rhs.d[i];
      const HomogeneousStage k4 =
          homogeneous_stage(config, metric_from_coeff(g, x2));

      for (int i = 0; i < 3; ++i)
        x[i] += dt / 6.0 *
                (k1.rhs.d[i] + 2.0 * k2.rhs.d[i] + 2.0 * k3.rhs.d[i] +
                 k4.rhs.d[i]);
      g = metric_from_coeff(g, x);
      ++step;
      t = (dt == traj.dt) ? step * traj.dt : config.t_end;

      if (step % stride == 0 || t >= config.t_end)
        record_homogeneous_state(traj, config, t, g);
    }
    traj.termination = Termination::completed;
  } catch (const NonInvertibleOperator& e) {
    traj.termination = Termination::pressure_failure;
    traj.termination_detail = e.what();
  } catch (const NumericalBreakdown& e) {
    traj.termination = Termination::numerical_breakdown;
    traj.termination_detail = e.what();
  }
  traj.steps_taken = step;
  return traj;
}

//----------------------------------------------------------------------------
// Gauge pull-back
//----------------------------------------------------------------------------

FlowTrajectory gauge_pullback(const FlowTrajectory& traj) {
  if (traj.config.geometry_kind == GeometryKind::homogeneous)
    return traj;  // W vanishes identically: identity map
  if (traj.config.flow_kind != FlowKind::dtcrf)
    throw ConfigError("gauge_pullback: trajectory was not produced by dtcrf");
  if (traj.states.empty()) return traj;

  const RadialMetric& g0 = traj.states.front().radial();
  const RadialGrid& grid = *g0.grid;
  const std::size_t N = grid.n_nodes;
  const double x0 = grid.x.front();
  const double h = grid.h;
  const double rho_lo = grid.rho_min * (1.0 - 5e-3);
  const double rho_hi = grid.rho_max * (1.0 + 5e-3);

  FlowTrajectory out;
  out.config = traj.config;
  out.config.flow_kind = FlowKind::crf;  // the reconstructed flow
  out.dt = traj.dt;
  out.steps_taken = traj.steps_taken;
  out.termination = traj.termination;
  out.termination_detail = traj.termination_detail;

  // characteristics y_i(t), one per node, starting at the nodes
  std::vector<double> y(grid.nodes);

  // W interpolated in x = ln rho (cubic) and t (linear between frames)
  auto eval_w = [&](const std::vector<double>& w_lo,
                    const std::vector<double>& w_hi, double theta,
                    double rho) {
    const double wl = cubic_interp(w_lo, x0, h, std::log(rho));
    const double wh = cubic_interp(w_hi, x0, h, std::log(rho));
    return (1.0 - theta) * wl + theta * wh;
  };

  const UniformFd fd(N, h);
  bool truncated = false;

  for (std::size_t k = 0; k < traj.states.size() && !truncated; ++k) {
    if (k > 0) {
      const FlowState& prev = traj.states[k - 1];
      const FlowState& cur = traj.states[k];
      if (prev.gauge_w.size() != N || cur.gauge_w.size() != N)
        throw ConfigError(
            "gauge_pullback: trajectory does not store the gauge field W");
      const double span = cur.t - prev.t;
      const int nsub = 4;
      const double dts = span / nsub;
      for (std::size_t i = 0; i < N && !truncated; ++i) {
        double yi = y[i];
        for (int s = 0; s < nsub; ++s) {
          const double th0 = double(s) / nsub;
          const double th_half = (s + 0.5) / nsub;
          const double th1 = double(s + 1) / nsub;
          // d y / dt = -W(y, t)
          const double q1 = -eval_w(prev.gauge_w, cur.gauge_w, th0, yi);
          const double q2 = -eval_w(prev.gauge_w, cur.gauge_w, th_half,
                                    std::clamp(yi + 0.5 * dts * q1, rho_lo, rho_hi));
          const double q3 = -eval_w(prev.gauge_w, cur.gauge_w, th_half,
                                    std::clamp(yi + 0.5 * dts * q2, rho_lo, rho_hi));
          const double q4 = -eval_w(prev.gauge_w, cur.gauge_w, th1,
                                    std::clamp(yi + dts * q3, rho_lo, rho_hi));
          yi += dts / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
          if (yi < rho_lo || yi > rho_hi) {
            truncated = true;
            out.termination_detail =
                "gauge_pullback: characteristic left the grid at t = " +
                std::to_string(prev.t + (s + 1) * dts);
            break;
          }
        }
        // yi may sit slightly outside the strict domain (within the slack
        // band checked above); clamping it back to the grid would kink the
        // characteristic map at the boundary nodes and corrupt dy/drho
        // there, so keep the true position and let the interpolant's
        // one-cell extrapolation handle evaluation.
        y[i] = yi;
      }
      if (truncated) break;
    }

    // pull back the frame: a(rho) = a_hat(y) (dy/drho)^2, b = b_hat(y) y^2/rho^2
    const RadialMetric& ghat = traj.states[k].radial();
    std::vector<double> ahat(N), bhat(N);
    for (std::size_t i = 0; i < N; ++i) {
      ahat[i] = ghat.A[i] * ghat.A[i];
      bhat[i] = ghat.B[i] * ghat.B[i];
    }
    // dy/drho via x-derivative of ln y: y'(rho) = (y/rho) dln y/dx
    std::vector<double> lny(N);
    for (std::size_t i = 0; i < N; ++i) lny[i] = std::log(y[i]);
    const std::vector<double> dlny = fd.d1(lny);

    std::vector<double> A(N), B(N), pvals(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double rho = grid.nodes[i];
      const double xq = lny[i];
      const double a_at = cubic_interp(ahat, x0, h, xq);
      const double b_at = cubic_interp(bhat, x0, h, xq);
      const double dydrho = (y[i] / rho) * dlny[i];
      const double a_new = a_at * dydrho * dydrho;
      const double b_new = b_at * (y[i] / rho) * (y[i] / rho);
      if (!(a_new > 0.0) || !(b_new > 0.0))
        throw NumericalBreakdown("gauge_pullback: pulled-back metric "
                                 "degenerated");
      A[i] = std::sqrt(a_new);
      B[i] = std::sqrt(b_new);
      pvals[i] = cubic_interp(traj.states[k].pressure.values, x0, h, xq);
    }

    FlowState state;
    state.t = traj.states[k].t;
    RadialMetric g;
    g.grid = ghat.grid;
    g.A = std::move(A);
    g.B = std::move(B);
    g.tau = ghat.tau;
    state.curvature = ricci_radial(g, traj.config.s0);
    state.metric = std::move(g);
    state.pressure.values = std::move(pvals);
    state.pressure.status = traj.states[k].pressure.status;
    state.pressure.residual_norm = traj.states[k].pressure.residual_norm;
    out.states.push_back(std::move(state));
  }

  if (out.states.empty())
    throw OutOfDomain(
        "gauge_pullback: characteristics left the grid immediately");
  return out;
}

}  // namespace crflow
