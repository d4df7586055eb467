#include "crflow/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"
#include "crflow/gauge.hpp"

namespace crflow {

namespace {

// Trapezoid weights with 4th-order (Gregory) end corrections.
std::vector<double> quadrature_weights(std::size_t n, double h) {
  if (n < 7)
    throw InvalidGrid("quadrature: need at least 7 nodes for the "
                      "end-corrected rule");
  std::vector<double> w(n, h);
  const double c0 = 3.0 / 8.0, c1 = 7.0 / 6.0, c2 = 23.0 / 24.0;
  w[0] = c0 * h;
  w[1] = c1 * h;
  w[2] = c2 * h;
  w[n - 1] = c0 * h;
  w[n - 2] = c1 * h;
  w[n - 3] = c2 * h;
  return w;
}

// Weights of a (up to) 3-point first-derivative stencil at frame k over the
// recorded frame times; handles the nonuniform spacing of a clipped final
// step exactly.
struct TimeStencil {
  std::size_t first = 0;
  std::vector<double> w;
};

TimeStencil time_stencil(const std::vector<double>& times, std::size_t k) {
  const std::size_t n = times.size();
  TimeStencil st;
  if (n < 2) {
    st.w = {0.0};
    return st;
  }
  if (n == 2) {
    const double dt = times[1] - times[0];
    st.w = {-1.0 / dt, 1.0 / dt};
    return st;
  }
  st.first = (k == 0) ? 0 : (k + 1 == n ? n - 3 : k - 1);
  const std::vector<double> nodes = {times[st.first], times[st.first + 1],
                                     times[st.first + 2]};
  st.w = fd_weights(times[k], nodes, 1);
  return st;
}

std::vector<double> frame_times(const FlowTrajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.states.size());
  for (const FlowState& s : traj.states) t.push_back(s.t);
  return t;
}

bool is_homogeneous(const FlowTrajectory& traj) {
  return traj.config.geometry_kind == GeometryKind::homogeneous;
}

// log sqrt(det g) per node, dropping time-independent coordinate factors.
std::vector<double> log_half_det(const FlowState& state, bool homog, int n) {
  if (homog) {
    const auto& c = state.homogeneous().coeff;
    return {0.5 * std::log(c[0] * c[1] * c[2])};
  }
  const RadialMetric& g = state.radial();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = std::log(g.A[i]) + n * std::log(g.B[i]);
  return out;
}

// Reference metric a dtcrf radial run was gauged against.
RadialMetric dtcrf_reference(const FlowTrajectory& traj) {
  const RadialMetric& g0 = traj.states.front().radial();
  return traj.config.reference_metric == ReferenceKind::initial
             ? g0
             : flat_radial_metric(g0.grid);
}

// Pointwise residual of the volume-element identity at every frame. The
// right-hand side is the exact half-trace of the integrated right-hand
// side, so the residual isolates the frame-differencing error O(dt^2):
//   crf:   d/dt log sqrt(det g) = -(s - s0) - m p
//   dtcrf: ... + div W (half g-trace of L_W g)
//   ricci: d/dt log sqrt(det g) = -s
std::vector<double> theta_residuals(const FlowTrajectory& traj) {
  const std::size_t F = traj.states.size();
  std::vector<double> out(F, 0.0);
  if (F < 2) return out;

  const bool homog = is_homogeneous(traj);
  const int m = homog ? HomogeneousMetric::dimension()
                      : traj.states.front().radial().dimension();
  const int n = m - 1;
  const double s0 = traj.config.s0;
  const FlowKind kind = traj.config.flow_kind;
  const std::vector<double> times = frame_times(traj);

  std::vector<std::vector<double>> logdet(F);
  for (std::size_t k = 0; k < F; ++k)
    logdet[k] = log_half_det(traj.states[k], homog, n);

  // Gauge divergence correction for the radial DeTurck flow.
  std::vector<std::vector<double>> divw(F);
  if (kind == FlowKind::dtcrf && !homog) {
    const RadialMetric g_ref = dtcrf_reference(traj);
    for (std::size_t k = 0; k < F; ++k) {
      const RadialMetric& g = traj.states[k].radial();
      const RadialGaugeTerm gauge = deturck_gauge_term(g, g_ref);
      divw[k].resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = g.A[i] * g.A[i];
        const double b = g.B[i] * g.B[i];
        divw[k][i] =
            0.5 * (gauge.lie_wg.rr[i] / a + n * gauge.lie_wg.tt[i] / b);
      }
    }
  }

  for (std::size_t k = 0; k < F; ++k) {
    const TimeStencil st = time_stencil(times, k);
    const std::size_t nn = logdet[k].size();
    double worst = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      double dt_logdet = 0.0;
      for (std::size_t j = 0; j < st.w.size(); ++j)
        dt_logdet += st.w[j] * logdet[st.first + j][i];

      double s, p;
      if (homog) {
        s = traj.states[k].frame_curvature().scalar;
        p = traj.states[k].pressure.values[0];
      } else {
        s = std::get<RadialCurvature>(traj.states[k].curvature).scalar[i];
        p = traj.states[k].pressure.values[i];
      }
      double rhs;
      if (kind == FlowKind::ricci) {
        rhs = -s;
      } else {
        rhs = -(s - s0) - m * p;
        if (!divw[k].empty()) rhs += divw[k][i];
      }
      worst = std::max(worst, std::abs(dt_logdet - rhs));
    }
    out[k] = worst;
  }
  return out;
}

// Tail of the truncated integral of a field decaying like rho^(-2(tau+2)):
// the x-integrand falls like exp((m - 2 tau - 4) x), so the tail beyond
// x_max is integrand(x_max) / (2 tau + 4 - m) when that rate is positive.
double integral_tail(const RadialMetric& g, const std::vector<double>& f) {
  const int m = g.dimension();
  const double rate = 2.0 * g.tau + 4.0 - m;
  const std::size_t i = g.size() - 1;
  const double integrand = std::abs(f[i]) * g.A[i] *
                           std::pow(g.B[i], m - 1) *
                           std::pow(g.grid->nodes[i], m);
  const double tail =
      unit_sphere_area(m) * integrand / std::max(rate, 1.0);
  return tail;
}

}  // namespace

//----------------------------------------------------------------------------
// Integrals and the Yamabe quotient
//----------------------------------------------------------------------------

double volume_integral(const RadialMetric& g, const std::vector<double>& f) {
  const std::size_t N = g.size();
  if (f.size() != N)
    throw InvalidGrid("volume_integral: field shape does not match grid");
  const int m = g.dimension();
  const std::vector<double> w = quadrature_weights(N, g.grid->h);
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    sum += w[i] * f[i] * g.A[i] * std::pow(g.B[i], m - 1) *
           std::pow(g.grid->nodes[i], m);
  return unit_sphere_area(m) * sum;
}

double volume_integral(const HomogeneousMetric& g, double f) {
  return f * homogeneous_volume(g);
}

double yamabe_quotient(const HomogeneousMetric& g) {
  const FrameCurvature curv = curvature_homogeneous(g, 0.0);
  const double m = HomogeneousMetric::dimension();
  return curv.scalar * std::pow(homogeneous_volume(g), 2.0 / m);
}

double yamabe_quotient(const RadialMetric&) {
  throw UnsupportedGeometry(
      "yamabe_quotient: the asymptotically flat class has infinite volume");
}

//----------------------------------------------------------------------------
// ADM mass
//----------------------------------------------------------------------------

MassEstimate adm_mass(const RadialMetric& g,
                      const std::vector<double>& radii_in) {
  const int m = g.dimension();
  const RadialGrid& grid = *g.grid;
  if (radii_in.size() < 3)
    throw ConfigError("adm_mass: need at least 3 extrapolation radii");
  std::vector<double> radii = radii_in;
  std::sort(radii.begin(), radii.end());
  for (double r : radii)
    if (r < grid.rho_min * (1.0 - 1e-12) || r > grid.rho_max * (1.0 + 1e-12))
      throw ConfigError("adm_mass: radius " + std::to_string(r) +
                        " outside the grid [" + std::to_string(grid.rho_min) +
                        ", " + std::to_string(grid.rho_max) + "]");
  if (radii.back() < 10.0 * radii.front())
    throw ConfigError("adm_mass: radii must span at least one decade");

  const std::size_t N = g.size();
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, grid.h);
  const std::vector<double> bx = fd.d1(b);
  const double x0 = grid.x.front();

  MassEstimate est;
  est.ladder.reserve(radii.size());
  for (double r : radii) {
    const double xq = std::log(r);
    const double av = cubic_interp(a, x0, grid.h, xq);
    const double bv = cubic_interp(b, x0, grid.h, xq);
    const double bxv = cubic_interp(bx, x0, grid.h, xq);
    est.ladder.push_back((m - 1) * std::pow(r, m - 2) * ((av - bv) - bxv));
  }

  double lo = est.ladder[0], hi = est.ladder[0], scale = 0.0;
  for (double v : est.ladder) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
  }
  if (scale > 1e-10 && (hi - lo) > 0.10 * scale) {
    std::string msg = "adm_mass: surface integrals have not stabilized:";
    for (double v : est.ladder) msg += " " + std::to_string(v);
    throw InsufficientDecay(msg);
  }

  double beta = g.tau;
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    // Decay order unknown: fit it from the last three ladder entries
    // (three-point difference-ratio fit) and flag the estimate.
    est.order_fitted = true;
    const std::size_t K = est.ladder.size();
    const double d1 = est.ladder[K - 3] - est.ladder[K - 2];
    const double d2 = est.ladder[K - 2] - est.ladder[K - 1];
    const double rr = std::sqrt((radii[K - 1] / radii[K - 3]));
    beta = (std::abs(d2) > 1e-14 * std::max(scale, 1.0) && d1 / d2 > 0.0)
               ? std::log(d1 / d2) / std::log(rr)
               : m - 2;
    if (!(beta > 0.0) || !std::isfinite(beta)) beta = m - 2;
  }

  std::vector<double> extrap;
  for (std::size_t k = 0; k + 1 < est.ladder.size(); ++k) {
    const double q = std::pow(radii[k + 1] / radii[k], -beta);
    if (std::abs(1.0 - q) < 1e-6) continue;
    extrap.push_back((est.ladder[k + 1] - q * est.ladder[k]) / (1.0 - q));
  }
  if (extrap.empty()) {
    est.mass = 0.5 * (hi + lo);
    est.error_bar = hi - lo;
    return est;
  }
  est.mass = extrap.back();
  double elo = extrap[0], ehi = extrap[0];
  for (double e : extrap) {
    elo = std::min(elo, e);
    ehi = std::max(ehi, e);
  }
  est.error_bar = ehi - elo;
  return est;
}

//----------------------------------------------------------------------------
// Volume identity
//----------------------------------------------------------------------------

VolumeIdentityReport volume_identity_check(const FlowTrajectory& traj) {
  VolumeIdentityReport rep;
  if (traj.states.size() < 2) return rep;

  const std::vector<double> theta = theta_residuals(traj);
  for (double v : theta) rep.max_pointwise_residual =
      std::max(rep.max_pointwise_residual, v);

  if (is_homogeneous(traj) && traj.config.s0 != 0.0 &&
      traj.config.flow_kind != FlowKind::ricci) {
    rep.global_checked = true;
    const std::size_t F = traj.states.size();
    const int m = HomogeneousMetric::dimension();
    const std::vector<double> times = frame_times(traj);
    std::vector<double> vol(F), rhs(F);
    for (std::size_t k = 0; k < F; ++k) {
      const HomogeneousMetric& g = traj.states[k].homogeneous();
      vol[k] = homogeneous_volume(g);
      rhs[k] = (m / traj.config.s0) *
               volume_integral(
                   g, traj.states[k].frame_curvature().deviation_norm_sq);
    }
    for (std::size_t k = 0; k < F; ++k) {
      const TimeStencil st = time_stencil(times, k);
      double dvol = 0.0;
      for (std::size_t j = 0; j < st.w.size(); ++j)
        dvol += st.w[j] * vol[st.first + j];
      rep.max_global_residual =
          std::max(rep.max_global_residual, std::abs(dvol - rhs[k]));
    }
  }
  return rep;
}

//----------------------------------------------------------------------------
// Mass gradient-flow identity
//----------------------------------------------------------------------------

MassRateReport mass_derivative_check(const FlowTrajectory& traj,
                                     const std::vector<double>& radii) {
  if (is_homogeneous(traj))
    throw UnsupportedGeometry(
        "mass_derivative_check: the ADM mass needs the asymptotically flat "
        "class");
  MassRateReport rep;
  const std::size_t F = traj.states.size();
  if (F < 2) return rep;

  const int m = traj.states.front().radial().dimension();
  const double omega = unit_sphere_area(m);
  rep.t = frame_times(traj);
  rep.mass.resize(F);
  rep.rate_normalized.resize(F);
  rep.rate_unnormalized.resize(F);
  for (std::size_t k = 0; k < F; ++k) {
    const RadialMetric& g = traj.states[k].radial();
    const RadialCurvature& curv =
        std::get<RadialCurvature>(traj.states[k].curvature);
    rep.mass[k] = adm_mass(g, radii).mass;
    const double ric2 = volume_integral(g, curv.ric_norm_sq);
    rep.rate_normalized[k] = -(2.0 / omega) * ric2;
    rep.rate_unnormalized[k] = -2.0 * ric2;
    rep.max_tail_bound =
        std::max(rep.max_tail_bound, integral_tail(g, curv.ric_norm_sq));
  }

  rep.dm_dt.resize(F);
  const double atol_rate = 1e-8 * std::max(1.0, std::abs(rep.mass[0]));
  for (std::size_t k = 0; k < F; ++k) {
    const TimeStencil st = time_stencil(rep.t, k);
    double dm = 0.0;
    for (std::size_t j = 0; j < st.w.size(); ++j)
      dm += st.w[j] * rep.mass[st.first + j];
    rep.dm_dt[k] = dm;

    const double grad = -rep.rate_normalized[k];  // (2/omega) int |Ric|^2
    if (std::abs(dm) <= atol_rate && grad <= atol_rate) continue;  // both ~ 0
    const double denom = std::max(std::abs(dm), atol_rate);
    rep.max_rel_residual_normalized =
        std::max(rep.max_rel_residual_normalized,
                 std::abs(dm - rep.rate_normalized[k]) / denom);
    rep.max_rel_residual_unnormalized =
        std::max(rep.max_rel_residual_unnormalized,
                 std::abs(dm - rep.rate_unnormalized[k]) / denom);
    rep.max_rate_vs_gradient_scale =
        std::max(rep.max_rate_vs_gradient_scale,
                 std::abs(dm) / std::max(grad, atol_rate));
  }
  for (std::size_t k = 0; k + 1 < F; ++k)
    if (!(rep.mass[k + 1] < rep.mass[k])) rep.mass_monotone_decreasing = false;
  return rep;
}

//----------------------------------------------------------------------------
// Curvature evolution identities
//----------------------------------------------------------------------------

CurvatureEvolutionReport curvature_evolution_check(const FlowTrajectory& traj) {
  const bool homog = is_homogeneous(traj);
  if (traj.config.flow_kind == FlowKind::ricci ||
      (traj.config.flow_kind == FlowKind::dtcrf && !homog))
    throw ConfigError(
        "curvature_evolution_check: identities assembled for the conformal "
        "flow only");
  CurvatureEvolutionReport rep;
  const std::size_t F = traj.states.size();
  if (F < 2) return rep;

  const double s0 = traj.config.s0;
  const std::vector<double> times = frame_times(traj);
  rep.scalar_residual.assign(F, 0.0);

  if (!homog) {
    const int m = traj.states.front().radial().dimension();
    std::vector<std::vector<double>> lap_s(F), lap_p(F);
    for (std::size_t k = 0; k < F; ++k) {
      const RadialMetric& g = traj.states[k].radial();
      const RadialCurvature& curv =
          std::get<RadialCurvature>(traj.states[k].curvature);
      lap_s[k] = laplacian_radial(g, curv.scalar);
      lap_p[k] = laplacian_radial(g, traj.states[k].pressure.values);
    }
    for (std::size_t k = 0; k < F; ++k) {
      const TimeStencil st = time_stencil(times, k);
      const RadialCurvature& curv =
          std::get<RadialCurvature>(traj.states[k].curvature);
      const std::size_t N = curv.scalar.size();
      double worst = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double ds = 0.0;
        for (std::size_t j = 0; j < st.w.size(); ++j)
          ds += st.w[j] *
                std::get<RadialCurvature>(traj.states[st.first + j].curvature)
                    .scalar[i];
        const double s = curv.scalar[i];
        const double p = traj.states[k].pressure.values[i];
        const double rhs = lap_s[k][i] + 2.0 * (s0 / m) * (s - s0) +
                           2.0 * p * (s - s0) + 2.0 * (m - 1) * lap_p[k][i] +
                           2.0 * s0 * p + 2.0 * curv.deviation_norm_sq[i];
        worst = std::max(worst, std::abs(ds - rhs));
      }
      rep.scalar_residual[k] = worst;
    }
  } else {
    const int m = HomogeneousMetric::dimension();
    rep.ricci_checked = true;
    rep.ricci_residual.assign(F, 0.0);
    for (std::size_t k = 0; k < F; ++k) {
      const TimeStencil st = time_stencil(times, k);
      const FrameCurvature& curv = traj.states[k].frame_curvature();
      const double p = traj.states[k].pressure.values[0];

      double ds = 0.0;
      for (std::size_t j = 0; j < st.w.size(); ++j)
        ds += st.w[j] * traj.states[st.first + j].frame_curvature().scalar;
      const double s = curv.scalar;
      const double srhs = 2.0 * (s0 / m) * (s - s0) + 2.0 * p * (s - s0) +
                          2.0 * s0 * p + 2.0 * curv.deviation_norm_sq;
      rep.scalar_residual[k] = std::abs(ds - srhs);

      // Ricci identity: the pressure Hessian vanishes (p is spatially
      // constant) and everything stays frame-diagonal.
      const HomogeneousMetric& g = traj.states[k].homogeneous();
      const FrameDiagTensor lap = homogeneous_tensor_laplacian(g, curv.ricci);
      double worst = 0.0;
      for (int i = 0; i < 3; ++i) {
        double dric = 0.0;
        for (std::size_t j = 0; j < st.w.size(); ++j)
          dric += st.w[j] *
                  traj.states[st.first + j].frame_curvature().ricci.d[i];
        double quad = 0.0;
        for (int kk = 0; kk < 3; ++kk) {
          if (kk == i) continue;
          const double K = homogeneous_sectional_numerator(g, i, kk);
          quad += 2.0 * K * curv.ricci.d[kk] / (g.coeff[kk] * g.coeff[kk]);
        }
        const double rhs = lap.d[i] + quad -
                           2.0 * curv.ricci.d[i] * curv.ricci.d[i] /
                               g.coeff[i];
        worst = std::max(worst, std::abs(dric - rhs));
      }
      rep.ricci_residual[k] = worst;
    }
  }

  for (double v : rep.scalar_residual)
    rep.max_scalar_residual = std::max(rep.max_scalar_residual, v);
  for (double v : rep.ricci_residual)
    rep.max_ricci_residual = std::max(rep.max_ricci_residual, v);
  return rep;
}

//----------------------------------------------------------------------------
// Finite-difference Jacobian probe
//----------------------------------------------------------------------------

namespace {

JacobianProbe spectrum_of(const Eigen::MatrixXd& J, std::size_t n_modes) {
  JacobianProbe probe;
  probe.size = static_cast<std::size_t>(J.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J, false);
  std::vector<double> re(probe.size);
  for (std::size_t i = 0; i < probe.size; ++i)
    re[i] = solver.eigenvalues()[static_cast<long>(i)].real();
  std::sort(re.begin(), re.end());
  probe.most_negative = re.front();
  probe.max_real_part = re.back();
  if (n_modes == 0 || n_modes > re.size()) n_modes = re.size();
  probe.real_parts.assign(re.begin(), re.begin() + n_modes);
  return probe;
}

}  // namespace

JacobianProbe fd_jacobian_probe(const HomogeneousMetric& g, double s0,
                                const HomogeneousMetric& g_ref,
                                std::size_t n_modes) {
  auto rhs_of = [&](const std::array<double, 3>& x) {
    HomogeneousMetric gx = g;
    gx.coeff = x;
    const FrameCurvature curv = curvature_homogeneous(gx, s0);
    const PressureField p = pressure_homogeneous(curv.deviation_norm_sq, s0);
    return dtcrf_rhs(gx, p, s0, g_ref).d;
  };
  Eigen::MatrixXd J(3, 3);
  for (int j = 0; j < 3; ++j) {
    const double eps = 6e-6 * (1.0 + std::abs(g.coeff[j]));
    std::array<double, 3> xp = g.coeff, xm = g.coeff;
    xp[j] += eps;
    xm[j] -= eps;
    const auto rp = rhs_of(xp), rm = rhs_of(xm);
    for (int i = 0; i < 3; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * eps);
  }
  return spectrum_of(J, n_modes);
}

JacobianProbe fd_jacobian_probe(const RadialMetric& g, double s0,
                                const RadialMetric& g_ref,
                                std::size_t n_modes) {
  const std::size_t N = g.size();
  if (N > 128)
    throw ConfigError(
        "fd_jacobian_probe: dense spectrum capped at 128 radial nodes");
  const std::size_t dim = 2 * N;

  auto rhs_of = [&](const std::vector<double>& u) {
    RadialMetric gx;
    gx.grid = g.grid;
    gx.tau = g.tau;
    gx.A.resize(N);
    gx.B.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      if (u[i] <= 0.0 || u[N + i] <= 0.0)
        throw NumericalBreakdown("fd_jacobian_probe: probe left the cone of "
                                 "positive metrics");
      gx.A[i] = std::sqrt(u[i]);
      gx.B[i] = std::sqrt(u[N + i]);
    }
    const RadialCurvature curv = ricci_radial(gx, s0);
    std::vector<double> source(N);
    for (std::size_t i = 0; i < N; ++i)
      source[i] = -curv.deviation_norm_sq[i];
    const PressureField p = solve_pressure_radial(gx, s0, source);
    const RadialSymTensor rhs = dtcrf_rhs(gx, p, s0, g_ref);
    std::vector<double> packed(dim);
    for (std::size_t i = 0; i < N; ++i) {
      packed[i] = rhs.rr[i];
      packed[N + i] = rhs.tt[i];
    }
    return packed;
  };

  std::vector<double> u0(dim);
  for (std::size_t i = 0; i < N; ++i) {
    u0[i] = g.A[i] * g.A[i];
    u0[N + i] = g.B[i] * g.B[i];
  }
  Eigen::MatrixXd J(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double eps = 6e-6 * (1.0 + std::abs(u0[j]));
    std::vector<double> up = u0, um = u0;
    up[j] += eps;
    um[j] -= eps;
    const std::vector<double> rp = rhs_of(up), rm = rhs_of(um);
    for (std::size_t i = 0; i < dim; ++i)
      J(static_cast<long>(i), static_cast<long>(j)) =
          (rp[i] - rm[i]) / (2.0 * eps);
  }
  return spectrum_of(J, n_modes);
}

//----------------------------------------------------------------------------
// Asymptotic flatness audit
//----------------------------------------------------------------------------

FlatnessReport asymptotic_flatness_check(const RadialMetric& g, double tau) {
  FlatnessReport rep;
  const std::size_t N = g.size();
  const RadialGrid& grid = *g.grid;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, grid.h);
  const std::vector<double> ax = fd.d1(a), bx = fd.d1(b);
  const std::vector<double> axx = fd.d2(a), bxx = fd.d2(b);

  std::size_t first = 0;
  while (first < N && grid.nodes[first] < grid.rho_max / 10.0) ++first;
  if (N - first < 6) first = N - std::min<std::size_t>(N, 6);

  std::vector<double> lr, d0, d1v, d2v;
  for (std::size_t i = first; i < N; ++i) {
    const double rho = grid.nodes[i];
    lr.push_back(std::log(rho));
    const double dev0 = std::max(std::abs(a[i] - 1.0), std::abs(b[i] - 1.0));
    const double dev1 = std::max(std::abs(ax[i]), std::abs(bx[i])) / rho;
    const double dev2 = std::max(std::abs(axx[i] - ax[i]),
                                 std::abs(bxx[i] - bx[i])) /
                        (rho * rho);
    d0.push_back(dev0);
    d1v.push_back(dev1);
    d2v.push_back(dev2);
    rep.max_deviation = std::max(rep.max_deviation, dev0);
  }

  if (rep.max_deviation <= 1e-12) {
    rep.trivially_flat = true;
    rep.pass0 = rep.pass1 = rep.pass2 = rep.pass = true;
    return rep;
  }

  auto slope = [&](const std::vector<double>& dev) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(dev.size());
    for (std::size_t i = 0; i < dev.size(); ++i) {
      const double y = std::log(std::max(dev[i], 1e-300));
      sx += lr[i];
      sy += y;
      sxx += lr[i] * lr[i];
      sxy += lr[i] * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  rep.slope0 = slope(d0);
  rep.slope1 = slope(d1v);
  rep.slope2 = slope(d2v);
  rep.pass0 = rep.slope0 <= -tau + 0.2;
  rep.pass1 = rep.slope1 <= -tau - 1.0 + 0.2;
  rep.pass2 = rep.slope2 <= -tau - 2.0 + 0.2;
  rep.pass = rep.pass0 && rep.pass1 && rep.pass2;
  return rep;
}

//----------------------------------------------------------------------------
// Per-frame records
//----------------------------------------------------------------------------

std::vector<DiagnosticsRecord> compute_diagnostics(
    const FlowTrajectory& traj, const std::vector<double>& mass_radii) {
  std::vector<DiagnosticsRecord> records;
  const std::size_t F = traj.states.size();
  if (F == 0) return records;
  records.resize(F);

  const bool homog = is_homogeneous(traj);
  const double s0 = traj.config.s0;
  const std::vector<double> theta = theta_residuals(traj);

  for (std::size_t k = 0; k < F; ++k) {
    DiagnosticsRecord& rec = records[k];
    rec.t = traj.states[k].t;
    rec.theta_check_residual = theta[k];

    if (homog) {
      const HomogeneousMetric& g = traj.states[k].homogeneous();
      const FrameCurvature& curv = traj.states[k].frame_curvature();
      rec.s_min = rec.s_max = curv.scalar;
      rec.constraint_drift = std::abs(curv.scalar - s0);
      rec.vol = homogeneous_volume(g);
      rec.Q = yamabe_quotient(g);
      rec.ric_l2 = volume_integral(g, curv.ric_norm_sq);
      rec.dev_l2 = volume_integral(g, curv.deviation_norm_sq);
    } else {
      const RadialMetric& g = traj.states[k].radial();
      const RadialCurvature& curv =
          std::get<RadialCurvature>(traj.states[k].curvature);
      rec.s_min = rec.s_max = curv.scalar[0];
      for (double s : curv.scalar) {
        rec.s_min = std::min(rec.s_min, s);
        rec.s_max = std::max(rec.s_max, s);
        rec.constraint_drift =
            std::max(rec.constraint_drift, std::abs(s - s0));
      }
      rec.ric_l2 = volume_integral(g, curv.ric_norm_sq);
      rec.dev_l2 = volume_integral(g, curv.deviation_norm_sq);
      rec.integral_tail_bound = integral_tail(g, curv.ric_norm_sq);
      if (!mass_radii.empty()) {
        const MassEstimate est = adm_mass(g, mass_radii);
        rec.mass = est.mass;
        rec.mass_err = est.error_bar;
      }
    }
  }
  return records;
}

void attach_diagnostics(FlowTrajectory& traj,
                        const std::vector<double>& mass_radii) {
  traj.diagnostics = compute_diagnostics(traj, mass_radii);
}

}  // namespace crflow
