#include "crflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "crflow/curvature.hpp"
#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"

namespace crflow {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kNearResonantTol = 1e-6;
constexpr double kPivotTol = 1e-12;

std::vector<double> gamma_coefficient(const RadialMetric& g) {
  const std::size_t N = g.size();
  const double n = g.dimension() - 1;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  std::vector<double> gamma(N);
  for (std::size_t i = 0; i < N; ++i)
    gamma[i] =
        n * (1.0 + bx[i] / (2.0 * b[i])) - ax[i] / (2.0 * a[i]) - 1.0;
  return gamma;
}

}  // namespace

BandMatrix assemble_radial_pressure_operator(const RadialMetric& g,
                                             double s0) {
  const std::size_t N = g.size();
  const int m = g.dimension();
  const double h = g.grid->h;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> gamma = gamma_coefficient(g);

  BandMatrix op(N, 2, 2);
  // reflective inner closure: one-sided second-order p_x = 0
  op.at(0, 0) = -3.0 / (2.0 * h);
  op.at(0, 1) = 4.0 / (2.0 * h);
  op.at(0, 2) = -1.0 / (2.0 * h);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double rho = g.grid->nodes[i];
    const double c = s0 * a[i] * rho * rho / (m - 1.0);
    op.at(i, i - 1) = 1.0 / (h * h) - gamma[i] / (2.0 * h);
    op.at(i, i) = -2.0 / (h * h) + c;
    op.at(i, i + 1) = 1.0 / (h * h) + gamma[i] / (2.0 * h);
  }
  // outer Robin closure: p_x + (m-2) p = 0 (harmonic rho^(2-m) tail)
  op.at(N - 1, N - 3) = 1.0 / (2.0 * h);
  op.at(N - 1, N - 2) = -4.0 / (2.0 * h);
  op.at(N - 1, N - 1) = 3.0 / (2.0 * h) + (m - 2.0);
  return op;
}

std::vector<double> radial_pressure_rhs(const RadialMetric& g,
                                        const std::vector<double>& source) {
  const std::size_t N = g.size();
  if (source.size() != N)
    throw InvalidGrid("radial_pressure_rhs: source shape does not match grid");
  const int m = g.dimension();
  const std::vector<double> a = g.a_profile();
  std::vector<double> rhs(N, 0.0);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double rho = g.grid->nodes[i];
    rhs[i] = a[i] * rho * rho * source[i] / (m - 1.0);
  }
  return rhs;
}

PressureField solve_pressure_radial(const RadialMetric& g, double s0,
                                    const std::vector<double>& source) {
  const std::size_t N = g.size();
  if (source.size() != N)
    throw InvalidGrid(
        "solve_pressure_radial: source shape does not match grid");
  double src_max = 0.0;
  for (double s : source) {
    if (!std::isfinite(s))
      throw NumericalBreakdown("solve_pressure_radial: non-finite source");
    src_max = std::max(src_max, std::abs(s));
  }

  BandMatrix op = assemble_radial_pressure_operator(g, s0);
  const std::vector<double> rhs = radial_pressure_rhs(g, source);
  op.factor(kPivotTol);

  PressureField p;
  p.values = op.solve(rhs);
  for (double v : p.values)
    if (!std::isfinite(v))
      throw NumericalBreakdown("solve_pressure_radial: non-finite solution");

  // Residual of the physical equation (m-1) Lap p + s0 p - source; interior
  // rows of the band system carry the factor a rho^2/(m-1), undone here.
  const std::vector<double> applied = op.multiply(p.values);
  const std::vector<double> a = g.a_profile();
  const int m = g.dimension();
  double res = 0.0;
  double raw_res = 0.0, p_max = 0.0, rhs_max = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double ri = applied[i] - rhs[i];
    raw_res = std::max(raw_res, std::abs(ri));
    p_max = std::max(p_max, std::abs(p.values[i]));
    rhs_max = std::max(rhs_max, std::abs(rhs[i]));
    if (i > 0 && i + 1 < N) {
      const double rho = g.grid->nodes[i];
      ri *= (m - 1.0) / (a[i] * rho * rho);
    }
    res = std::max(res, std::abs(ri));
  }
  p.residual_norm = res;

  // Failure is judged by the backward error of the band solve: the physical
  // residual above has a roundoff floor of order eps * ||A|| * ||p|| that
  // grows as the grid is refined, so a fixed threshold on it would reject
  // perfectly good solves at large N.
  const double backward = raw_res / (op.scale() * p_max + rhs_max + 1e-300);
  if (backward > kResidualTol || !std::isfinite(res))
    p.status = PressureStatus::failed;
  else if (s0 > 0.0 && op.min_pivot() < kNearResonantTol * op.scale())
    p.status = PressureStatus::near_resonant;
  else
    p.status = PressureStatus::ok;
  return p;
}

PressureField pressure_homogeneous(double deviation_norm_sq, double s0) {
  if (s0 == 0.0)
    throw NonInvertibleOperator(
        "pressure_homogeneous: s0 = 0 puts constants in the kernel of "
        "(m-1) Lap + s0");
  if (!std::isfinite(deviation_norm_sq) || deviation_norm_sq < 0.0)
    throw NumericalBreakdown("pressure_homogeneous: invalid |E|^2");
  PressureField p;
  p.values.assign(1, -deviation_norm_sq / s0);
  p.residual_norm = 0.0;
  p.status = PressureStatus::ok;
  return p;
}

ConditionReport invertibility_estimate(const RadialMetric& g, double s0) {
  BandMatrix op = assemble_radial_pressure_operator(g, s0);
  ConditionReport rep;
  try {
    op.factor(kPivotTol);
    rep.sigma_min = op.smallest_singular_value();
    rep.scale = op.scale();
  } catch (const NonInvertibleOperator&) {
    rep.sigma_min = 0.0;
    rep.scale = op.scale();
    rep.status = PressureStatus::near_resonant;
    return rep;
  }
  // For s0 <= 0 the discretization is an M-matrix and the operator is
  // unconditionally invertible; sigma_min / scale shrinks like h^2 for any
  // discretized elliptic operator, so thresholding it would mislabel fine
  // grids.  Spectral proximity is only meaningful for s0 > 0, where the
  // shift can actually cross an eigenvalue of -(m-1) Lap.
  rep.status = (s0 > 0.0 && rep.sigma_min < kNearResonantTol * rep.scale)
                   ? PressureStatus::near_resonant
                   : PressureStatus::ok;
  return rep;
}

ConditionReport invertibility_estimate(const HomogeneousMetric& g, double s0) {
  const double m1 = HomogeneousMetric::dimension() - 1.0;
  const double l2 = g.lambda * g.lambda;
  const double inv1 = 1.0 / g.coeff[0], inv2 = 1.0 / g.coeff[1],
               inv3 = 1.0 / g.coeff[2];
  // -Lap eigenvalues of the constant band and the two lowest invariant bands
  std::vector<double> neg_lap = {0.0, 0.25 * l2 * (inv1 + inv2 + inv3),
                                 l2 * (inv2 + inv3), l2 * (inv3 + inv1),
                                 l2 * (inv1 + inv2)};
  ConditionReport rep;
  rep.sigma_min = std::abs(s0);
  rep.scale = std::abs(s0);
  for (double mu : neg_lap) {
    rep.sigma_min = std::min(rep.sigma_min, std::abs(s0 - m1 * mu));
    rep.scale = std::max(rep.scale, std::abs(s0 - m1 * mu));
  }
  rep.scale = std::max(rep.scale, 1.0);
  rep.status = rep.sigma_min < kNearResonantTol * rep.scale
                   ? PressureStatus::near_resonant
                   : PressureStatus::ok;
  return rep;
}

//----------------------------------------------------------------------------
// Conformal projection to zero scalar curvature
//----------------------------------------------------------------------------

namespace {

// Residual of the nonlinear least-squares system: fourth-order scalar
// curvature of u^(4/(m-2)) g_hat at EVERY node (including the one-sided end
// rows, so the projected data is scalar-flat at the boundary nodes too),
// followed by the reflective and decay rows that pin the rescaling and
// harmonic freedoms of the curvature rows.
//
// Each curvature row is multiplied by the local metric area scale rho^2 b;
// without this the far-field rows are suppressed by 1/rho^2 (up to 1e-6 on
// the grids used here), the least-squares view of the tail degenerates, and
// the iteration parks O(1e-4) wiggles in the tail of u that wreck the decay
// of b_x and with it the mass surface integrals.
std::vector<double> flatten_residual(const RadialMetric& g_hat,
                                     const std::vector<double>& u) {
  const std::size_t N = g_hat.size();
  const int m = g_hat.dimension();
  const double expo = 2.0 / (m - 2.0);

  std::vector<double> A(N), B(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (u[i] <= 0.0)
      throw NumericalBreakdown(
          "conformal_flatten: conformal factor lost positivity");
    const double f = std::pow(u[i], expo);
    A[i] = f * g_hat.A[i];
    B[i] = f * g_hat.B[i];
  }
  RadialMetric g;
  g.grid = g_hat.grid;
  g.A = std::move(A);
  g.B = std::move(B);
  g.tau = g_hat.tau;

  const RadialCurvature curv = ricci_radial(g, 0.0);
  const UniformFd fd(N, g_hat.grid->h);
  const std::vector<double> ux = fd.d1(u);
  const std::vector<double> b_hat = g_hat.b_profile();

  std::vector<double> R(N + 2);
  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g_hat.grid->nodes[i];
    R[i] = rho * rho * b_hat[i] * curv.scalar[i];
  }
  // Soft weight: the two rows only pin the rescaling/harmonic freedoms the
  // area-scaled curvature rows are indifferent to; a full weight would let
  // them push O(h^3) inconsistency back into the end curvature rows.
  constexpr double kBcWeight = 1e-2;
  R[N] = kBcWeight * ux[0];
  R[N + 1] = kBcWeight * (ux[N - 1] + (m - 2.0) * (u[N - 1] - 1.0));
  return R;
}

}  // namespace

FlattenResult conformal_flatten(const RadialMetric& g_hat) {
  const std::size_t N = g_hat.size();
  const int m = g_hat.dimension();
  const double h = g_hat.grid->h;

  // Second-order linear seed for v = u - 1:
  //   Lap v - c v = c,  c = (m-2)/(4(m-1)) s[g_hat],
  // assembled like the pressure operator (same closures).
  const RadialCurvature hat_curv = ricci_radial(g_hat, 0.0);
  const std::vector<double> a = g_hat.a_profile();
  const std::vector<double> gamma = gamma_coefficient(g_hat);

  BandMatrix seed(N, 2, 2);
  std::vector<double> seed_rhs(N, 0.0);
  seed.at(0, 0) = -3.0 / (2.0 * h);
  seed.at(0, 1) = 4.0 / (2.0 * h);
  seed.at(0, 2) = -1.0 / (2.0 * h);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double rho = g_hat.grid->nodes[i];
    const double c = (m - 2.0) / (4.0 * (m - 1.0)) * hat_curv.scalar[i];
    const double w = a[i] * rho * rho;
    seed.at(i, i - 1) = 1.0 / (h * h) - gamma[i] / (2.0 * h);
    seed.at(i, i) = -2.0 / (h * h) - c * w;
    seed.at(i, i + 1) = 1.0 / (h * h) + gamma[i] / (2.0 * h);
    seed_rhs[i] = c * w;
  }
  seed.at(N - 1, N - 3) = 1.0 / (2.0 * h);
  seed.at(N - 1, N - 2) = -4.0 / (2.0 * h);
  seed.at(N - 1, N - 1) = 3.0 / (2.0 * h) + (m - 2.0);
  seed.factor(kPivotTol);
  const std::vector<double> v = seed.solve(seed_rhs);

  std::vector<double> u(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = 1.0 + v[i];

  // Gauss-Newton refinement on the fourth-order residual.  The system is
  // (N+2) x N: N curvature rows plus two softly weighted boundary rows, and
  // the step is the dense least-squares solution (column-pivoted QR).  The
  // Jacobian is probed column by column; each probe costs one O(N) residual
  // evaluation, so the probing is O(N^2) and the QR dominates at O(N^3),
  // which is negligible at setup time for the grids used here.
  FlattenResult out{g_hat, 0.0, 0};
  auto curvature_max = [N](const std::vector<double>& res) {
    double v = 0.0;
    for (std::size_t i = 0; i < N; ++i) v = std::max(v, std::abs(res[i]));
    return v;
  };
  std::vector<double> R = flatten_residual(g_hat, u);
  double rmax = curvature_max(R);
  // The curvature rows are area-scaled, so an absolute target is meaningful:
  // the achievable floor is set by roundoff in the stencils, ~1e-13 * 1/h^2.
  const double hh = g_hat.grid->h * g_hat.grid->h;
  const double target = std::max(1e-12, 1e-13 / hh);

  std::vector<double> best_u = u;
  double best_rmax = rmax;
  int plateau = 0;
  for (int it = 0; it < 25 && rmax > target; ++it) {
    Eigen::MatrixXd J(N + 2, N);
    for (std::size_t j = 0; j < N; ++j) {
      const double eps = 1e-7 * std::max(1.0, std::abs(u[j]));
      std::vector<double> up = u, um = u;
      up[j] += eps;
      um[j] -= eps;
      const std::vector<double> Rp = flatten_residual(g_hat, up);
      const std::vector<double> Rm = flatten_residual(g_hat, um);
      for (std::size_t i = 0; i < N + 2; ++i)
        J(i, j) = (Rp[i] - Rm[i]) / (2.0 * eps);
    }
    Eigen::VectorXd neg_r(N + 2);
    for (std::size_t i = 0; i < N + 2; ++i) neg_r[i] = -R[i];
    const Eigen::VectorXd du = J.colPivHouseholderQr().solve(neg_r);

    // Backtracking on the curvature residual guards against an overshooting
    // full step when the seed is far from the solution.
    double step = 1.0;
    std::vector<double> u_try(N);
    double rmax_try = rmax;
    for (int bt = 0; bt < 6; ++bt) {
      for (std::size_t i = 0; i < N; ++i) u_try[i] = u[i] + step * du[i];
      bool positive = true;
      for (double w : u_try)
        if (!(w > 0.0)) { positive = false; break; }
      if (positive) {
        const std::vector<double> R_try = flatten_residual(g_hat, u_try);
        rmax_try = curvature_max(R_try);
        if (rmax_try < rmax || bt == 5) {
          u = u_try;
          R = R_try;
          break;
        }
      }
      step *= 0.5;
    }
    rmax = rmax_try;
    out.newton_iterations = it + 1;
    plateau = rmax < 0.9 * best_rmax ? 0 : plateau + 1;
    if (rmax < best_rmax) {
      best_rmax = rmax;
      best_u = u;
    }
    if (plateau >= 3 || rmax > 4.0 * best_rmax) {
      break;  // converged to the least-squares equilibrium or diverging
    }
  }
  u = best_u;

  const double expo = 2.0 / (m - 2.0);
  std::vector<double> A(N), B(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double f = std::pow(u[i], expo);
    A[i] = f * g_hat.A[i];
    B[i] = f * g_hat.B[i];
  }
  const double tau =
      g_hat.tau > 0.0 ? std::min(g_hat.tau, m - 2.0) : (m - 2.0);
  out.metric = make_radial_metric(g_hat.grid, std::move(A), std::move(B), tau);

  const RadialCurvature final_curv = ricci_radial(out.metric, 0.0);
  double smax = 0.0;
  for (double s : final_curv.scalar) smax = std::max(smax, std::abs(s));
  out.scalar_residual = smax;
  return out;
}

}  // namespace crflow
