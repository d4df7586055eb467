#ifndef CRFLOW_ELLIPTIC_HPP
#define CRFLOW_ELLIPTIC_HPP

#include <vector>

#include "crflow/band_matrix.hpp"
#include "crflow/metrics.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Conformal-pressure solves: (m-1) Lap[g] p + s0 p = source.
//
// Radial class: in x = ln rho the equation becomes
//   p_xx + gamma p_x + s0 A^2 rho^2 / (m-1) p = A^2 rho^2 source / (m-1),
//   gamma = (m-1)(1 + B_x/B) - A_x/A - 1,
// discretized with 3-point second-order interior stencils (the resulting
// matrix is an M-matrix for s0 <= 0, preserving the minimum principle
// discretely), a reflective inner closure p_x = 0, and an outer Robin closure
// p_x + (m-2) p = 0 encoding the rho^(2-m) harmonic tail.
//----------------------------------------------------------------------------

enum class PressureStatus { ok, near_resonant, failed };

struct PressureField {
  std::vector<double> values;  // grid field; single entry in the homogeneous class
  double residual_norm = 0.0;
  PressureStatus status = PressureStatus::failed;
};

PressureField solve_pressure_radial(const RadialMetric& g, double s0,
                                    const std::vector<double>& source);

/// Homogeneous class: p is spatially constant, p = -|E|^2 / s0.
/// Throws NonInvertibleOperator when s0 = 0 (constants span the kernel).
PressureField pressure_homogeneous(double deviation_norm_sq, double s0);

/// Assemble the discrete radial operator (shared by the solver, the
/// invertibility probe, and the brute-force comparison tests).
BandMatrix assemble_radial_pressure_operator(const RadialMetric& g, double s0);
/// Right-hand side matching the assembled operator for a given source.
std::vector<double> radial_pressure_rhs(const RadialMetric& g,
                                        const std::vector<double>& source);

struct ConditionReport {
  double sigma_min = 0.0;  // smallest-singular-value estimate
  double scale = 0.0;      // operator scale used for the thresholds
  PressureStatus status = PressureStatus::ok;
};

/// Inverse-iteration smallest-singular-value estimate of the discrete radial
/// operator.  For s0 <= 0 the discretization is an M-matrix, hence
/// unconditionally invertible and reported ok; for s0 > 0 the report is
/// near_resonant below 1e-6 * scale (the shift can cross an eigenvalue of
/// -(m-1) Lap).  If elimination breaks down the report is near_resonant with
/// sigma_min = 0.
ConditionReport invertibility_estimate(const RadialMetric& g, double s0);

/// Homogeneous class: spectrum of (m-1) Lap + s0 scanned over the constant
/// band and the two lowest invariant eigenbands of the Laplacian on the
/// group, which are available in closed form for a diagonal metric:
///   band 1 (4-fold):  -Lap = (lambda^2/4) (1/x1 + 1/x2 + 1/x3)
///   band 2 (i = 1,2,3): -Lap = lambda^2 (1/x_j + 1/x_k)
/// Higher bands lie above these for every s0 used by the scenarios.
ConditionReport invertibility_estimate(const HomogeneousMetric& g, double s0);

//----------------------------------------------------------------------------
// Conformal projection to zero scalar curvature (initial-data helper):
// find u > 0 with u -> 1 at infinity such that g = u^(4/(m-2)) g_hat is
// scalar-flat; i.e. solve Lap u = ((m-2)/(4(m-1))) s[g_hat] u.  A band solve
// on the second-order operator seeds Newton iterations that drive the
// fourth-order discrete scalar curvature of the conformal metric to zero.
//----------------------------------------------------------------------------

struct FlattenResult {
  RadialMetric metric;
  double scalar_residual = 0.0;  // max |s| of the returned metric
  int newton_iterations = 0;
};

FlattenResult conformal_flatten(const RadialMetric& g_hat);

}  // namespace crflow

#endif  // CRFLOW_ELLIPTIC_HPP
