#pragma once

#include <optional>

namespace crflow {

// One row of per-frame diagnostics along a flow trajectory.
//
// Columns that only make sense in one geometry class are optional:
//   vol, Q          — homogeneous class (compact; finite volume)
//   mass, mass_err  — radial asymptotically flat class (ADM mass + error bar)
//
// theta_check_residual measures the volume-element identity
//     d/dt log sqrt(det g) = -(s - s0) - m p          (conformal flows)
//     d/dt log sqrt(det g) = -s                        (plain Ricci flow)
// evaluated with three-point time differencing across recorded frames, so it
// isolates the time-discretization error; the constraint drift |s - s0| that
// the continuum identity absorbs is reported separately as constraint_drift.
// For the DeTurck variant the divergence of the gauge field (half the
// g-trace of L_W g) is added to the right-hand side.
struct DiagnosticsRecord {
  double t = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;
  double constraint_drift = 0.0;  // max_i |s_i - s0|
  std::optional<double> vol;      // homogeneous only
  std::optional<double> Q;        // homogeneous only
  std::optional<double> mass;     // radial only (needs a radii ladder)
  std::optional<double> mass_err; // extrapolant spread
  double ric_l2 = 0.0;            // integral of |Ric|^2 dvol (truncated on AF grids)
  double dev_l2 = 0.0;            // integral of |E|^2 dvol
  double theta_check_residual = 0.0;
  // Estimated tail of the truncated curvature integrals beyond rho_max
  // (radial class; 0 in the homogeneous class). Not a CSV column.
  double integral_tail_bound = 0.0;
};

}  // namespace crflow
