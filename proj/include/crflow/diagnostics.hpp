#ifndef CRFLOW_DIAGNOSTICS_HPP
#define CRFLOW_DIAGNOSTICS_HPP

#include <cstddef>
#include <vector>

#include "crflow/diagnostics_record.hpp"
#include "crflow/flow.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Functionals and identity checks evaluated along flow trajectories:
// Yamabe quotient, volume identity, ADM mass and its gradient-flow identity,
// curvature evolution identities, a parabolicity probe of the linearized
// gauged flow, and the asymptotic-flatness decay audit.
//----------------------------------------------------------------------------

/// Volume integral of a scalar field: omega_{m-1} * int f A B^n rho^m dx on
/// the radial class (4th-order end-corrected quadrature, truncated at
/// rho_max), or f * vol on the homogeneous class.
double volume_integral(const RadialMetric& g, const std::vector<double>& f);
double volume_integral(const HomogeneousMetric& g, double f);

/// Yamabe quotient Q = int s dvol / vol^((m-2)/m) = s * vol^(2/m) (the scalar
/// curvature of a homogeneous metric is constant). The radial overload
/// throws UnsupportedGeometry: asymptotically flat metrics have infinite
/// volume and Q is not defined.
double yamabe_quotient(const HomogeneousMetric& g);
double yamabe_quotient(const RadialMetric& g);

//----------------------------------------------------------------------------
// ADM mass
//----------------------------------------------------------------------------

struct MassEstimate {
  double mass = 0.0;
  double error_bar = 0.0;          // spread of the Richardson extrapolants
  bool order_fitted = false;       // true if the decay order was fitted
  std::vector<double> ladder;      // raw surface integrals at each radius
};

/// ADM mass. In the asymptotic Cartesian coordinates induced by the radial
/// frame, g_ij = b delta_ij + (a - b) n_i n_j, and the rotationally
/// invariant surface integral at radius R reduces in closed form to
///     psi(R) = (m-1) R^(m-2) [ (a - b) - b_x ]      (x = ln rho),
/// so only the radial interpolation and differencing are discrete. The
/// estimates psi(R_k) on the supplied radii ladder are Richardson-
/// extrapolated in R^(-tau); the error bar is the spread of the pairwise
/// extrapolants.
///
/// Preconditions: at least 3 radii inside [rho_min, rho_max] spanning at
/// least one decade (ConfigError otherwise). Throws InsufficientDecay when
/// the ladder itself varies by more than 10% of its magnitude (the surface
/// integrals have not stabilized), unless the magnitude is below an
/// absolute floor of 1e-10 (flat data).
MassEstimate adm_mass(const RadialMetric& g, const std::vector<double>& radii);

//----------------------------------------------------------------------------
// Identity checks along trajectories
//----------------------------------------------------------------------------

struct VolumeIdentityReport {
  /// max over frames of the pointwise volume-element residual (the same
  /// quantity recorded per frame as theta_check_residual).
  double max_pointwise_residual = 0.0;
  /// homogeneous class with s0 != 0: residual of
  /// d vol/dt = (m/s0) * int |E|^2 dvol.
  bool global_checked = false;
  double max_global_residual = 0.0;
};
VolumeIdentityReport volume_identity_check(const FlowTrajectory& traj);

struct MassRateReport {
  std::vector<double> t;                 // one entry per frame
  std::vector<double> mass;              // extrapolated ADM mass per frame
  std::vector<double> dm_dt;             // 3-point differenced mass rate
  std::vector<double> rate_normalized;   // -(2/omega_{m-1}) int |Ric|^2 dvol
  std::vector<double> rate_unnormalized; // -2 int |Ric|^2 dvol
  /// max_k |dm/dt - rate| / |dm/dt|, for each normalization of the
  /// gradient-flow identity. The normalized form carries the 1/omega_{m-1}
  /// factor that the mass definition's own prefactor induces through the
  /// first-variation formula; the unnormalized form is reported alongside.
  double max_rel_residual_normalized = 0.0;
  double max_rel_residual_unnormalized = 0.0;
  /// max_k |dm/dt| / ((2/omega_{m-1}) int |Ric|^2 dvol): order 1 along the
  /// conformal flow, and the mass-invariance measure for plain Ricci flow.
  double max_rate_vs_gradient_scale = 0.0;
  bool mass_monotone_decreasing = true;  // strict frame-to-frame decrease
  double max_tail_bound = 0.0;           // truncation tail of int |Ric|^2
};
/// Mass gradient-flow identity check on radial trajectories (any flow kind;
/// throws UnsupportedGeometry for homogeneous trajectories).
MassRateReport mass_derivative_check(const FlowTrajectory& traj,
                                     const std::vector<double>& radii);

struct CurvatureEvolutionReport {
  /// Scalar identity: d s/dt = Lap s + 2(s0/m)(s-s0) + 2p(s-s0)
  ///                           + 2(m-1) Lap p + 2 s0 p + 2|E|^2.
  std::vector<double> scalar_residual;   // per frame (max over nodes)
  double max_scalar_residual = 0.0;
  /// Ricci identity (homogeneous class only, where the pressure Hessian
  /// vanishes): d Ric_ii/dt = (Lap Ric)_ii + 2 sum_k K(i,k) Ric_kk / x_k^2
  ///                          - 2 Ric_ii^2 / x_i.
  bool ricci_checked = false;
  std::vector<double> ricci_residual;
  double max_ricci_residual = 0.0;
};
/// Residuals of the curvature evolution identities along a conformal-flow
/// trajectory (crf in either class; also accepts homogeneous dtcrf, whose
/// gauge term vanishes). ConfigError for other flow kinds.
CurvatureEvolutionReport curvature_evolution_check(const FlowTrajectory& traj);

//----------------------------------------------------------------------------
// Linearization probe
//----------------------------------------------------------------------------

struct JacobianProbe {
  std::size_t size = 0;              // dimension of the probed Jacobian
  std::vector<double> real_parts;    // ascending; at most n_modes entries
  double most_negative = 0.0;
  double max_real_part = 0.0;
};

/// Central-difference Jacobian of the gauged (DeTurck) right-hand side in
/// the metric degrees of freedom, with eigenvalues from a dense solver.
/// The most negative real part tracks the -Lap h principal symbol: it
/// scales like the squared finest wavenumber when the grid is refined.
/// Radial grids are capped at 128 nodes (dense eigensolve; ConfigError).
JacobianProbe fd_jacobian_probe(const HomogeneousMetric& g, double s0,
                                const HomogeneousMetric& g_ref,
                                std::size_t n_modes);
JacobianProbe fd_jacobian_probe(const RadialMetric& g, double s0,
                                const RadialMetric& g_ref,
                                std::size_t n_modes);

//----------------------------------------------------------------------------
// Asymptotic flatness audit
//----------------------------------------------------------------------------

struct FlatnessReport {
  double slope0 = 0.0;  // fitted log-log slope of |g - g_e|
  double slope1 = 0.0;  // ... of first derivatives
  double slope2 = 0.0;  // ... of second derivatives
  bool pass0 = false, pass1 = false, pass2 = false;
  bool pass = false;
  bool trivially_flat = false;  // deviations below 1e-12: slopes undefined
  double max_deviation = 0.0;   // max |g - g_e| on the fit window
};

/// Fits decay slopes of |g - g_e| and its first and second radial
/// derivatives on the outer decade of the grid and compares them with the
/// decay order tau: pass iff slopes <= -tau + 0.2, -tau - 1 + 0.2,
/// -tau - 2 + 0.2 respectively.
FlatnessReport asymptotic_flatness_check(const RadialMetric& g, double tau);

//----------------------------------------------------------------------------
// Per-frame records
//----------------------------------------------------------------------------

/// One DiagnosticsRecord per recorded frame. mass_radii: ladder for the ADM
/// mass (radial class; empty = skip the mass columns).
std::vector<DiagnosticsRecord> compute_diagnostics(
    const FlowTrajectory& traj, const std::vector<double>& mass_radii = {});

/// compute_diagnostics + store the result on the trajectory.
void attach_diagnostics(FlowTrajectory& traj,
                        const std::vector<double>& mass_radii = {});

}  // namespace crflow

#endif  // CRFLOW_DIAGNOSTICS_HPP
