#ifndef CRFLOW_FLOW_HPP
#define CRFLOW_FLOW_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "crflow/curvature.hpp"
#include "crflow/diagnostics_record.hpp"
#include "crflow/elliptic.hpp"
#include "crflow/metrics.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Flow assembly and time integration.
//
//   crf:    dg/dt = -2 (Ric - (s0/m) g) - 2 p g,   (m-1) Lap p + s0 p = -|E|^2
//   dtcrf:  crf right-hand side + L_W g            (W from the fixed reference)
//   ricci:  dg/dt = -2 Ric                         (comparison flow, p = 0)
//
// Time stepping is classical four-stage Runge-Kutta with the elliptic pressure
// problem re-solved at every stage, so each stage evaluates a consistent
// (g, p) pair.  The step size is frozen at t = 0:
//   radial:       dt = dt_safety * (min_i A_i (rho_{i+1}-rho_i))^2 / (2m)
//   homogeneous:  dt = dt_safety / (2m * max_i |Rhat_i(g_0)|)
// Both commute exactly with the scaling g -> lambda^{-2} g for lambda a power
// of two, which makes the scaling-equivariance property bit-testable.
//----------------------------------------------------------------------------

enum class FlowKind { crf, dtcrf, ricci };
enum class GeometryKind { radial_af, homogeneous };
enum class ReferenceKind { euclidean, initial };
enum class Termination { completed, pressure_failure, numerical_breakdown };

struct FlowConfig {
  FlowKind flow_kind = FlowKind::crf;
  GeometryKind geometry_kind = GeometryKind::radial_af;
  double s0 = 0.0;           // must be 0 in the radial_af class
  double dt_safety = 0.2;    // in (0, 1]
  // Default horizon: short.  The ungauged flows are only weakly parabolic
  // (no diffusion along diffeomorphism directions), and on a truncated
  // radial grid that leaves a boundary-localized mode with Re(lambda) of
  // order +1e2; horizons well under one e-fold keep it invisible.
  double t_end = 1.0e-3;
  std::size_t output_stride = 1;
  ReferenceKind reference_metric = ReferenceKind::euclidean;
};

struct FlowState {
  double t = 0.0;
  std::variant<RadialMetric, HomogeneousMetric> metric;
  PressureField pressure;
  std::variant<RadialCurvature, FrameCurvature> curvature;
  std::vector<double> gauge_w;  // DeTurck W at this frame (dtcrf radial only)

  const RadialMetric& radial() const { return std::get<RadialMetric>(metric); }
  const HomogeneousMetric& homogeneous() const {
    return std::get<HomogeneousMetric>(metric);
  }
  const RadialCurvature& radial_curvature() const {
    return std::get<RadialCurvature>(curvature);
  }
  const FrameCurvature& frame_curvature() const {
    return std::get<FrameCurvature>(curvature);
  }
};

struct FlowTrajectory {
  FlowConfig config;
  std::vector<FlowState> states;
  // Per-frame diagnostics; empty until attach_diagnostics (diagnostics
  // module) fills it.
  std::vector<DiagnosticsRecord> diagnostics;
  Termination termination = Termination::completed;
  std::string termination_detail;
  double dt = 0.0;              // step size actually used
  std::size_t steps_taken = 0;
};

//----------------------------------------------------------------------------
// Right-hand sides (exposed for direct identity tests)
//----------------------------------------------------------------------------

RadialSymTensor crf_rhs(const RadialMetric& g, const PressureField& p,
                        double s0);
FrameDiagTensor crf_rhs(const HomogeneousMetric& g, const PressureField& p,
                        double s0);

RadialSymTensor dtcrf_rhs(const RadialMetric& g, const PressureField& p,
                          double s0, const RadialMetric& g_ref);
FrameDiagTensor dtcrf_rhs(const HomogeneousMetric& g, const PressureField& p,
                          double s0, const HomogeneousMetric& g_ref);

RadialSymTensor ricci_rhs(const RadialMetric& g);
FrameDiagTensor ricci_rhs(const HomogeneousMetric& g);

//----------------------------------------------------------------------------
// Integration
//----------------------------------------------------------------------------

/// Step size dictated by the policy above (frozen from the initial metric).
double stable_time_step(const RadialMetric& g0, const FlowConfig& config);
double stable_time_step(const HomogeneousMetric& g0, const FlowConfig& config);

FlowTrajectory run_flow(const FlowConfig& config, const RadialMetric& g0);
FlowTrajectory run_flow(const FlowConfig& config, const HomogeneousMetric& g0);

/// Reconstruct the ungauged flow from a DeTurck trajectory by integrating the
/// diffeomorphism ODE d phi/dt = -W(phi, t) per grid node (RK4 in t with W
/// linear in t between frames and cubic in ln rho across the grid) and
/// pulling back each recorded frame.  Characteristics that wander outside
/// [rho_min, rho_max] by more than 0.5% truncate the trajectory at that time;
/// if no frame survives, throws OutOfDomain.
FlowTrajectory gauge_pullback(const FlowTrajectory& traj);

}  // namespace crflow

#endif  // CRFLOW_FLOW_HPP
