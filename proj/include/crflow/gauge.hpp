#ifndef CRFLOW_GAUGE_HPP
#define CRFLOW_GAUGE_HPP

#include <array>
#include <vector>

#include "crflow/metrics.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Gauge-fixing ingredients: trace reversal G, divergence delta, its adjoint
// delta*, and the DeTurck vector field W with its Lie derivative term.
//
// Sign conventions (fixed once, validated in tests):
//   G(B)        = B - (1/2) trace_g(B) g
//   (delta B)_i = grad^j B_ij
//   (delta* w)_ij = -(1/2) (nabla_i w_j + nabla_j w_i)   so delta* w = -(1/2) L_X g
//   W^k         = g^ij (Gamma^k_ij[g] - Gamma^k_ij[g_ref])
// With these choices 2 delta*((g_ref^{-1} delta G(g_ref)) flat) = L_W g holds
// exactly in the continuum; tests confirm it at the discretization order.
//----------------------------------------------------------------------------

RadialSymTensor trace_reversed(const RadialSymTensor& B, const RadialMetric& g);
FrameDiagTensor trace_reversed(const FrameDiagTensor& B,
                               const HomogeneousMetric& g);

/// Divergence of a radial symmetric tensor: one nonzero (radial) component.
std::vector<double> divergence(const RadialSymTensor& B, const RadialMetric& g);

/// Divergence of a diagonal invariant tensor vanishes identically (every
/// connection coefficient with a repeated index is zero); provided so callers
/// can treat the classes uniformly.
std::array<double, 3> divergence(const FrameDiagTensor& B,
                                 const HomogeneousMetric& g);

/// delta* of a radial one-form omega = omega(rho) drho.
RadialSymTensor adjoint_divergence(const std::vector<double>& omega,
                                   const RadialMetric& g);

struct RadialGaugeTerm {
  std::vector<double> W;   // W^rho, the single nonzero vector component
  RadialSymTensor lie_wg;  // (L_W g) in profile form
};

/// DeTurck vector W^k = g^ij (Gamma^k_ij[g] - Gamma^k_ij[g_ref]) and L_W g.
/// Throws IncompatibleReference if the grids differ.
RadialGaugeTerm deturck_gauge_term(const RadialMetric& g,
                                   const RadialMetric& g_ref);

struct FrameGaugeTerm {
  std::array<double, 3> W{{0.0, 0.0, 0.0}};
  FrameDiagTensor lie_wg;
};

/// Homogeneous class: the Christoffel contraction g^ij Gamma^k_ij vanishes
/// for every diagonal invariant metric, so W = 0 and L_W g = 0 identically.
FrameGaugeTerm deturck_gauge_term(const HomogeneousMetric& g,
                                  const HomogeneousMetric& g_ref);

/// Lie derivative of the metric along a radial vector field w = W^rho:
/// (L_w g)_rr = w a' + 2 a w', (L_w g)_tt rho^2 = w (b rho^2)'.
RadialSymTensor lie_derivative_metric(const std::vector<double>& w,
                                      const RadialMetric& g);

struct RadialGaugeOperators {
  RadialSymTensor trace_reversal;        // G(B) = B - (1/2) tr_g(B) g
  std::vector<double> divergence;        // (delta B)_rho
  RadialSymTensor adjoint_of_oneform;    // delta* omega
};

/// Bundled evaluation of G, delta, and delta* on the radial class.
RadialGaugeOperators operator_G_and_divergence(const RadialSymTensor& B,
                                               const RadialMetric& g,
                                               const std::vector<double>& omega);

struct FrameGaugeOperators {
  FrameDiagTensor trace_reversal;
  std::array<double, 3> divergence{{0.0, 0.0, 0.0}};
};

/// Homogeneous counterpart. delta* of an invariant one-form is a purely
/// off-diagonal symmetric tensor, which leaves the diagonal reduction class,
/// so no one-form argument is accepted here; the gauge field W vanishes
/// identically on this class and never needs it.
FrameGaugeOperators operator_G_and_divergence(const FrameDiagTensor& B,
                                              const HomogeneousMetric& g);

}  // namespace crflow

#endif  // CRFLOW_GAUGE_HPP
