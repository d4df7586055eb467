#ifndef CRFLOW_CURVATURE_HPP
#define CRFLOW_CURVATURE_HPP

#include <vector>

#include "crflow/metrics.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Tensor algebra on the reduced classes (pure contractions, no derivatives)
//----------------------------------------------------------------------------

/// trace_g(T) pointwise: T_rr/a + (m-1) T_tt/b.
std::vector<double> radial_trace(const RadialSymTensor& T,
                                 const RadialMetric& g);

/// |T|_g^2 pointwise: (T_rr/a)^2 + (m-1)(T_tt/b)^2.
std::vector<double> radial_norm_sq(const RadialSymTensor& T,
                                   const RadialMetric& g);

/// trace_g(T) = sum_i T_i / x_i.
double frame_trace(const FrameDiagTensor& T, const HomogeneousMetric& g);

/// |T|_g^2 = sum_i (T_i / x_i)^2.
double frame_norm_sq(const FrameDiagTensor& T, const HomogeneousMetric& g);

//----------------------------------------------------------------------------
// Curvature of the radial class
//
// With a = A^2, b = B^2, x = ln rho, n = m-1 and
//   F1 = 1 + b_x/(2b),  F2 = F1^2 + b_xx/(2b) - (b_x/b)^2/2,
// the nonzero Ricci components are
//   Ric_rhorho = -(n/rho^2) [F2 - F1 (1 + a_x/(2a))]
//   Ric_ang    = (n-1)(1 - b F1^2/a) - b (F2-F1)/a + b F1 a_x/(2a^2)
// where Ric = Ric_rhorho drho^2 + Ric_ang gS (gS the unit-sphere metric),
// i.e. the stored tangential profile is tt = Ric_ang / rho^2.
//----------------------------------------------------------------------------

struct RadialCurvature {
  RadialSymTensor ricci;                 // role = Curvature
  std::vector<double> scalar;            // s(rho)
  std::vector<double> ric_norm_sq;       // |Ric|^2 pointwise
  RadialSymTensor deviation;             // E = Ric - (s0/m) g
  std::vector<double> deviation_norm_sq; // |E|^2 pointwise
  double s0 = 0.0;
};

RadialCurvature ricci_radial(const RadialMetric& g, double s0 = 0.0);

//----------------------------------------------------------------------------
// Curvature of the homogeneous class
//
// For g = diag(x1,x2,x3) in the invariant frame with structure constants
// c^k_ij = lambda eps_ijk, the Ricci endomorphism eigenvalues are
//   Rhat_i = lambda^2 [x_i^2 - (x_j - x_k)^2] / (2 x1 x2 x3)
// and Ric(e_i,e_i) = x_i Rhat_i, s = sum Rhat_i.
//----------------------------------------------------------------------------

struct FrameCurvature {
  FrameDiagTensor ricci;       // Ric(e_i,e_i), role = Curvature
  double scalar = 0.0;
  double ric_norm_sq = 0.0;
  FrameDiagTensor deviation;   // E = Ric - (s0/3) g
  double deviation_norm_sq = 0.0;
  double s0 = 0.0;
};

FrameCurvature curvature_homogeneous(const HomogeneousMetric& g,
                                     double s0 = 0.0);

/// Sectional numerator <R(e_i,e_j)e_j, e_i> (fully lowered Riemann component
/// on the coordinate pair), zero when i = j.
double homogeneous_sectional_numerator(const HomogeneousMetric& g, int i,
                                       int j);

/// Rough Laplacian of a diagonal invariant 2-tensor (result again diagonal):
///   (Delta T)_ii = sum_{a != i} lambda^2 D^2 / (2 x_a x_k) (T_k/x_k - T_i/x_i),
/// k the remaining index and D = x_i + x_k - x_a.
FrameDiagTensor homogeneous_tensor_laplacian(const HomogeneousMetric& g,
                                             const FrameDiagTensor& T);

//----------------------------------------------------------------------------
// Einstein deviation (shared by both classes)
//----------------------------------------------------------------------------

struct RadialDeviation {
  RadialSymTensor E;
  std::vector<double> norm_sq;
};

struct FrameDeviation {
  FrameDiagTensor E;
  double norm_sq = 0.0;
};

RadialDeviation einstein_deviation(const RadialCurvature& curv,
                                   const RadialMetric& g, double s0);
FrameDeviation einstein_deviation(const FrameCurvature& curv,
                                  const HomogeneousMetric& g, double s0);

/// Scalar Laplacian Delta f = g^ij nabla_i nabla_j f on the radial class,
/// evaluated with the 4th-order stencils in x = ln rho:
///   Delta f = (f_xx + gamma f_x) / (a rho^2),
///   gamma   = (m-1) (1 + b_x/(2b)) - a_x/(2a) - 1.
std::vector<double> laplacian_radial(const RadialMetric& g,
                                     const std::vector<double>& f);

}  // namespace crflow

#endif  // CRFLOW_CURVATURE_HPP
