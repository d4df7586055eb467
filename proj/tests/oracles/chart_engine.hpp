#ifndef CRFLOW_TESTS_CHART_ENGINE_HPP
#define CRFLOW_TESTS_CHART_ENGINE_HPP

// Independent curvature oracle: a brute-force coordinate-chart engine that
// knows nothing about symmetry reduction. It receives the metric as a plain
// callback g_ij(y) on an m-dimensional Cartesian patch and differentiates it
// with second-order central differences (optionally Richardson-combined to
// fourth order). Everything is assembled from the classical coordinate
// formulas:
//
//   Gamma^a_bc = 1/2 g^{ad} (d_b g_{dc} + d_c g_{db} - d_d g_{bc})
//   R_iklm     = 1/2 (d_k d_l g_im + d_i d_m g_kl
//                     - d_k d_m g_il - d_i d_l g_km)
//                + g_np (Gamma^n_kl Gamma^p_im - Gamma^n_km Gamma^p_il)
//   Ric_ik     = g^{lm} R_limk,      s = g^{ik} Ric_ik
//
// (sign convention: the round sphere has positive scalar curvature).
//
// Adapters map the two reduced classes onto charts:
//   * rotational symmetry: g_ij(y) = b(rho) delta_ij + (a(rho)-b(rho)) n_i n_j
//     with rho = |y|, n = y/rho;
//   * homogeneous class: exponential coordinates z at the identity, where the
//     left-invariant coframe is phi(ad_z) dz with
//     phi(u) = (1 - e^{-u})/u = sum_{n>=0} (-u)^n/(n+1)!  truncated far below
//     double precision on the tiny patches used here.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Metric callback: fill the m x m matrix g with g_ij at the point y.
using MetricFn =
    std::function<void(const std::vector<double>& y, Eigen::MatrixXd& g)>;

struct ChartCurvature {
  Eigen::MatrixXd metric;       // g_ij at the point
  Eigen::MatrixXd ricci;        // Ric_ij (lowered)
  double scalar = 0.0;
  std::vector<double> riemann;  // R_iklm flattened as ((i*m + k)*m + l)*m + m'
  int dim = 0;

  double riem(int i, int k, int l, int m) const {
    return riemann[static_cast<std::size_t>(((i * dim + k) * dim + l) * dim +
                                            m)];
  }
  /// <R(e_i,e_j)e_j, e_i> on coordinate directions: R_ijij.
  double sectional_numerator(int i, int j) const { return riem(i, j, i, j); }
};

/// Curvature at y0 with plain second-order differencing at step delta.
ChartCurvature chart_curvature(const MetricFn& g,
                               const std::vector<double>& y0, double delta);

/// Richardson combination of delta and delta/2 (fourth-order accurate).
ChartCurvature chart_curvature_richardson(const MetricFn& g,
                                          const std::vector<double>& y0,
                                          double delta);

/// Christoffel symbols Gamma^a_bc at y0, flattened as (a*m + b)*m + c,
/// second-order differencing (Richardson over delta, delta/2).
std::vector<double> chart_christoffel(const MetricFn& g,
                                      const std::vector<double>& y0,
                                      double delta);

//----------------------------------------------------------------------------
// Adapters for the two reduced classes
//----------------------------------------------------------------------------

/// Smooth radial profile pair a(rho), b(rho) (metric components, not their
/// square roots).
using RadialProfile = std::function<double(double)>;

/// Chart metric of a = A^2, b = B^2: g_ij = b delta_ij + (a-b) n_i n_j.
MetricFn radial_chart_metric(int dim, RadialProfile a, RadialProfile b);

/// Chart metric of the homogeneous class in exponential coordinates around
/// the identity: g_ij(z) = sum_a x_a M^a_i(z) M^a_j(z) with
/// M(z) = phi(ad_z), (ad_z)^k_b = lambda sum_c z_c eps_{cbk}.
MetricFn homogeneous_chart_metric(const std::array<double, 3>& coeff,
                                  double lambda);

}  // namespace oracle

#endif  // CRFLOW_TESTS_CHART_ENGINE_HPP
