#ifndef CRFLOW_METRICS_HPP
#define CRFLOW_METRICS_HPP

#include <array>
#include <memory>
#include <vector>

#include "crflow/radial_grid.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Rotationally symmetric, asymptotically flat class
//
//   g = A(rho)^2 drho^2 + B(rho)^2 rho^2 gS,    gS = round metric on S^{m-1}
//----------------------------------------------------------------------------

/// What a symmetric 2-tensor in a reduced class represents.  Carried for
/// bookkeeping; the numerics never branch on it.
enum class TensorRole { Metric, Curvature, MetricPerturbation, GaugeTerm };

/// Symmetric 2-tensor respecting the rotational symmetry:
///   T = rr(rho) drho^2 + tt(rho) rho^2 gS.
/// The metric itself corresponds to rr = A^2, tt = B^2.
struct RadialSymTensor {
  std::vector<double> rr;
  std::vector<double> tt;
  TensorRole role = TensorRole::Curvature;

  RadialSymTensor() = default;
  RadialSymTensor(std::size_t n, TensorRole r)
      : rr(n, 0.0), tt(n, 0.0), role(r) {}
  std::size_t size() const { return rr.size(); }
};

struct RadialMetric {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> A;  // radial lapse profile, > 0
  std::vector<double> B;  // tangential profile, > 0
  double tau = 0.0;       // asymptotic decay order; <= 0 means "unknown"

  std::size_t size() const { return A.size(); }
  int dimension() const { return grid->dimension; }

  /// Profile squares (the actual metric components): a = A^2, b = B^2.
  std::vector<double> a_profile() const;
  std::vector<double> b_profile() const;
};

/// Validating constructor: positivity of the profiles, shape against the
/// grid, and (if tau > 0) the asymptotic-flatness bound |A-1| <= C rho^-tau
/// on the outer decade.  Throws InvalidGrid / NumericalBreakdown.
RadialMetric make_radial_metric(std::shared_ptr<const RadialGrid> grid,
                                std::vector<double> A, std::vector<double> B,
                                double tau);

/// Flat metric A = B = 1 on the given grid (tau irrelevant; set large).
RadialMetric flat_radial_metric(std::shared_ptr<const RadialGrid> grid);

//----------------------------------------------------------------------------
// Homogeneous class: left-invariant metric on the compact 3-group with
// totally antisymmetric structure constants  c^k_ij = lambda eps_ijk
// (default lambda = 2, so the round unit metric is coeff = (1,1,1)).
// The metric is diagonal in the invariant frame: g = diag(x1, x2, x3).
//----------------------------------------------------------------------------

struct FrameDiagTensor {
  std::array<double, 3> d{{0.0, 0.0, 0.0}};
  TensorRole role = TensorRole::Curvature;
};

struct HomogeneousMetric {
  std::array<double, 3> coeff{{1.0, 1.0, 1.0}};  // x_i > 0
  double lambda = 2.0;                           // structure constant scale, != 0

  static constexpr int dimension() { return 3; }
};

/// Validating constructor: coefficients positive, lambda nonzero.
HomogeneousMetric make_homogeneous_metric(const std::array<double, 3>& coeff,
                                          double lambda = 2.0);

/// Riemannian volume: sqrt(x1 x2 x3) * vol of the (1,1,1) metric, which is
/// the round 3-sphere of radius 2/lambda: 2 pi^2 (2/lambda)^3.
double homogeneous_volume(const HomogeneousMetric& g);

/// Area of the unit (m-1)-sphere, omega_{m-1} = 2 pi^{m/2} / Gamma(m/2).
double unit_sphere_area(int m);

}  // namespace crflow

#endif  // CRFLOW_METRICS_HPP
