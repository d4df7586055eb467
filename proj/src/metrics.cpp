#include "crflow/metrics.hpp"

#include <cmath>
#include <string>

#include "crflow/errors.hpp"

namespace crflow {

std::vector<double> RadialMetric::a_profile() const {
  std::vector<double> a(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) a[i] = A[i] * A[i];
  return a;
}

std::vector<double> RadialMetric::b_profile() const {
  std::vector<double> b(B.size());
  for (std::size_t i = 0; i < B.size(); ++i) b[i] = B[i] * B[i];
  return b;
}

RadialMetric make_radial_metric(std::shared_ptr<const RadialGrid> grid,
                                std::vector<double> A, std::vector<double> B,
                                double tau) {
  if (!grid) throw InvalidGrid("make_radial_metric: null grid");
  const std::size_t n = grid->n_nodes;
  if (A.size() != n || B.size() != n)
    throw InvalidGrid("make_radial_metric: profile length " +
                      std::to_string(A.size()) + "/" + std::to_string(B.size()) +
                      " does not match grid with " + std::to_string(n) +
                      " nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(A[i]) || !std::isfinite(B[i]))
      throw NumericalBreakdown("make_radial_metric: non-finite profile value");
    if (A[i] <= 0.0 || B[i] <= 0.0)
      throw NumericalBreakdown(
          "make_radial_metric: metric profiles must be positive (node " +
          std::to_string(i) + ")");
  }
  if (tau > 0.0) {
    // Asymptotic-flatness sanity bound on the outer decade: the deviation
    // |A-1| + |B-1| must stay within a generous multiple of rho^-tau.
    const double rho_max = grid->rho_max;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = grid->nodes[i];
      if (rho < 0.1 * rho_max) continue;
      const double dev = std::abs(A[i] - 1.0) + std::abs(B[i] - 1.0);
      const double bound = 100.0 * std::pow(rho, -tau);
      if (dev > bound && dev > 1e-8)
        throw NumericalBreakdown(
            "make_radial_metric: profiles violate the declared decay order "
            "tau=" + std::to_string(tau) + " near rho=" + std::to_string(rho));
    }
  }
  RadialMetric g;
  g.grid = std::move(grid);
  g.A = std::move(A);
  g.B = std::move(B);
  g.tau = tau;
  return g;
}

RadialMetric flat_radial_metric(std::shared_ptr<const RadialGrid> grid) {
  if (!grid) throw InvalidGrid("flat_radial_metric: null grid");
  const std::size_t n = grid->n_nodes;
  return make_radial_metric(std::move(grid), std::vector<double>(n, 1.0),
                            std::vector<double>(n, 1.0), 100.0);
}

HomogeneousMetric make_homogeneous_metric(const std::array<double, 3>& coeff,
                                          double lambda) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(coeff[i]) || coeff[i] <= 0.0)
      throw NumericalBreakdown(
          "make_homogeneous_metric: frame coefficients must be positive and "
          "finite");
  }
  if (!std::isfinite(lambda) || lambda == 0.0)
    throw NumericalBreakdown(
        "make_homogeneous_metric: structure-constant scale must be nonzero");
  HomogeneousMetric g;
  g.coeff = coeff;
  g.lambda = lambda;
  return g;
}

double homogeneous_volume(const HomogeneousMetric& g) {
  const double r = 2.0 / std::abs(g.lambda);
  const double vol_round = 2.0 * M_PI * M_PI * r * r * r;
  return vol_round *
         std::sqrt(g.coeff[0] * g.coeff[1] * g.coeff[2]);
}

double unit_sphere_area(int m) {
  if (m < 2) throw UnsupportedGeometry("unit_sphere_area: need m >= 2");
  // omega_{m-1} = 2 pi^{m/2} / Gamma(m/2)
  return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

}  // namespace crflow
