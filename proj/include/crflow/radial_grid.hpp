#ifndef CRFLOW_RADIAL_GRID_HPP
#define CRFLOW_RADIAL_GRID_HPP

#include <cstddef>
#include <vector>

namespace crflow {

/// Node positions rho_min * exp(i*h), h = ln(rho_max/rho_min)/(n-1).
/// The endpoints are pinned to rho_min and rho_max exactly.  n >= 2.
std::vector<double> log_spaced_nodes(double rho_min, double rho_max, std::size_t n);

/// Logarithmically spaced radial grid for the rotationally symmetric,
/// asymptotically flat class.  Uniform in x = ln(rho); all differencing is
/// done in x and converted back with d/drho = (1/rho) d/dx.
struct RadialGrid {
  double rho_min = 0.0;
  double rho_max = 0.0;
  std::size_t n_nodes = 0;
  int dimension = 0;           // manifold dimension m >= 3
  double h = 0.0;              // uniform step in x = ln(rho)
  std::vector<double> nodes;   // rho_i, strictly increasing
  std::vector<double> x;       // ln(rho_i)
};

/// Build and validate a radial grid.  Throws InvalidGrid unless
/// 0 < rho_min < rho_max, n_nodes >= 16 and m >= 3.
RadialGrid build_radial_grid(double rho_min, double rho_max, std::size_t n_nodes, int dimension);

}  // namespace crflow

#endif  // CRFLOW_RADIAL_GRID_HPP
