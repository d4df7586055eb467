#include "crflow/radial_grid.hpp"

#include <cmath>

#include "crflow/errors.hpp"

namespace crflow {

std::vector<double> log_spaced_nodes(double rho_min, double rho_max, std::size_t n) {
  if (!(rho_min > 0.0) || !(rho_max > rho_min))
    throw InvalidGrid("log_spaced_nodes: need 0 < rho_min < rho_max");
  if (n < 2) throw InvalidGrid("log_spaced_nodes: need at least 2 nodes");

  const double x0 = std::log(rho_min);
  const double h = (std::log(rho_max) - x0) / static_cast<double>(n - 1);
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = std::exp(x0 + static_cast<double>(i) * h);
  nodes.front() = rho_min;
  nodes.back() = rho_max;
  return nodes;
}

RadialGrid build_radial_grid(double rho_min, double rho_max, std::size_t n_nodes, int dimension) {
  if (!(rho_min > 0.0) || !(rho_max > rho_min))
    throw InvalidGrid("build_radial_grid: need 0 < rho_min < rho_max");
  if (n_nodes < 16) throw InvalidGrid("build_radial_grid: need n_nodes >= 16");
  if (dimension < 3) throw InvalidGrid("build_radial_grid: need dimension m >= 3");

  RadialGrid g;
  g.rho_min = rho_min;
  g.rho_max = rho_max;
  g.n_nodes = n_nodes;
  g.dimension = dimension;
  g.h = (std::log(rho_max) - std::log(rho_min)) / static_cast<double>(n_nodes - 1);
  g.nodes = log_spaced_nodes(rho_min, rho_max, n_nodes);
  g.x.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) g.x[i] = std::log(g.nodes[i]);
  return g;
}

}  // namespace crflow
