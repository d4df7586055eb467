#ifndef CRFLOW_FINITE_DIFF_HPP
#define CRFLOW_FINITE_DIFF_HPP

#include <cstddef>
#include <vector>

namespace crflow {

/// Finite-difference weights for the d-th derivative at evaluation point x0
/// given arbitrary distinct nodes (Fornberg's recurrence).  Exact for
/// polynomials up to degree nodes.size()-1.
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int d);

/// Cubic (4-point Lagrange) interpolation of samples f[i] at x0 + i h, with
/// the stencil clamped at the ends.  xq may overshoot the sampled interval
/// by up to one cell (boundary-stencil extrapolation); beyond that throws
/// OutOfDomain.
double cubic_interp(const std::vector<double>& f, double x0, double h,
                    double xq);

/// First and second derivative operators on a uniform grid, 4th-order
/// accurate everywhere: 5-point centered stencils in the interior, 5-point
/// (first derivative) and 6-point (second derivative) one-sided stencils at
/// the two nodes next to each boundary.
class UniformFd {
 public:
  UniformFd(std::size_t n, double h);

  std::size_t size() const { return n_; }
  double step() const { return h_; }

  /// du[i] = (d/dx u)(x_i)
  void d1(const std::vector<double>& u, std::vector<double>& du) const;
  /// ddu[i] = (d^2/dx^2 u)(x_i)
  void d2(const std::vector<double>& u, std::vector<double>& ddu) const;

  std::vector<double> d1(const std::vector<double>& u) const;
  std::vector<double> d2(const std::vector<double>& u) const;

 private:
  std::size_t n_;
  double h_;
  // one-sided rows for nodes 0,1 (mirrored for n-2, n-1)
  std::vector<double> w1_row0_, w1_row1_;  // 5 entries each
  std::vector<double> w2_row0_, w2_row1_;  // 6 entries each
};

}  // namespace crflow

#endif  // CRFLOW_FINITE_DIFF_HPP
