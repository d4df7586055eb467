#include "crflow/finite_diff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crflow/errors.hpp"

namespace crflow {

double cubic_interp(const std::vector<double>& f, double x0, double h,
                    double xq) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("cubic_interp: need at least 4 samples");
  const double s = (xq - x0) / h;
  if (s < -1.0 || s > static_cast<double>(n))
    throw OutOfDomain("cubic_interp: query point " + std::to_string(xq) +
                      " is more than one cell outside the sampled interval");
  long long i0 = static_cast<long long>(std::floor(s)) - 1;
  i0 = std::max<long long>(0, std::min<long long>(i0, (long long)n - 4));
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      w *= (s - (i0 + b)) / double(a - b);
    }
    acc += w * f[(std::size_t)(i0 + a)];
  }
  return acc;
}

//----------------------------------------------------------------------------
// Fornberg's algorithm (Math. Comp. 51 (1988) 699-706).  c[j] are the weights
// of u(nodes[j]) in an approximation of the d-th derivative at x0.
//----------------------------------------------------------------------------
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int d) {
  const int n = static_cast<int>(nodes.size());
  if (n < d + 1) throw std::invalid_argument("fd_weights: need at least d+1 nodes");

  // delta[k][j] for derivative order k at the current node count
  std::vector<std::vector<double>> delta(d + 1, std::vector<double>(n, 0.0));
  delta[0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = std::min(i, d); k >= 1; --k)
          delta[k][i] = c1 * (k * delta[k - 1][i - 1] - (nodes[i - 1] - x0) * delta[k][i - 1]) / c2;
        delta[0][i] = -c1 * (nodes[i - 1] - x0) * delta[0][i - 1] / c2;
      }
      for (int k = std::min(i, d); k >= 1; --k)
        delta[k][j] = ((nodes[i] - x0) * delta[k][j] - k * delta[k - 1][j]) / c3;
      delta[0][j] = (nodes[i] - x0) * delta[0][j] / c3;
    }
    c1 = c2;
  }
  return delta[d];
}

//----------------------------------------------------------------------------
// UniformFd
//----------------------------------------------------------------------------
UniformFd::UniformFd(std::size_t n, double h) : n_(n), h_(h) {
  if (n < 6) throw std::invalid_argument("UniformFd: need at least 6 nodes");
  if (!(h > 0.0)) throw std::invalid_argument("UniformFd: step must be positive");

  auto stencil = [h](int first, int count) {
    std::vector<double> xs(count);
    for (int k = 0; k < count; ++k) xs[k] = (first + k) * h;
    return xs;
  };
  // rows are expressed with x0 at node 0 resp. node 1 of the grid
  w1_row0_ = fd_weights(0.0, stencil(0, 5), 1);
  w1_row1_ = fd_weights(h, stencil(0, 5), 1);
  w2_row0_ = fd_weights(0.0, stencil(0, 6), 2);
  w2_row1_ = fd_weights(h, stencil(0, 6), 2);
}

void UniformFd::d1(const std::vector<double>& u, std::vector<double>& du) const {
  assert(u.size() == n_);
  du.resize(n_);
  const std::size_t n = n_;
  const double inv12h = 1.0 / (12.0 * h_);

  auto dot = [&u](const std::vector<double>& w, std::size_t first) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * u[first + k];
    return s;
  };

  du[0] = dot(w1_row0_, 0);
  du[1] = dot(w1_row1_, 0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    du[i] = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) * inv12h;
  // mirrored one-sided rows: d/dx anti-symmetrizes under x -> -x
  {
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s -= w1_row1_[k] * u[n - 1 - k];
    du[n - 2] = s;
    s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s -= w1_row0_[k] * u[n - 1 - k];
    du[n - 1] = s;
  }
}

void UniformFd::d2(const std::vector<double>& u, std::vector<double>& ddu) const {
  assert(u.size() == n_);
  ddu.resize(n_);
  const std::size_t n = n_;
  const double inv12h2 = 1.0 / (12.0 * h_ * h_);

  auto dot = [&u](const std::vector<double>& w, std::size_t first) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * u[first + k];
    return s;
  };

  ddu[0] = dot(w2_row0_, 0);
  ddu[1] = dot(w2_row1_, 0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    ddu[i] = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) * inv12h2;
  // second derivative is symmetric under x -> -x
  {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += w2_row1_[k] * u[n - 1 - k];
    ddu[n - 2] = s;
    s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += w2_row0_[k] * u[n - 1 - k];
    ddu[n - 1] = s;
  }
}

std::vector<double> UniformFd::d1(const std::vector<double>& u) const {
  std::vector<double> r;
  d1(u, r);
  return r;
}

std::vector<double> UniformFd::d2(const std::vector<double>& u) const {
  std::vector<double> r;
  d2(u, r);
  return r;
}

}  // namespace crflow
