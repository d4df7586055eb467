// Finite-difference kernels and the banded linear algebra they feed.
//
// Oracles: closed-form derivatives of polynomials and trig functions,
// Eigen dense factorizations, and the explicit spectrum of the (-1,2,-1)
// Toeplitz matrix.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "crflow/band_matrix.hpp"
#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"
#include "crflow/radial_grid.hpp"

using namespace crflow;

namespace {

double poly(double x, const std::vector<double>& c) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

double dpoly(double x, const std::vector<double>& c, int d) {
  if (d == 0) return poly(x, c);
  std::vector<double> dc;
  for (std::size_t k = 1; k < c.size(); ++k)
    dc.push_back(static_cast<double>(k) * c[k]);
  return dpoly(x, dc, d - 1);
}

}  // namespace

TEST_CASE("fd_weights reproduce polynomial derivatives on scattered nodes") {
  const std::vector<double> nodes{-0.7, 0.0, 0.35, 1.2, 2.05, 2.6};
  const std::vector<double> c{1.3, -0.4, 0.9, 0.21, -0.07, 0.013};  // degree 5
  for (int d = 0; d <= 3; ++d) {
    for (double x0 : {0.0, 0.4, 1.7, 2.6}) {
      const auto w = fd_weights(x0, nodes, d);
      REQUIRE(w.size() == nodes.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        acc += w[i] * poly(nodes[i], c);
      CHECK(acc == doctest::Approx(dpoly(x0, c, d)).epsilon(1e-10));
    }
  }
}

TEST_CASE("fd_weights of order 0 interpolate and sum to one") {
  const std::vector<double> nodes{0.0, 1.0, 2.5, 3.0};
  const auto w = fd_weights(1.4, nodes, 0);
  double sum = 0.0;
  for (double wi : w) sum += wi;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fd_weights(0.0, {1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("cubic_interp is exact on cubics and fourth order on smooth data") {
  const double x0 = 0.3, h = 0.05;
  const std::size_t n = 41;

  std::vector<double> cub(n);
  const std::vector<double> c{0.2, -1.1, 0.5, 0.75};
  for (std::size_t i = 0; i < n; ++i) cub[i] = poly(x0 + i * h, c);
  for (double xq : {x0, x0 + 0.013, x0 + 17.3 * h, x0 + (n - 1) * h}) {
    CHECK(cubic_interp(cub, x0, h, xq) ==
          doctest::Approx(poly(xq, c)).epsilon(1e-12));
  }

  // h-refinement on sin: error at a fixed off-node point drops ~16x.
  auto interp_err = [&](std::size_t m) {
    const double hh = 2.0 / static_cast<double>(m - 1);
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = std::sin(1.0 + i * hh);
    double emax = 0.0;
    for (int k = 0; k < 37; ++k) {
      const double xq = 1.0 + 2.0 * (k + 0.41) / 37.0 * 0.97;
      emax = std::max(emax,
                      std::abs(cubic_interp(f, 1.0, hh, xq) - std::sin(xq)));
    }
    return emax;
  };
  const double e1 = interp_err(65), e2 = interp_err(129);
  const double slope = std::log2(e1 / e2);
  CHECK(slope > 3.5);
  CHECK(slope < 4.6);
}

TEST_CASE("cubic_interp clamps one cell past the ends, then refuses") {
  const double x0 = 0.0, h = 0.1;
  std::vector<double> f(12);
  const std::vector<double> c{1.0, 2.0, -0.5, 0.25};
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = poly(x0 + i * h, c);

  // one-cell extrapolation uses the boundary stencil: still exact on cubics
  CHECK(cubic_interp(f, x0, h, -0.09) ==
        doctest::Approx(poly(-0.09, c)).epsilon(1e-11));
  CHECK(cubic_interp(f, x0, h, 1.1 + 0.09) ==
        doctest::Approx(poly(1.19, c)).epsilon(1e-11));
  CHECK_THROWS_AS(cubic_interp(f, x0, h, -0.11), OutOfDomain);
  CHECK_THROWS_AS(cubic_interp(f, x0, h, 1.22), OutOfDomain);
}

TEST_CASE("UniformFd is exact on quartics including the one-sided rows") {
  const std::size_t n = 17;
  const double h = 0.25;
  UniformFd fd(n, h);
  const std::vector<double> c{0.3, -1.0, 2.0, -0.4, 0.12};  // degree 4
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = poly(i * h, c);

  const auto du = fd.d1(u);
  const auto ddu = fd.d2(u);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(du[i] == doctest::Approx(dpoly(i * h, c, 1)).epsilon(1e-10));
    CHECK(ddu[i] == doctest::Approx(dpoly(i * h, c, 2)).epsilon(1e-9));
  }

  // in-place overloads agree with the returning ones
  std::vector<double> du2(n), ddu2(n);
  fd.d1(u, du2);
  fd.d2(u, ddu2);
  CHECK(du == du2);
  CHECK(ddu == ddu2);
}

TEST_CASE("UniformFd converges at fourth order on sin") {
  auto max_err = [](std::size_t n) {
    const double h = 3.0 / static_cast<double>(n - 1);
    UniformFd fd(n, h);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::sin(0.2 + i * h);
    const auto du = fd.d1(u);
    const auto ddu = fd.d2(u);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = 0.2 + i * h;
      e1 = std::max(e1, std::abs(du[i] - std::cos(x)));
      e2 = std::max(e2, std::abs(ddu[i] + std::sin(x)));
    }
    return std::pair<double, double>{e1, e2};
  };
  const auto [a1, a2] = max_err(101);
  const auto [b1, b2] = max_err(201);
  const double s1 = std::log2(a1 / b1);
  const double s2 = std::log2(a2 / b2);
  CHECK(s1 > 3.6);
  CHECK(s1 < 4.6);
  CHECK(s2 > 3.6);
  CHECK(s2 < 4.6);
}

TEST_CASE("radial grid is uniform in ln rho and validates its inputs") {
  const RadialGrid grid = build_radial_grid(0.5, 1000.0, 200, 3);
  CHECK(grid.n_nodes == 200);
  CHECK(grid.dimension == 3);
  CHECK(grid.nodes.front() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(grid.nodes.back() == doctest::Approx(1000.0).epsilon(1e-13));
  for (std::size_t i = 0; i + 1 < grid.n_nodes; ++i) {
    CHECK(grid.x[i + 1] - grid.x[i] == doctest::Approx(grid.h).epsilon(1e-12));
    CHECK(grid.x[i] == doctest::Approx(std::log(grid.nodes[i])).epsilon(1e-13));
  }
  CHECK_THROWS_AS(build_radial_grid(-1.0, 10.0, 64, 3), InvalidGrid);
  CHECK_THROWS_AS(build_radial_grid(2.0, 1.0, 64, 3), InvalidGrid);
  CHECK_THROWS_AS(build_radial_grid(0.5, 10.0, 3, 3), InvalidGrid);
  CHECK_THROWS_AS(build_radial_grid(0.5, 10.0, 64, 1), InvalidGrid);
}

//----------------------------------------------------------------------------
// Banded linear algebra
//----------------------------------------------------------------------------

namespace {

// Random diagonally dominant band matrix plus its dense mirror.
void random_band(std::size_t n, int kl, int ku, BandMatrix& A,
                 Eigen::MatrixXd& D, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  D = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (long long j = std::max<long long>(0, (long long)i - kl);
         j <= std::min<long long>(n - 1, (long long)i + ku); ++j) {
      if (j == (long long)i) continue;
      const double v = uni(rng);
      A.at(i, j) = v;
      D(i, j) = v;
      off += std::abs(v);
    }
    const double diag = off + 1.0 + std::abs(uni(rng));
    A.at(i, i) = diag;
    D(i, (long long)i) = diag;
  }
}

}  // namespace

TEST_CASE("band solve matches Eigen dense solve to 1e-12") {
  std::mt19937 rng(2024);
  for (auto [n, kl, ku] : {std::tuple<std::size_t, int, int>{16, 1, 1},
                           {64, 2, 3},
                           {128, 4, 2}}) {
    BandMatrix A(n, kl, ku);
    Eigen::MatrixXd D;
    random_band(n, kl, ku, A, D, rng);

    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> rhs(n);
    for (auto& v : rhs) v = uni(rng);
    Eigen::Map<const Eigen::VectorXd> rv(rhs.data(), n);

    // multiply against dense product before factorization
    std::vector<double> x0(n);
    for (auto& v : x0) v = uni(rng);
    const auto Ax = A.multiply(x0);
    Eigen::VectorXd Dx = D * Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(Ax[i] == doctest::Approx(Dx[i]).epsilon(1e-13));

    A.factor();
    CHECK(A.factored());
    CHECK(A.min_pivot() > 0.0);

    const auto x = A.solve(rhs);
    const Eigen::VectorXd xd = D.partialPivLu().solve(rv);
    const auto xt = A.solve_transpose(rhs);
    const Eigen::VectorXd xtd = D.transpose().partialPivLu().solve(rv);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(x[i] - xd[i]) <= 1e-12 * xd.norm());
      CHECK(std::abs(xt[i] - xtd[i]) <= 1e-12 * xtd.norm());
    }

    // multiply still uses the pristine coefficients after factor()
    const auto Ax2 = A.multiply(x0);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(Ax2[i] == doctest::Approx(Ax[i]).epsilon(1e-15));
  }
}

TEST_CASE("smallest_singular_value matches the Toeplitz closed form") {
  const std::size_t n = 40;
  BandMatrix A(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    A.at(i, i) = 2.0;
    if (i > 0) A.at(i, i - 1) = -1.0;
    if (i + 1 < n) A.at(i, i + 1) = -1.0;
  }
  A.factor();
  const double pi = 3.14159265358979323846;
  const double exact = 2.0 - 2.0 * std::cos(pi / (n + 1));
  CHECK(A.smallest_singular_value() ==
        doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("degenerate pivots raise NonInvertibleOperator") {
  BandMatrix A(2, 1, 1);
  A.at(0, 0) = 1.0;
  A.at(0, 1) = 1.0;
  A.at(1, 0) = 1.0;
  A.at(1, 1) = 1.0;  // second pivot cancels exactly
  CHECK_THROWS_AS(A.factor(), NonInvertibleOperator);

  BandMatrix Z(3, 0, 0);
  CHECK_THROWS_AS(Z.factor(), NonInvertibleOperator);  // zero matrix
}

TEST_CASE("band access rules: reads outside return zero, writes throw") {
  BandMatrix A(5, 1, 1);
  A.at(2, 2) = 3.0;
  CHECK(A.get(2, 2) == 3.0);
  CHECK(A.get(0, 4) == 0.0);
  CHECK_THROWS_AS(A.at(0, 4) = 1.0, InvalidGrid);

  A.at(0, 0) = A.at(1, 1) = A.at(3, 3) = A.at(4, 4) = 1.0;
  A.factor();
  CHECK_THROWS_AS(A.at(1, 1) = 2.0, NumericalBreakdown);
  std::vector<double> bad(4, 0.0);
  CHECK_THROWS_AS(A.solve(bad), InvalidGrid);
}
