// Gauge-fixing operators: trace reversal, divergence and its adjoint, the
// DeTurck vector field, and the Lie-derivative term.  Oracles: the chart
// Christoffel engine, closed-form Lie derivatives, and exact integration by
// parts on compactly supported data.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "crflow/diagnostics.hpp"
#include "crflow/errors.hpp"
#include "crflow/gauge.hpp"
#include "crflow/metrics.hpp"
#include "crflow/radial_grid.hpp"
#include "oracles/chart_engine.hpp"

using namespace crflow;

namespace {

std::shared_ptr<const RadialGrid> shared_grid(double lo, double hi,
                                              std::size_t n, int m) {
  return std::make_shared<const RadialGrid>(build_radial_grid(lo, hi, n, m));
}

RadialMetric bump_metric(const std::shared_ptr<const RadialGrid>& grid) {
  std::vector<double> A(grid->n_nodes), B(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double x = grid->x[i];
    A[i] = 1.0 + 0.2 * std::exp(-0.5 * (x - 1.2) * (x - 1.2) / 0.36);
    B[i] = 1.0 - 0.15 * std::exp(-0.5 * (x - 1.8) * (x - 1.8) / 0.49);
  }
  return make_radial_metric(grid, std::move(A), std::move(B), 0.0);
}

}  // namespace

TEST_CASE("trace reversal: G(B) = B - (1/2) tr(B) g on both classes") {
  const auto grid = shared_grid(0.5, 50.0, 128, 3);
  const auto g = bump_metric(grid);
  const auto a = g.a_profile();
  const auto b = g.b_profile();

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  RadialSymTensor B(grid->n_nodes, TensorRole::MetricPerturbation);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    B.rr[i] = uni(rng);
    B.tt[i] = uni(rng);
  }
  const auto tr = radial_trace(B, g);
  const auto G = trace_reversed(B, g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(G.rr[i] ==
          doctest::Approx(B.rr[i] - 0.5 * tr[i] * a[i]).epsilon(1e-13));
    CHECK(G.tt[i] ==
          doctest::Approx(B.tt[i] - 0.5 * tr[i] * b[i]).epsilon(1e-13));
  }
  // trace of the reversal: (1 - m/2) tr(B)
  const auto trG = radial_trace(G, g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i)
    CHECK(trG[i] == doctest::Approx(-0.5 * tr[i]).epsilon(1e-12));

  const auto hg = make_homogeneous_metric({0.8, 1.3, 2.1}, 1.7);
  FrameDiagTensor T;
  T.d = {0.4, -1.1, 0.6};
  const double trT = frame_trace(T, hg);
  const auto GT = trace_reversed(T, hg);
  for (int i = 0; i < 3; ++i)
    CHECK(GT.d[i] ==
          doctest::Approx(T.d[i] - 0.5 * trT * hg.coeff[i]).epsilon(1e-14));
}

TEST_CASE("DeTurck vector matches the chart Christoffel contraction") {
  // g = w^4 g_e against the flat reference; the chart engine evaluates
  // W^k = g^ij Gamma^k_ij in Cartesian coordinates, where the flat
  // reference contributes nothing.
  const auto grid = shared_grid(0.5, 50.0, 512, 3);
  const double c = 0.3;
  std::vector<double> A(grid->n_nodes), B(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double w = 1.0 + 0.5 * c / grid->nodes[i];
    A[i] = B[i] = w * w;
  }
  const auto g = make_radial_metric(grid, std::move(A), std::move(B), 1.0);
  const auto ref = flat_radial_metric(grid);
  const auto term = deturck_gauge_term(g, ref);

  const auto gfn = oracle::radial_chart_metric(
      3,
      [&](double r) { const double w = 1.0 + 0.5 * c / r; return std::pow(w, 4.0); },
      [&](double r) { const double w = 1.0 + 0.5 * c / r; return std::pow(w, 4.0); });

  for (std::size_t i : {std::size_t(180), std::size_t(250), std::size_t(330),
                        std::size_t(400)}) {
    const double rho = grid->nodes[i];
    const auto gam = oracle::chart_christoffel(gfn, {rho, 0.0, 0.0}, 0.005 * rho);
    auto G = [&](int a2, int b2, int c2) { return gam[(a2 * 3 + b2) * 3 + c2]; };
    const double w = 1.0 + 0.5 * c / rho;
    const double ginv = 1.0 / std::pow(w, 4.0);
    const double W_chart = ginv * (G(0, 0, 0) + G(0, 1, 1) + G(0, 2, 2));
    CHECK(std::abs(term.W[i] - W_chart) < 1e-8);  // measured 4.2e-12
  }
}

TEST_CASE("DeTurck term satisfies 2 delta*((g_ref^-1 delta G(g_ref))^flat) = L_W g") {
  const auto grid = shared_grid(0.5, 50.0, 512, 3);
  const auto g = bump_metric(grid);
  std::vector<double> Ar(grid->n_nodes), Br(grid->n_nodes, 1.0);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    const double x = grid->x[i];
    Ar[i] = 1.0 + 0.1 * std::exp(-0.5 * (x - 1.5) * (x - 1.5) / 0.25);
  }
  const auto g_ref = make_radial_metric(grid, std::move(Ar), std::move(Br), 0.0);

  RadialSymTensor reft(grid->n_nodes, TensorRole::MetricPerturbation);
  reft.rr = g_ref.a_profile();
  reft.tt = g_ref.b_profile();
  const auto a = g.a_profile();
  const auto a_ref = g_ref.a_profile();

  const auto Gt = trace_reversed(reft, g);
  const auto dv = divergence(Gt, g);
  std::vector<double> theta(grid->n_nodes);
  for (std::size_t i = 0; i < grid->n_nodes; ++i)
    theta[i] = dv[i] * a[i] / a_ref[i];  // raise with g_ref, lower with g
  const auto ds = adjoint_divergence(theta, g);

  const auto term = deturck_gauge_term(g, g_ref);
  double scale = 1.0;
  for (std::size_t i = 0; i < grid->n_nodes; ++i)
    scale = std::max({scale, std::abs(term.lie_wg.rr[i]),
                      std::abs(term.lie_wg.tt[i])});
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(std::abs(2.0 * ds.rr[i] - term.lie_wg.rr[i]) <= 1e-6 * scale);
    CHECK(std::abs(2.0 * ds.tt[i] - term.lie_wg.tt[i]) <= 1e-6 * scale);
  }

  // the bundled operators agree with the individual calls
  // (the bundle's divergence is of B itself, not of its trace reversal)
  const auto ops = operator_G_and_divergence(reft, g, theta);
  const auto div_reft = divergence(reft, g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(ops.trace_reversal.rr[i] == Gt.rr[i]);
    CHECK(ops.divergence[i] == div_reft[i]);
    CHECK(ops.adjoint_of_oneform.rr[i] == ds.rr[i]);
    CHECK(ops.adjoint_of_oneform.tt[i] == ds.tt[i]);
  }

  // identical metric and reference: the gauge term vanishes
  const auto zero_term = deturck_gauge_term(g, g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(std::abs(zero_term.W[i]) < 1e-13);
    CHECK(std::abs(zero_term.lie_wg.rr[i]) < 1e-12);
  }
}

TEST_CASE("delta* is the formal adjoint of the divergence") {
  // compactly supported omega and B: integration by parts has no boundary
  // terms, so int <delta* omega, B> dvol = int <omega, delta B> dvol.
  const auto grid = shared_grid(0.5, 50.0, 512, 3);
  const auto g = bump_metric(grid);
  const auto a = g.a_profile();
  const auto b = g.b_profile();
  const std::size_t n = grid->n_nodes;

  std::vector<double> omega(n);
  RadialSymTensor B(n, TensorRole::MetricPerturbation);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid->x[i];
    omega[i] = std::exp(-0.5 * (x - 1.5) * (x - 1.5) / 0.1);
    B.rr[i] = 0.7 * std::exp(-0.5 * (x - 1.6) * (x - 1.6) / 0.1);
    B.tt[i] = -0.4 * std::exp(-0.5 * (x - 1.4) * (x - 1.4) / 0.12);
  }
  const auto dstar = adjoint_divergence(omega, g);
  const auto dB = divergence(B, g);
  std::vector<double> f1(n), f2(n);
  for (std::size_t i = 0; i < n; ++i) {
    f1[i] = dstar.rr[i] * B.rr[i] / (a[i] * a[i]) +
            2.0 * dstar.tt[i] * B.tt[i] / (b[i] * b[i]);
    f2[i] = omega[i] * dB[i] / a[i];
  }
  const double I1 = volume_integral(g, f1);
  const double I2 = volume_integral(g, f2);
  CHECK(std::abs(I1 - I2) <= 1e-6 * std::max(1.0, std::abs(I1)));
}

TEST_CASE("Lie derivative closed form on the flat metric") {
  const auto grid = shared_grid(0.5, 50.0, 512, 3);
  const auto g = flat_radial_metric(grid);
  const std::size_t n = grid->n_nodes;

  // w = rho e(x), e a Gaussian in x: dw/drho = e + e_x
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid->x[i];
    w[i] = grid->nodes[i] * std::exp(-0.5 * (x - 1.5) * (x - 1.5) / 0.3);
  }
  const auto lie = lie_derivative_metric(w, g);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid->x[i];
    const double e = std::exp(-0.5 * (x - 1.5) * (x - 1.5) / 0.3);
    const double dw = e + e * (-(x - 1.5) / 0.3);
    CHECK(std::abs(lie.rr[i] - 2.0 * dw) < 1e-6);       // w a' + 2 a w'
    CHECK(std::abs(lie.tt[i] - 2.0 * w[i] / grid->nodes[i]) < 1e-12);
  }
}

TEST_CASE("DeTurck lie term is the Lie derivative of its own vector") {
  const auto grid = shared_grid(0.5, 50.0, 256, 3);
  const auto g = bump_metric(grid);
  const auto ref = flat_radial_metric(grid);
  const auto term = deturck_gauge_term(g, ref);
  const auto lie = lie_derivative_metric(term.W, g);
  for (std::size_t i = 0; i < grid->n_nodes; ++i) {
    CHECK(std::abs(lie.rr[i] - term.lie_wg.rr[i]) < 1e-12);
    CHECK(std::abs(lie.tt[i] - term.lie_wg.tt[i]) < 1e-12);
  }
}

TEST_CASE("homogeneous class: W vanishes, divergence vanishes") {
  const auto g = make_homogeneous_metric({0.7, 1.9, 2.4}, 2.0);
  const auto ref = make_homogeneous_metric({1.0, 1.0, 1.0}, 2.0);
  const auto term = deturck_gauge_term(g, ref);
  for (int i = 0; i < 3; ++i) {
    CHECK(term.W[i] == 0.0);
    CHECK(term.lie_wg.d[i] == 0.0);
  }

  FrameDiagTensor T;
  T.d = {1.2, -0.3, 0.9};
  const auto div = divergence(T, g);
  for (int i = 0; i < 3; ++i) CHECK(div[i] == 0.0);

  const auto ops = operator_G_and_divergence(T, g);
  const double tr = frame_trace(T, g);
  for (int i = 0; i < 3; ++i) {
    CHECK(ops.trace_reversal.d[i] ==
          doctest::Approx(T.d[i] - 0.5 * tr * g.coeff[i]).epsilon(1e-14));
    CHECK(ops.divergence[i] == 0.0);
  }
}

TEST_CASE("mismatched grids are rejected") {
  const auto grid1 = shared_grid(0.5, 50.0, 128, 3);
  const auto grid2 = shared_grid(0.5, 50.0, 256, 3);
  const auto g1 = flat_radial_metric(grid1);
  const auto g2 = flat_radial_metric(grid2);
  CHECK_THROWS_AS(deturck_gauge_term(g1, g2), IncompatibleReference);
}
