#include "crflow/gauge.hpp"

#include <cmath>
#include <string>

#include "crflow/curvature.hpp"
#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"

namespace crflow {

namespace {

void require_same_grid(const RadialMetric& g, const RadialMetric& g_ref,
                       const char* who) {
  const RadialGrid& ga = *g.grid;
  const RadialGrid& gb = *g_ref.grid;
  const bool same = ga.n_nodes == gb.n_nodes && ga.dimension == gb.dimension &&
                    ga.rho_min == gb.rho_min && ga.rho_max == gb.rho_max;
  if (!same)
    throw IncompatibleReference(std::string(who) +
                                ": reference metric lives on a different grid");
}

}  // namespace

RadialSymTensor trace_reversed(const RadialSymTensor& B,
                               const RadialMetric& g) {
  const std::vector<double> tr = radial_trace(B, g);
  RadialSymTensor out(B.size(), B.role);
  for (std::size_t i = 0; i < B.size(); ++i) {
    const double a = g.A[i] * g.A[i];
    const double b = g.B[i] * g.B[i];
    out.rr[i] = B.rr[i] - 0.5 * tr[i] * a;
    out.tt[i] = B.tt[i] - 0.5 * tr[i] * b;
  }
  return out;
}

FrameDiagTensor trace_reversed(const FrameDiagTensor& B,
                               const HomogeneousMetric& g) {
  const double tr = frame_trace(B, g);
  FrameDiagTensor out;
  out.role = B.role;
  for (int i = 0; i < 3; ++i) out.d[i] = B.d[i] - 0.5 * tr * g.coeff[i];
  return out;
}

std::vector<double> divergence(const RadialSymTensor& B,
                               const RadialMetric& g) {
  if (B.size() != g.size())
    throw InvalidGrid("divergence: tensor shape does not match grid");
  const std::size_t N = g.size();
  const double n = g.dimension() - 1;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> trx = fd.d1(B.rr);

  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g.grid->nodes[i];
    const double F1 = 1.0 + bx[i] / (2.0 * b[i]);
    out[i] = ((trx[i] - ax[i] / a[i] * B.rr[i]) / a[i] +
              n * F1 * (B.rr[i] / a[i] - B.tt[i] / b[i])) /
             rho;
  }
  return out;
}

std::array<double, 3> divergence(const FrameDiagTensor&,
                                 const HomogeneousMetric&) {
  return {{0.0, 0.0, 0.0}};
}

RadialSymTensor adjoint_divergence(const std::vector<double>& omega,
                                   const RadialMetric& g) {
  if (omega.size() != g.size())
    throw InvalidGrid("adjoint_divergence: one-form shape does not match grid");
  const std::size_t N = g.size();
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> wx = fd.d1(omega);

  RadialSymTensor out(N, TensorRole::GaugeTerm);
  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g.grid->nodes[i];
    out.rr[i] = -(wx[i] - ax[i] * omega[i] / (2.0 * a[i])) / rho;
    out.tt[i] = -(bx[i] + 2.0 * b[i]) * omega[i] / (2.0 * a[i] * rho);
  }
  return out;
}

RadialGaugeTerm deturck_gauge_term(const RadialMetric& g,
                                   const RadialMetric& g_ref) {
  require_same_grid(g, g_ref, "deturck_gauge_term");
  const std::size_t N = g.size();
  const double n = g.dimension() - 1;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const std::vector<double> ar = g_ref.a_profile();
  const std::vector<double> br = g_ref.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> arx = fd.d1(ar);
  const std::vector<double> brx = fd.d1(br);

  RadialGaugeTerm out;
  out.W.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g.grid->nodes[i];
    const double radial_part =
        (ax[i] / (2.0 * a[i]) - arx[i] / (2.0 * ar[i])) / a[i];
    const double angular_part =
        n / b[i] *
        ((brx[i] + 2.0 * br[i]) / (2.0 * ar[i]) -
         (bx[i] + 2.0 * b[i]) / (2.0 * a[i]));
    out.W[i] = (radial_part + angular_part) / rho;
  }
  out.lie_wg = lie_derivative_metric(out.W, g);
  return out;
}

FrameGaugeTerm deturck_gauge_term(const HomogeneousMetric& g,
                                  const HomogeneousMetric& g_ref) {
  if (g.lambda != g_ref.lambda)
    throw IncompatibleReference(
        "deturck_gauge_term: reference metric has different structure "
        "constants");
  FrameGaugeTerm out;
  out.lie_wg.role = TensorRole::GaugeTerm;
  return out;
}

RadialSymTensor lie_derivative_metric(const std::vector<double>& w,
                                      const RadialMetric& g) {
  if (w.size() != g.size())
    throw InvalidGrid(
        "lie_derivative_metric: vector shape does not match grid");
  const std::size_t N = g.size();
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> wx = fd.d1(w);

  RadialSymTensor out(N, TensorRole::GaugeTerm);
  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g.grid->nodes[i];
    out.rr[i] = (w[i] * ax[i] + 2.0 * a[i] * wx[i]) / rho;
    out.tt[i] = w[i] * (bx[i] + 2.0 * b[i]) / rho;
  }
  return out;
}

RadialGaugeOperators operator_G_and_divergence(
    const RadialSymTensor& B, const RadialMetric& g,
    const std::vector<double>& omega) {
  RadialGaugeOperators out{trace_reversed(B, g), divergence(B, g),
                           adjoint_divergence(omega, g)};
  return out;
}

FrameGaugeOperators operator_G_and_divergence(const FrameDiagTensor& B,
                                              const HomogeneousMetric& g) {
  FrameGaugeOperators out;
  out.trace_reversal = trace_reversed(B, g);
  out.divergence = divergence(B, g);
  return out;
}

}  // namespace crflow
