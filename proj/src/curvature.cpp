#include "crflow/curvature.hpp"

#include <cmath>
#include <string>

#include "crflow/errors.hpp"
#include "crflow/finite_diff.hpp"

namespace crflow {

namespace {

void require_shape(const RadialSymTensor& T, const RadialMetric& g,
                   const char* who) {
  if (T.size() != g.size())
    throw InvalidGrid(std::string(who) + ": tensor shape does not match grid");
}

void check_finite(const std::vector<double>& v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalBreakdown(std::string(who) + ": non-finite value");
}

int third_index(int i, int j) { return 3 - i - j; }

}  // namespace

//----------------------------------------------------------------------------
// Tensor algebra
//----------------------------------------------------------------------------

std::vector<double> radial_trace(const RadialSymTensor& T,
                                 const RadialMetric& g) {
  require_shape(T, g, "radial_trace");
  const double n = g.dimension() - 1;
  std::vector<double> tr(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double a = g.A[i] * g.A[i];
    const double b = g.B[i] * g.B[i];
    tr[i] = T.rr[i] / a + n * T.tt[i] / b;
  }
  return tr;
}

std::vector<double> radial_norm_sq(const RadialSymTensor& T,
                                   const RadialMetric& g) {
  require_shape(T, g, "radial_norm_sq");
  const double n = g.dimension() - 1;
  std::vector<double> out(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double a = g.A[i] * g.A[i];
    const double b = g.B[i] * g.B[i];
    const double ur = T.rr[i] / a;
    const double ut = T.tt[i] / b;
    out[i] = ur * ur + n * ut * ut;
  }
  return out;
}

double frame_trace(const FrameDiagTensor& T, const HomogeneousMetric& g) {
  double tr = 0.0;
  for (int i = 0; i < 3; ++i) tr += T.d[i] / g.coeff[i];
  return tr;
}

double frame_norm_sq(const FrameDiagTensor& T, const HomogeneousMetric& g) {
  double out = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double u = T.d[i] / g.coeff[i];
    out += u * u;
  }
  return out;
}

//----------------------------------------------------------------------------
// Radial curvature
//----------------------------------------------------------------------------

RadialCurvature ricci_radial(const RadialMetric& g, double s0) {
  const std::size_t N = g.size();
  const int m = g.dimension();
  const double n = m - 1;

  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> bxx = fd.d2(b);

  RadialCurvature out;
  out.s0 = s0;
  out.ricci = RadialSymTensor(N, TensorRole::Curvature);
  out.scalar.resize(N);
  out.ric_norm_sq.resize(N);

  for (std::size_t i = 0; i < N; ++i) {
    const double rho = g.grid->nodes[i];
    const double rho2 = rho * rho;
    const double F1 = 1.0 + bx[i] / (2.0 * b[i]);
    const double rel = bx[i] / b[i];
    const double F2 = F1 * F1 + 0.5 * bxx[i] / b[i] - 0.5 * rel * rel;

    const double ric_rr =
        -(n / rho2) * (F2 - F1 * (1.0 + ax[i] / (2.0 * a[i])));
    const double ric_ang = (n - 1.0) * (1.0 - b[i] * F1 * F1 / a[i]) -
                           b[i] * (F2 - F1) / a[i] +
                           b[i] * F1 * ax[i] / (2.0 * a[i] * a[i]);

    out.ricci.rr[i] = ric_rr;
    out.ricci.tt[i] = ric_ang / rho2;
    out.scalar[i] = ric_rr / a[i] + n * ric_ang / (b[i] * rho2);
    const double ur = ric_rr / a[i];
    const double ut = out.ricci.tt[i] / b[i];
    out.ric_norm_sq[i] = ur * ur + n * ut * ut;
  }

  check_finite(out.scalar, "ricci_radial");

  RadialDeviation dev = einstein_deviation(out, g, s0);
  out.deviation = std::move(dev.E);
  out.deviation_norm_sq = std::move(dev.norm_sq);
  return out;
}

//----------------------------------------------------------------------------
// Homogeneous curvature
//----------------------------------------------------------------------------

FrameCurvature curvature_homogeneous(const HomogeneousMetric& g, double s0) {
  const double l2 = g.lambda * g.lambda;
  const double x1 = g.coeff[0], x2 = g.coeff[1], x3 = g.coeff[2];
  const double prod = x1 * x2 * x3;

  FrameCurvature out;
  out.s0 = s0;
  out.ricci.role = TensorRole::Curvature;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double xi = g.coeff[i], xj = g.coeff[j], xk = g.coeff[k];
    const double rhat = l2 * (xi * xi - (xj - xk) * (xj - xk)) / (2.0 * prod);
    out.ricci.d[i] = xi * rhat;
    out.scalar += rhat;
    out.ric_norm_sq += rhat * rhat;
    if (!std::isfinite(rhat))
      throw NumericalBreakdown("curvature_homogeneous: non-finite curvature");
  }

  FrameDeviation dev = einstein_deviation(out, g, s0);
  out.deviation = dev.E;
  out.deviation_norm_sq = dev.norm_sq;
  return out;
}

double homogeneous_sectional_numerator(const HomogeneousMetric& g, int i,
                                       int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2)
    throw UnsupportedGeometry(
        "homogeneous_sectional_numerator: frame index out of range");
  if (i == j) return 0.0;
  const int k = third_index(i, j);
  const double u = g.coeff[i], v = g.coeff[j], w = g.coeff[k];
  const double l2 = g.lambda * g.lambda;
  // <R(e_i,e_j)e_j,e_i> = lambda^2 [2w(u+v) - 3w^2 + (u-v)^2] / (4w)
  return l2 * (2.0 * w * (u + v) - 3.0 * w * w + (u - v) * (u - v)) /
         (4.0 * w);
}

FrameDiagTensor homogeneous_tensor_laplacian(const HomogeneousMetric& g,
                                             const FrameDiagTensor& T) {
  const double l2 = g.lambda * g.lambda;
  FrameDiagTensor out;
  out.role = T.role;
  for (int i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (a == i) continue;
      const int k = third_index(a, i);
      const double xi = g.coeff[i], xa = g.coeff[a], xk = g.coeff[k];
      const double D = xi + xk - xa;
      acc += l2 * D * D / (2.0 * xa * xk) * (T.d[k] / xk - T.d[i] / xi);
    }
    out.d[i] = acc;
  }
  return out;
}

//----------------------------------------------------------------------------
// Einstein deviation
//----------------------------------------------------------------------------

RadialDeviation einstein_deviation(const RadialCurvature& curv,
                                   const RadialMetric& g, double s0) {
  require_shape(curv.ricci, g, "einstein_deviation");
  const std::size_t N = g.size();
  const double m = g.dimension();
  const double n = m - 1.0;

  RadialDeviation dev;
  dev.E = RadialSymTensor(N, TensorRole::Curvature);
  dev.norm_sq.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double a = g.A[i] * g.A[i];
    const double b = g.B[i] * g.B[i];
    dev.E.rr[i] = curv.ricci.rr[i] - (s0 / m) * a;
    dev.E.tt[i] = curv.ricci.tt[i] - (s0 / m) * b;
    const double ur = dev.E.rr[i] / a;
    const double ut = dev.E.tt[i] / b;
    dev.norm_sq[i] = ur * ur + n * ut * ut;
  }
  return dev;
}

FrameDeviation einstein_deviation(const FrameCurvature& curv,
                                  const HomogeneousMetric& g, double s0) {
  FrameDeviation dev;
  dev.E.role = TensorRole::Curvature;
  for (int i = 0; i < 3; ++i) {
    dev.E.d[i] = curv.ricci.d[i] - (s0 / 3.0) * g.coeff[i];
    const double u = dev.E.d[i] / g.coeff[i];
    dev.norm_sq += u * u;
  }
  return dev;
}

std::vector<double> laplacian_radial(const RadialMetric& g,
                                     const std::vector<double>& f) {
  const std::size_t N = g.size();
  if (f.size() != N)
    throw InvalidGrid("laplacian_radial: field shape does not match grid");
  const int n = g.dimension() - 1;
  const std::vector<double> a = g.a_profile();
  const std::vector<double> b = g.b_profile();
  const UniformFd fd(N, g.grid->h);
  const std::vector<double> ax = fd.d1(a);
  const std::vector<double> bx = fd.d1(b);
  const std::vector<double> fx = fd.d1(f);
  const std::vector<double> fxx = fd.d2(f);

  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double gamma =
        n * (1.0 + bx[i] / (2.0 * b[i])) - ax[i] / (2.0 * a[i]) - 1.0;
    const double rho = g.grid->nodes[i];
    out[i] = (fxx[i] + gamma * fx[i]) / (a[i] * rho * rho);
  }
  return out;
}

}  // namespace crflow
