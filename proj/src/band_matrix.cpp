#include "crflow/band_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crflow/errors.hpp"

namespace crflow {

BandMatrix::BandMatrix(std::size_t n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku) {
  if (n == 0 || kl < 0 || ku < 0)
    throw InvalidGrid("BandMatrix: need n > 0 and nonnegative bandwidths");
  data_.assign(n_ * width(), 0.0);
}

double& BandMatrix::at(std::size_t i, std::size_t j) {
  const long long off = static_cast<long long>(j) - static_cast<long long>(i);
  if (i >= n_ || j >= n_ || off < -kl_ || off > ku_)
    throw InvalidGrid("BandMatrix: write outside band at (" +
                      std::to_string(i) + "," + std::to_string(j) + ")");
  if (factored_)
    throw NumericalBreakdown("BandMatrix: write after factorization");
  return data_[idx(i, off)];
}

double BandMatrix::get(std::size_t i, std::size_t j) const {
  const long long off = static_cast<long long>(j) - static_cast<long long>(i);
  if (i >= n_ || j >= n_ || off < -kl_ || off > ku_) return 0.0;
  return (factored_ ? orig_ : data_)[idx(i, off)];
}

std::vector<double> BandMatrix::multiply(const std::vector<double>& x) const {
  const std::vector<double>& coef = factored_ ? orig_ : data_;
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const long long jlo = std::max<long long>(0, (long long)i - kl_);
    const long long jhi = std::min<long long>(n_ - 1, (long long)i + ku_);
    double acc = 0.0;
    for (long long j = jlo; j <= jhi; ++j)
      acc += coef[idx(i, j - (long long)i)] * x[(std::size_t)j];
    y[i] = acc;
  }
  return y;
}

void BandMatrix::factor(double pivot_threshold) {
  if (factored_) return;
  orig_ = data_;

  scale_ = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (long long off = -kl_; off <= ku_; ++off) {
      const long long j = (long long)i + off;
      if (j < 0 || j >= (long long)n_) continue;
      row += std::abs(data_[idx(i, off)]);
    }
    scale_ = std::max(scale_, row);
  }
  if (scale_ == 0.0)
    throw NonInvertibleOperator("BandMatrix: zero matrix");

  min_pivot_ = std::abs(data_[idx(0, 0)]);
  for (std::size_t k = 0; k < n_; ++k) {
    const double pivot = data_[idx(k, 0)];
    min_pivot_ = std::min(min_pivot_, std::abs(pivot));
    if (std::abs(pivot) < pivot_threshold * scale_)
      throw NonInvertibleOperator(
          "BandMatrix: pivot " + std::to_string(pivot) + " at row " +
          std::to_string(k) + " below threshold (scale " +
          std::to_string(scale_) + ")");
    const std::size_t ilast = std::min(n_ - 1, k + (std::size_t)kl_);
    for (std::size_t i = k + 1; i <= ilast && i < n_; ++i) {
      const long long offik = (long long)k - (long long)i;
      const double mult = data_[idx(i, offik)] / pivot;
      data_[idx(i, offik)] = mult;  // store L factor in place
      const std::size_t jlast = std::min(n_ - 1, k + (std::size_t)ku_);
      for (std::size_t j = k + 1; j <= jlast; ++j) {
        data_[idx(i, (long long)j - (long long)i)] -=
            mult * data_[idx(k, (long long)j - (long long)k)];
      }
    }
  }
  factored_ = true;
}

std::vector<double> BandMatrix::solve(const std::vector<double>& rhs) const {
  if (!factored_)
    throw NumericalBreakdown("BandMatrix::solve before factor()");
  if (rhs.size() != n_)
    throw InvalidGrid("BandMatrix::solve: rhs length mismatch");
  std::vector<double> x = rhs;
  // forward substitution, unit lower factor
  for (std::size_t i = 0; i < n_; ++i) {
    const long long klo = std::max<long long>(0, (long long)i - kl_);
    double acc = x[i];
    for (long long k = klo; k < (long long)i; ++k)
      acc -= data_[idx(i, k - (long long)i)] * x[(std::size_t)k];
    x[i] = acc;
  }
  // back substitution with U
  for (std::size_t ii = n_; ii-- > 0;) {
    const std::size_t i = ii;
    const long long khi = std::min<long long>(n_ - 1, (long long)i + ku_);
    double acc = x[i];
    for (long long k = (long long)i + 1; k <= khi; ++k)
      acc -= data_[idx(i, k - (long long)i)] * x[(std::size_t)k];
    x[i] = acc / data_[idx(i, 0)];
  }
  return x;
}

std::vector<double> BandMatrix::solve_transpose(
    const std::vector<double>& rhs) const {
  if (!factored_)
    throw NumericalBreakdown("BandMatrix::solve_transpose before factor()");
  if (rhs.size() != n_)
    throw InvalidGrid("BandMatrix::solve_transpose: rhs length mismatch");
  // A^T = U^T L^T: U^T is lower triangular, L^T unit upper triangular.
  std::vector<double> x = rhs;
  for (std::size_t i = 0; i < n_; ++i) {
    // (U^T)_{ik} = U_{ki} for k <= i within the band (i - k <= ku)
    const long long klo = std::max<long long>(0, (long long)i - ku_);
    double acc = x[i];
    for (long long k = klo; k < (long long)i; ++k)
      acc -= data_[idx((std::size_t)k, (long long)i - k)] * x[(std::size_t)k];
    x[i] = acc / data_[idx(i, 0)];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    const std::size_t i = ii;
    // (L^T)_{ik} = L_{ki} for k > i within the band (k - i <= kl)
    const long long khi = std::min<long long>(n_ - 1, (long long)i + kl_);
    double acc = x[i];
    for (long long k = (long long)i + 1; k <= khi; ++k)
      acc -= data_[idx((std::size_t)k, (long long)i - k)] * x[(std::size_t)k];
    x[i] = acc;
  }
  return x;
}

double BandMatrix::smallest_singular_value(int iterations) const {
  if (!factored_)
    throw NumericalBreakdown(
        "BandMatrix::smallest_singular_value before factor()");
  // Power iteration on (A^T A)^{-1}: each step solves A^T y = v, A x = y.
  std::vector<double> v(n_);
  for (std::size_t i = 0; i < n_; ++i)
    v[i] = 1.0 + 0.37 * std::sin(1.0 + 2.61 * (double)i);
  double norm = 0.0;
  for (double t : v) norm += t * t;
  norm = std::sqrt(norm);
  for (double& t : v) t /= norm;

  double growth = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> y = solve_transpose(v);
    std::vector<double> x = solve(y);
    double nx = 0.0;
    for (double t : x) nx += t * t;
    nx = std::sqrt(nx);
    if (!std::isfinite(nx) || nx == 0.0)
      throw NumericalBreakdown(
          "BandMatrix::smallest_singular_value: iteration collapsed");
    growth = nx;
    for (std::size_t i = 0; i < n_; ++i) v[i] = x[i] / nx;
  }
  return 1.0 / std::sqrt(growth);
}

}  // namespace crflow
