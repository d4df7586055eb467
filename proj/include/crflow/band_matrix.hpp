#ifndef CRFLOW_BAND_MATRIX_HPP
#define CRFLOW_BAND_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace crflow {

//----------------------------------------------------------------------------
// Banded matrix with kl sub- and ku super-diagonals, factored in place by
// Gaussian elimination without pivoting (band structure is preserved; the
// discretized radial operators are strongly diagonally dominated, and a
// degenerate pivot is exactly the resonance signal we want to detect).
//----------------------------------------------------------------------------

class BandMatrix {
 public:
  BandMatrix(std::size_t n, int kl, int ku);

  std::size_t size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  /// Entry access; reads outside the band return 0, writes outside throw.
  double& at(std::size_t i, std::size_t j);
  double get(std::size_t i, std::size_t j) const;

  /// y = A x using the unfactored coefficients (valid also after factor()).
  std::vector<double> multiply(const std::vector<double>& x) const;

  /// LU factorization without pivoting.  Throws NonInvertibleOperator when a
  /// pivot magnitude falls below pivot_threshold * scale(), where scale() is
  /// the max absolute row sum of the original matrix.
  void factor(double pivot_threshold = 1e-12);
  bool factored() const { return factored_; }
  double min_pivot() const { return min_pivot_; }
  double scale() const { return scale_; }

  /// Solve A x = rhs (requires factor()).
  std::vector<double> solve(const std::vector<double>& rhs) const;
  /// Solve A^T x = rhs (requires factor()).
  std::vector<double> solve_transpose(const std::vector<double>& rhs) const;

  /// Smallest-singular-value estimate by inverse iteration on (A^T A)^{-1}
  /// (requires factor()); deterministic start vector, fixed iteration count.
  double smallest_singular_value(int iterations = 40) const;

 private:
  std::size_t idx(std::size_t i, long long off) const {
    return i * width() + static_cast<std::size_t>(off + kl_);
  }
  std::size_t width() const { return static_cast<std::size_t>(kl_ + ku_ + 1); }

  std::size_t n_;
  int kl_, ku_;
  std::vector<double> data_;  // LU factors after factor()
  std::vector<double> orig_;  // pristine copy, kept for multiply()/scale
  bool factored_ = false;
  double min_pivot_ = 0.0;
  double scale_ = 0.0;
};

}  // namespace crflow

#endif  // CRFLOW_BAND_MATRIX_HPP
