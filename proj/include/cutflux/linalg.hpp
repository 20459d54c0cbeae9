#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

namespace cutflux {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed-row sparse matrix. Immutable once assembled.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values, bool symmetric);

  int size() const { return n_; }
  int nonzeros() const { return static_cast<int>(values_.size()); }
  bool symmetric() const { return symmetric_; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  double entry(int i, int j) const;
  std::vector<double> diagonal() const;
  double max_abs() const;
  /// max |A_ij - A_ji| over stored entries.
  double max_asymmetry() const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  Eigen::MatrixXd to_dense() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// Sums duplicates. The result does not depend on the order of `triplets`:
/// duplicates are reduced in sorted (row, col, value) order.
SparseMatrix assemble(std::span<const Triplet> triplets, int n, bool symmetric = false);

struct SolveReport {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

inline constexpr double kDefaultSolverTolerance = 1e-10;

/// Jacobi-preconditioned conjugate gradients; stops when
/// ||A x - b|| <= tol ||b||. At most 20 n iterations, otherwise
/// solver-failure carrying the final relative residual.
SolveReport solve_spd(const SparseMatrix& a, std::span<const double> b, double tol = kDefaultSolverTolerance);

enum class DenseMode { square, least_squares };

struct DenseSolution {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - b||
  int rank = 0;
};

/// Square mode: full-pivot LU, singular-system when a pivot falls below
/// 1e-12 ||A||. Least-squares mode: minimum-norm solution through a complete
/// orthogonal decomposition.
DenseSolution solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, DenseMode mode);

/// lambda_max / lambda_min (in magnitude) of a symmetric matrix: power
/// iteration for the largest, inverse power iteration with a dense LDLT for
/// the smallest. Meant for diagnostics on small systems.
double condition_estimate(const SparseMatrix& a, int max_iterations = 2000);

/// "row col value" per line, 0-based.
void write_coordinate(const SparseMatrix& a, std::ostream& out);

}  // namespace cutflux
