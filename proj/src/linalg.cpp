#include "cutflux/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SparseMatrix::SparseMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values,
                           bool symmetric)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)), symmetric_(symmetric) {}

double SparseMatrix::entry(int i, int j) const {
  const auto first = cols_.begin() + row_ptr_[i];
  const auto last = cols_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = entry(i, i);
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::max_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) m = std::max(m, std::abs(values_[k] - entry(cols_[k], i)));
  }
  return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, cols_[k]) = values_[k];
  }
  return d;
}

SparseMatrix assemble(std::span<const Triplet> triplets, int n, bool symmetric) {
  if (n < 0) throw Error(ErrorKind::invalid_argument, "negative dimension");
  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  for (const auto& t : sorted) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw Error(ErrorKind::invalid_argument, "triplet index out of range");
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });
  std::vector<int> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> cols;
  std::vector<double> values;
  for (std::size_t k = 0; k < sorted.size();) {
    const int r = sorted[k].row, c = sorted[k].col;
    double s = 0.0;
    for (; k < sorted.size() && sorted[k].row == r && sorted[k].col == c; ++k) s += sorted[k].value;
    cols.push_back(c);
    values.push_back(s);
    ++row_ptr[static_cast<std::size_t>(r) + 1];
  }
  for (int i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(values), symmetric);
}

SolveReport solve_spd(const SparseMatrix& a, std::span<const double> b, double tol) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n) throw Error(ErrorKind::invalid_argument, "right-hand side size mismatch");
  if (a.symmetric()) {
    const double asym = a.max_asymmetry();
    if (asym > 1e-12 * a.max_abs()) throw Error(ErrorKind::invalid_argument, "matrix flagged symmetric is not", asym);
  }
  SolveReport rep;
  rep.x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return rep;

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw Error(ErrorKind::invalid_argument, "non-positive diagonal entry in SPD solve", d);
    d = 1.0 / d;
  }
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  const int cap = std::max(20 * n, 20);
  double rel = 1.0;
  for (int it = 1; it <= cap; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw Error(ErrorKind::solver_failure, "matrix is not positive definite", rel);
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      rep.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rel = std::sqrt(dot(r, r)) / bnorm;
    rep.iterations = it;
    if (rel <= tol) {
      // Confirm against the true residual; recurrences drift on hard systems.
      std::vector<double> ax = a * std::span<const double>(rep.x);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += (b[i] - ax[i]) * (b[i] - ax[i]);
      rel = std::sqrt(s) / bnorm;
      if (rel <= tol) {
        rep.relative_residual = rel;
        return rep;
      }
      for (int i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(ErrorKind::solver_failure,
              "conjugate gradients did not converge in " + std::to_string(cap) + " iterations", rel);
}

DenseSolution solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, DenseMode mode) {
  if (!a.allFinite() || !b.allFinite()) throw Error(ErrorKind::invalid_argument, "non-finite dense system");
  if (a.rows() != b.size()) throw Error(ErrorKind::invalid_argument, "dense system size mismatch");
  DenseSolution sol;
  const double anorm = a.cwiseAbs().maxCoeff();
  if (mode == DenseMode::square) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::invalid_argument, "square mode needs a square matrix");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
    const double min_pivot = a.rows() > 0 ? u.diagonal().cwiseAbs().minCoeff() : 0.0;
    const double max_pivot = a.rows() > 0 ? u.diagonal().cwiseAbs().maxCoeff() : 0.0;
    if (a.rows() > 0 && (anorm == 0.0 || min_pivot < 1e-12 * anorm)) {
      const double cond = min_pivot > 0.0 ? max_pivot / min_pivot : std::numeric_limits<double>::infinity();
      throw Error(ErrorKind::singular_system, "pivot below 1e-12 ||A||", cond);
    }
    sol.x = lu.solve(b);
    sol.rank = static_cast<int>(a.rows());
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-12);
    cod.compute(a);
    sol.x = cod.solve(b);
    sol.rank = static_cast<int>(cod.rank());
  }
  sol.residual = (a * sol.x - b).norm();
  return sol;
}

double condition_estimate(const SparseMatrix& a, int max_iterations) {
  const int n = a.size();
  if (n == 0) return 1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  std::vector<double> y(n);
  double lmax = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    a.multiply(std::span<const double>(v.data(), n), y);
    const Eigen::Map<Eigen::VectorXd> w(y.data(), n);
    const double l = w.norm();
    if (l == 0.0) return std::numeric_limits<double>::infinity();
    v = w / l;
    if (std::abs(l - lmax) <= 1e-10 * l) {
      lmax = l;
      break;
    }
    lmax = l;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a.to_dense());
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n).normalized();
  double inv_min = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd w = ldlt.solve(u);
    const double l = w.norm();
    if (!std::isfinite(l)) return std::numeric_limits<double>::infinity();
    u = w / l;
    if (std::abs(l - inv_min) <= 1e-10 * l) {
      inv_min = l;
      break;
    }
    inv_min = l;
  }
  return lmax * inv_min;
}

void write_coordinate(const SparseMatrix& a, std::ostream& out) {
  out.precision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < a.size(); ++i) {
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) out << i << ' ' << a.cols()[k] << ' ' << a.values()[k] << '\n';
  }
}

}  // namespace cutflux
