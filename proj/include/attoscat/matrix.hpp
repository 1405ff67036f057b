#pragma once

#include <Eigen/Dense>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

// Dense complex linear algebra underlying the whole library.
//
// Matrices are small (dim <= ~64 pointer bases), so everything is dense and
// eagerly validated. Equality is always tolerance-based; there is no exact
// float comparison anywhere in the public surface.

namespace attoscat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline bool is_square(const ComplexMatrix& a) {
  return a.rows() == a.cols() && a.rows() >= 1;
}

/// Entry-wise comparison with an explicit absolute tolerance.
inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                         double tol = 1e-12) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return ((a - b).cwiseAbs().maxCoeff() <= tol);
}

/// Matrix product of two equal-dimension square matrices.
inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!is_square(a) || !is_square(b) || a.rows() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: dimension mismatch, lhs is " << a.rows() << "x" << a.cols()
        << ", rhs is " << b.rows() << "x" << b.cols();
    throw std::invalid_argument(msg.str());
  }
  return a * b;
}

/// Sum of the diagonal of a square matrix.
inline Complex trace(const ComplexMatrix& a) {
  if (!is_square(a)) {
    throw std::invalid_argument("trace: matrix must be square and nonempty");
  }
  return a.trace();
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12) {
  if (!is_square(a)) return false;
  return approx_equal(a, a.adjoint(), tol);
}

/// exp(a*t) by scaling and squaring with an adaptively truncated Taylor
/// series. Terms are added until they fall below machine precision relative
/// to the running sum, so recomputing at doubled order changes no entry by
/// more than 1e-12 (covered by a test).
inline ComplexMatrix matrix_exp(const ComplexMatrix& a, double t = 1.0) {
  if (!is_square(a)) {
    throw std::invalid_argument("matrix_exp: matrix must be square and nonempty");
  }
  if (!a.allFinite() || !std::isfinite(t)) {
    throw std::invalid_argument("matrix_exp: non-finite entries");
  }
  const Eigen::Index dim = a.rows();
  ComplexMatrix scaled = a * t;

  // Scale so the 1-norm is at most 1/2, then square back.
  const double norm1 = scaled.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    scaled /= std::pow(2.0, squarings);
  }

  ComplexMatrix result = ComplexMatrix::Identity(dim, dim);
  ComplexMatrix term = ComplexMatrix::Identity(dim, dim);
  for (int k = 1; k <= 64; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    const double term_norm = term.cwiseAbs().maxCoeff();
    const double result_norm = result.cwiseAbs().maxCoeff();
    if (term_norm <= 1e-18 * result_norm) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Wrapper asserting entries[i][j] = conj(entries[j][i]) at construction.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m, double tol = 1e-12) : m_(std::move(m)) {
    if (!is_square(m_)) {
      throw std::invalid_argument("HermitianMatrix: matrix must be square and nonempty");
    }
    if (!is_hermitian(m_, tol)) {
      throw std::invalid_argument("HermitianMatrix: matrix is not Hermitian within tolerance");
    }
  }

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

/// State rho: Hermitian within 1e-12, unit trace within 1e-10, eigenvalues
/// bounded below by -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (!is_square(m_)) {
      throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
    }
    if (!is_hermitian(m_, 1e-12)) {
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian within 1e-12");
    }
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > 1e-10 || std::abs(m_.trace().imag()) > 1e-10) {
      std::ostringstream msg;
      msg << "DensityMatrix: trace must be 1 within 1e-10, got " << m_.trace();
      throw std::invalid_argument(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
      std::ostringstream msg;
      msg << "DensityMatrix: negative eigenvalue " << solver.eigenvalues().minCoeff();
      throw std::invalid_argument(msg.str());
    }
  }

  /// Diagonal state from classical populations (must sum to 1 within 1e-10).
  static DensityMatrix diagonal(const std::vector<double>& populations) {
    const Eigen::Index dim = static_cast<Eigen::Index>(populations.size());
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) m(i, i) = populations[static_cast<size_t>(i)];
    return DensityMatrix(std::move(m));
  }

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

}  // namespace attoscat
