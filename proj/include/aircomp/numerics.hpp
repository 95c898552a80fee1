#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aircomp {

using cd = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPsdError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class SingularMatrixError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

class DimensionMismatchError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// Square complex matrix that is Hermitian to within 1e-12 (relative to its
/// largest entry). The stored copy is exactly Hermitian: the constructor
/// replaces M by (M + M^H) / 2 after the check.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  /// Symmetrizes without checking. For matrices that are Hermitian by
  /// construction up to rounding (products like W^H W, differences R - B).
  static HermitianMatrix symmetrized(const ComplexMatrix& m);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  cd operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.diagonal().real().sum(); }

 private:
  struct Unchecked {};
  HermitianMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

inline constexpr double kPsdTolerance = 1e-10;

/// Returns F with F F^H = M via an eigendecomposition. Eigenvalues whose
/// magnitude is below kPsdTolerance * trace(M) / dim are set to zero, so
/// rank-deficient inputs factor cleanly. Throws NotPsdError for anything
/// more negative than that.
ComplexMatrix psd_factor(const HermitianMatrix& m);

/// Real symmetric counterpart of psd_factor (used for shadow-fading
/// covariances, which must be sampled with real weights).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m);

/// Cholesky factor of a Hermitian positive definite matrix. Throws
/// SingularMatrixError when the factorization breaks down, or when the
/// smallest squared pivot is not above min_pivot_ratio times the largest.
Eigen::LLT<ComplexMatrix> checked_llt(const ComplexMatrix& a, const char* what,
                                      double min_pivot_ratio = 0.0);

/// Solves A x = b for Hermitian positive definite A (Cholesky).
ComplexVector hermitian_solve(const HermitianMatrix& a, const ComplexVector& b);

/// v^H M v for Hermitian M. Throws NumericsError if the imaginary part is
/// larger than 1e-10 (1 + |Re|), which would mean M is not Hermitian.
double quad_form(const ComplexVector& v, const HermitianMatrix& m);

/// max_v |v^H h|^2 / (v^H B v) = h^H B^{-1} h, for positive definite B.
double rayleigh_max(const ComplexVector& h, const HermitianMatrix& b);

}  // namespace aircomp
