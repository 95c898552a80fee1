#include "aircomp/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace aircomp {

namespace {

void require_square(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatchError("Hermitian matrix must be square and non-empty");
  }
}

template <typename Matrix>
double clamp_threshold(const Matrix& m) {
  const double mean_eig = m.diagonal().real().sum() / static_cast<double>(m.rows());
  return kPsdTolerance * std::max(mean_eig, 0.0);
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  require_square(m);
  const double scale = m.cwiseAbs().maxCoeff();
  const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * scale) {
    throw NumericsError("matrix is not Hermitian (max |M - M^H| = " + std::to_string(skew) +
                        ")");
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::symmetrized(const ComplexMatrix& m) {
  require_square(m);
  return HermitianMatrix(0.5 * (m + m.adjoint()), Unchecked{});
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return HermitianMatrix(ComplexMatrix::Identity(dim, dim), Unchecked{});
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return HermitianMatrix(ComplexMatrix::Zero(dim, dim), Unchecked{});
}

ComplexMatrix psd_factor(const HermitianMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m.matrix());
  if (eig.info() != Eigen::Success) {
    throw NumericsError("eigendecomposition failed");
  }
  const double tol = clamp_threshold(m.matrix());
  Eigen::VectorXd root(m.dim());
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -tol) {
      throw NotPsdError("matrix has eigenvalue " + std::to_string(lambda) +
                        " below the PSD tolerance");
    }
    root(i) = lambda <= tol ? 0.0 : std::sqrt(lambda);
  }
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatchError("covariance must be square and non-empty");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) {
    throw NumericsError("eigendecomposition failed");
  }
  const double tol = clamp_threshold(m);
  Eigen::VectorXd root(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -tol) {
      throw NotPsdError("covariance has eigenvalue " + std::to_string(lambda) +
                        " below the PSD tolerance");
    }
    root(i) = lambda <= tol ? 0.0 : std::sqrt(lambda);
  }
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::LLT<ComplexMatrix> checked_llt(const ComplexMatrix& a, const char* what,
                                      double min_pivot_ratio) {
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + ": matrix is not positive definite");
  }
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().real().cwiseAbs2();
  if (!(pivots.minCoeff() > min_pivot_ratio * pivots.maxCoeff())) {
    throw SingularMatrixError(std::string(what) + ": matrix is numerically singular");
  }
  return llt;
}

ComplexVector hermitian_solve(const HermitianMatrix& a, const ComplexVector& b) {
  if (a.dim() != b.size()) {
    throw DimensionMismatchError("hermitian_solve: matrix is " + std::to_string(a.dim()) +
                                 " but right-hand side has " + std::to_string(b.size()));
  }
  return checked_llt(a.matrix(), "hermitian_solve").solve(b);
}

double quad_form(const ComplexVector& v, const HermitianMatrix& m) {
  if (v.size() != m.dim()) {
    throw DimensionMismatchError("quad_form: vector has " + std::to_string(v.size()) +
                                 " entries, matrix is " + std::to_string(m.dim()));
  }
  const cd value = v.dot(m.matrix() * v);  // dot() conjugates its left operand
  if (std::abs(value.imag()) > 1e-10 * (1.0 + std::abs(value.real()))) {
    throw NumericsError("quad_form: non-negligible imaginary part");
  }
  return std::max(value.real(), 0.0);
}

double rayleigh_max(const ComplexVector& h, const HermitianMatrix& b) {
  if (h.size() != b.dim()) {
    throw DimensionMismatchError("rayleigh_max: dimension mismatch");
  }
  const auto llt = checked_llt(b.matrix(), "rayleigh_max");
  const ComplexVector w = llt.matrixL().solve(h);
  return w.squaredNorm();
}

}  // namespace aircomp
