#pragma once

// Dense Hermitian operators with a cached eigendecomposition. Used for
// density matrices and Hamiltonians in the oracle and discharge paths.

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "qbring/errors.hpp"

namespace qbring {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;

inline double hermiticity_defect(const MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const MatrixXcd& m, double tol,
                              const std::string& who) {
  const double defect = hermiticity_defect(m);
  if (defect > tol)
    throw NumericError(who + ": non-Hermitian input, defect " +
                       std::to_string(defect));
}

inline void require_unit_trace(const MatrixXcd& m, double tol,
                               const std::string& who) {
  const Complex tr = m.trace();
  if (std::abs(tr - 1.0) > tol)
    throw NumericError(who + ": trace differs from 1 by " +
                       std::to_string(std::abs(tr - 1.0)));
}

struct DenseOperator {
  MatrixXcd mat;
  VectorXd evals;    // ascending when decomposed
  MatrixXcd evecs;   // orthonormal columns
  bool has_eigen = false;

  DenseOperator() = default;
  explicit DenseOperator(MatrixXcd m) : mat(std::move(m)) {}
  explicit DenseOperator(const MatrixXd& m) : mat(m.cast<Complex>()) {}

  Eigen::Index dim() const { return mat.rows(); }

  // Validates Hermiticity (1e-10) and caches the spectral decomposition.
  void eigendecompose() {
    if (has_eigen) return;
    require_hermitian(mat, 1e-10, "DenseOperator::eigendecompose");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(mat);
    if (es.info() != Eigen::Success)
      throw NumericError("DenseOperator::eigendecompose: solver failed");
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
    has_eigen = true;
  }

  // ||A v - lambda v|| for the worst eigenpair; consistency diagnostic.
  double eigen_residual() const {
    if (!has_eigen) return 0.0;
    return (mat * evecs - evecs * evals.asDiagonal().toDenseMatrix().cast<Complex>())
        .cwiseAbs()
        .maxCoeff();
  }
};

}  // namespace qbring
