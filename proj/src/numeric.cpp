#include "lpvsyn/numeric.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lpvsyn {

SymmetricSpectrum symmetric_spectrum(const Matrix& sym) {
  if (sym.rows() != sym.cols()) {
    throw std::invalid_argument("symmetric_spectrum: matrix must be square");
  }
  if (sym.rows() == 0) {
    return SymmetricSpectrum{0.0, 0.0};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return SymmetricSpectrum{ev.minCoeff(), ev.maxCoeff()};
}

double min_eigenvalue(const Matrix& sym) { return symmetric_spectrum(sym).min_eig; }

double spectral_norm_sym(const Matrix& sym) {
  const auto s = symmetric_spectrum(sym);
  return std::max(std::abs(s.min_eig), std::abs(s.max_eig));
}

bool is_positive_semidefinite(const Matrix& sym, double tol) {
  return symmetric_spectrum(sym).positive_semidefinite(tol);
}

bool is_positive_definite(const Matrix& sym, double tol) {
  return symmetric_spectrum(sym).positive_definite(tol);
}

bool is_negative_definite(const Matrix& sym, double tol) {
  return symmetric_spectrum(sym).negative_definite(tol);
}

Matrix psd_sqrt(const Matrix& sym, double tol) {
  if (sym.rows() != sym.cols()) {
    throw std::invalid_argument("psd_sqrt: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
  const Vector& ev = es.eigenvalues();
  const double scale = 1.0 + std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  if (ev.minCoeff() < -tol * scale) {
    throw std::invalid_argument("psd_sqrt: matrix has a negative eigenvalue beyond tolerance");
  }
  Vector clamped = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

Matrix psd_clamp(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
  Vector clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

Matrix spd_inverse(const Matrix& sym, double condition_limit) {
  if (sym.rows() != sym.cols()) {
    throw std::invalid_argument("spd_inverse: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
  const Vector& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (lo <= 0.0) {
    throw std::runtime_error("spd_inverse: matrix is not positive definite");
  }
  if (hi / lo > condition_limit) {
    throw std::runtime_error("spd_inverse: condition number exceeds limit");
  }
  Eigen::LLT<Matrix> llt(symmetrized(sym));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("spd_inverse: Cholesky factorization failed");
  }
  Matrix inv = llt.solve(Matrix::Identity(sym.rows(), sym.cols()));
  return symmetrized(inv);
}

int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double threshold =
      static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max * std::ldexp(1.0, -40);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("spectral_radius: matrix must be square");
  }
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace lpvsyn
