#pragma once

#include <Eigen/Dense>

namespace lpvsyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shared numerical tolerances. All definiteness decisions in the toolkit go
/// through these constants so that a single configuration point controls them.
struct Tolerances {
  /// Relative eigenvalue cutoff for definiteness tests: an eigenvalue counts
  /// as zero when |lambda| <= definiteness * (1 + spectral norm).
  double definiteness = 1e-9;
  /// Relative tolerance for QMI membership tests.
  double membership = 1e-8;
  /// Base for strict-inequality margins (scaled by 1 + norm of the constant
  /// term when a constraint is encoded).
  double strict_margin = 1e-6;
  /// Relative tolerance for independent verification of solver output.
  double verify = 1e-7;
  /// Condition number limit above which Cholesky-based inversion refuses to
  /// produce a result instead of silently regularizing.
  double condition_limit = 1e12;
};

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Eigenvalue summary of a symmetric matrix used for tolerance-scaled
/// definiteness decisions.
struct SymmetricSpectrum {
  double min_eig = 0.0;
  double max_eig = 0.0;

  double scale() const { return 1.0 + std::max(std::abs(min_eig), std::abs(max_eig)); }
  bool positive_semidefinite(double tol) const { return min_eig >= -tol * scale(); }
  bool positive_definite(double tol) const { return min_eig > tol * scale(); }
  bool negative_definite(double tol) const { return max_eig < -tol * scale(); }
  /// Minimum eigenvalue normalized by (1 + spectral norm); comparable across
  /// matrices of different magnitude.
  double relative_margin() const { return min_eig / scale(); }
};

SymmetricSpectrum symmetric_spectrum(const Matrix& sym);

double min_eigenvalue(const Matrix& sym);
double spectral_norm_sym(const Matrix& sym);

bool is_positive_semidefinite(const Matrix& sym, double tol = Tolerances{}.definiteness);
bool is_positive_definite(const Matrix& sym, double tol = Tolerances{}.definiteness);
bool is_negative_definite(const Matrix& sym, double tol = Tolerances{}.definiteness);

/// Symmetric square root via eigendecomposition. Eigenvalues are clamped at
/// zero, which absorbs the -1e-15 round-off produced by matrices that are PSD
/// by construction. Throws std::invalid_argument if an eigenvalue is negative
/// beyond the definiteness tolerance.
Matrix psd_sqrt(const Matrix& sym, double tol = Tolerances{}.definiteness);

/// Nearest PSD matrix in the spectral sense: eigenvalues clamped at zero.
Matrix psd_clamp(const Matrix& sym);

/// Inverse through Cholesky. Throws std::runtime_error when the matrix is not
/// positive definite or its condition number exceeds `condition_limit`.
Matrix spd_inverse(const Matrix& sym, double condition_limit = Tolerances{}.condition_limit);

/// Numerical rank: singular values below max(rows, cols) * sigma_max * 2^-40
/// count as zero.
int numerical_rank(const Matrix& m);

/// Spectral radius of a general (not necessarily symmetric) square matrix.
double spectral_radius(const Matrix& m);

}  // namespace lpvsyn
