#pragma once

#include <Eigen/Dense>

namespace snr {

// Dense row/column matrices. SymMatrix is the same storage with the
// convention that every function producing one returns an exactly
// symmetric result.
using Matrix = Eigen::MatrixXd;
using SymMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct CrossProducts {
  SymMatrix YtY;     // q x q
  Matrix XtY;        // p x q
  SymMatrix YtXXtY;  // q x q, (X^T Y)^T (X^T Y)
};

// Spectral moments g_k = tr(S_n^k) / p of S_n = X^T X / n.
struct SpectralMoments {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double g4 = 0.0;
  double aspect = 0.0;  // p / n
  double denom = 0.0;   // g2 - aspect * g1^2
};

/// (A + A^T) / 2, evaluated so that the result is bitwise symmetric.
SymMatrix symmetrize(const Matrix& a);

/// Throws DimensionMismatch if the row counts differ.
CrossProducts cross_products(const Matrix& x, const Matrix& y);

/// Moments are taken from the eigenvalues of the smaller Gram matrix
/// (X^T X / n when p <= n, otherwise X X^T / n); the nonzero spectra agree.
SpectralMoments spectral_moments(const Matrix& x);

/// Builds the moment record from a list of eigenvalues of S_n. Eigenvalues
/// beyond the ones supplied are taken as zero.
SpectralMoments moments_from_eigenvalues(const Vector& eigenvalues,
                                         Eigen::Index n, Eigen::Index p);

/// AR(1) correlation matrix with entries phi^|i-j|. Requires |phi| < 1.
SymMatrix ar1_matrix(Eigen::Index dim, double phi);

/// Lower-triangular L with L L^T = S for positive semidefinite S.
///
/// Positive definite input goes through a standard Cholesky. Singular PSD
/// input falls back to a pivot-free semidefinite Cholesky that zeroes the
/// columns whose pivot vanishes. Throws NotPositiveSemiDefinite when the
/// smallest eigenvalue is below -1e-10 * ||S|| or the factor does not
/// reproduce S to 1e-8 relative Frobenius error.
Matrix sym_factor(const SymMatrix& s);

double frobenius_sq(const Matrix& a);

}  // namespace snr
