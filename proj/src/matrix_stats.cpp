#include "snr/matrix_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snr/errors.hpp"

namespace snr {

SymMatrix symmetrize(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("symmetrize: matrix is " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()));
  }
  SymMatrix s(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j; i < a.rows(); ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

CrossProducts cross_products(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw DimensionMismatch("cross_products: X has " + std::to_string(x.rows()) +
                            " rows, Y has " + std::to_string(y.rows()));
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidParameter("cross_products: non-finite entry in input");
  }
  CrossProducts out;
  out.XtY = x.transpose() * y;
  out.YtY = symmetrize(y.transpose() * y);
  out.YtXXtY = symmetrize(out.XtY.transpose() * out.XtY);
  return out;
}

SpectralMoments moments_from_eigenvalues(const Vector& eigenvalues,
                                         Eigen::Index n, Eigen::Index p) {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    // Gram eigenvalues are nonnegative; round-off can push zeros slightly below.
    const double l = std::max(eigenvalues(i), 0.0);
    const double l2 = l * l;
    s1 += l;
    s2 += l2;
    s3 += l2 * l;
    s4 += l2 * l2;
  }
  SpectralMoments m;
  const double pd = static_cast<double>(p);
  m.g1 = s1 / pd;
  m.g2 = s2 / pd;
  m.g3 = s3 / pd;
  m.g4 = s4 / pd;
  m.aspect = pd / static_cast<double>(n);
  m.denom = m.g2 - m.aspect * m.g1 * m.g1;
  return m;
}

SpectralMoments spectral_moments(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 1 || p < 1) {
    throw InvalidParameter("spectral_moments: empty design matrix");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  SymMatrix gram;
  if (p <= n) {
    gram = symmetrize(x.transpose() * x * inv_n);
  } else {
    gram = symmetrize(x * x.transpose() * inv_n);
  }
  Eigen::SelfAdjointEigenSolver<SymMatrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw InvalidParameter("spectral_moments: eigendecomposition failed");
  }
  return moments_from_eigenvalues(solver.eigenvalues(), n, p);
}

SymMatrix ar1_matrix(Eigen::Index dim, double phi) {
  if (dim < 1) throw InvalidParameter("ar1_matrix: dim must be >= 1");
  if (!(std::abs(phi) < 1.0)) {
    throw InvalidParameter("ar1_matrix: |phi| must be < 1, got " + std::to_string(phi));
  }
  SymMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto lag = static_cast<int>(i > j ? i - j : j - i);
      m(i, j) = lag == 0 ? 1.0 : std::pow(phi, lag);
    }
  }
  return m;
}

double frobenius_sq(const Matrix& a) { return a.squaredNorm(); }

namespace {

// Cholesky that tolerates zero pivots; correct for PSD input.
Matrix semidefinite_cholesky(const SymMatrix& s, double tol) {
  const Eigen::Index d = s.rows();
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double diag = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag <= tol) continue;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

}  // namespace

Matrix sym_factor(const SymMatrix& s) {
  if (s.rows() != s.cols()) throw DimensionMismatch("sym_factor: matrix not square");
  if (s.rows() == 0) return Matrix(0, 0);
  if (!s.allFinite()) throw InvalidParameter("sym_factor: non-finite entry");

  Eigen::LLT<SymMatrix> llt(s);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    return l;
  }

  const double scale = s.norm();
  Eigen::SelfAdjointEigenSolver<SymMatrix> solver(s, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -1e-10 * scale) {
    throw NotPositiveSemiDefinite("sym_factor: smallest eigenvalue " +
                                  std::to_string(min_eig));
  }
  if (scale == 0.0) return Matrix::Zero(s.rows(), s.cols());

  Matrix l = semidefinite_cholesky(s, 1e-12 * scale);
  const double err = (l * l.transpose() - s).norm() / scale;
  if (err > 1e-8) {
    throw NotPositiveSemiDefinite("sym_factor: semidefinite factor residual " +
                                  std::to_string(err));
  }
  return l;
}

}  // namespace snr
