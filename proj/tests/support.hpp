#pragma once

#include <cmath>
#include <random>

#include "snr/matrix_stats.hpp"

namespace snr::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Frobenius distance relative to the larger operand (absolute when both vanish).
inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Orthogonal reflection I - 2 v v^T / ||v||^2.
inline Matrix householder(Eigen::Index n, std::uint64_t seed) {
  const Matrix v = random_matrix(n, 1, seed);
  return Matrix::Identity(n, n) - 2.0 * v * v.transpose() / v.squaredNorm();
}

inline Matrix permute_rows(const Matrix& m, const std::vector<Eigen::Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

inline std::vector<Eigen::Index> random_permutation(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace snr::test
