#pragma once

#include "snr/inference.hpp"
#include "snr/matrix_stats.hpp"

namespace snr {

// Method-of-moments fit under the fixed-effects model Y = X B + E with a
// standard Gaussian design. Wb_hat estimates B^T B.
struct FixedEffectsEstimate {
  SymMatrix Wb_hat;
  SymMatrix Sigma_e_hat;
  double rho2 = 0.0;
  double sigma2 = 0.0;
  double r2 = 0.0;
  Eigen::Index n = 0, p = 0, q = 0;
};

FixedEffectsEstimate estimate_fixed(const Matrix& x, const Matrix& y);

/// Same estimator from precomputed cross products.
FixedEffectsEstimate estimate_fixed(const CrossProducts& cp, Eigen::Index n,
                                    Eigen::Index p);

/// Leading-order covariance of sqrt(n) (sigma2_hat, rho2_hat) and the Wald
/// interval for r2. Wb and Sigma_e are the true matrices or their plug-ins.
AsymptoticVariance asymptotic_variance_fixed(Eigen::Index n, Eigen::Index p,
                                             Eigen::Index q, const SymMatrix& Wb,
                                             const SymMatrix& Sigma_e, double rho2,
                                             double sigma2, double r2, double level);

struct ExactCovariance {
  double var_sigma2 = 0.0;
  double var_rho2 = 0.0;
  double cov = 0.0;
};

/// Finite-sample covariance of (sigma2_hat, rho2_hat) including lower-order
/// terms. The weighted term sum_i sigma_ii^2 ||beta_i||^2 is evaluated as
/// sum_k (Sigma_e)_kk (Wb)_kk over the q responses.
ExactCovariance exact_covariance_fixed(Eigen::Index n, Eigen::Index p, Eigen::Index q,
                                       const SymMatrix& Wb, const SymMatrix& Sigma_e);

/// Wald interval built from the finite-sample covariance (V = n * cov).
AsymptoticVariance exact_variance_fixed(Eigen::Index n, Eigen::Index p, Eigen::Index q,
                                        const SymMatrix& Wb, const SymMatrix& Sigma_e,
                                        double rho2, double sigma2, double r2,
                                        double level);

}  // namespace snr
