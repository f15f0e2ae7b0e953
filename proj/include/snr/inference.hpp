#pragma once

#include <Eigen/Core>

namespace snr {

// Asymptotic covariance of sqrt(n) * (sigma2_hat, rho2_hat) together with the
// delta-method variance of r2_hat and the resulting Wald interval.
struct AsymptoticVariance {
  double V11 = 0.0;  // sigma2_hat
  double V12 = 0.0;
  double V22 = 0.0;  // rho2_hat
  double sigma_r2 = 0.0;
  double se_r2 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  bool variance_floored = false;
  bool clamped = false;
};

inline constexpr double kVarianceFloor = 1e-12;

/// Standard normal quantile.
double normal_quantile(double prob);

/// Two-sided critical value z_{(1+level)/2}. Throws InvalidParameter unless
/// level lies in (0, 1).
double critical_value(double level);

/// Delta-method variance of r2 = rho2 / (rho2 + sigma2) from the 2x2 V.
double delta_method_r2(double V11, double V12, double V22, double rho2, double sigma2);

/// Fills sigma_r2 (floored at kVarianceFloor), se_r2 = sqrt(sigma_r2 / n) and
/// the Wald interval r2 +- z * se_r2.
AsymptoticVariance finish_variance(double V11, double V12, double V22, double rho2,
                                   double sigma2, double r2, Eigen::Index n,
                                   double level);

/// Intersects the interval with [0, 1]; sets `clamped` when that changed it.
void clamp_interval(AsymptoticVariance& v);

}  // namespace snr
