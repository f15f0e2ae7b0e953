#pragma once

#include <optional>
#include <vector>

#include "snr/inference.hpp"
#include "snr/matrix_stats.hpp"

namespace snr {

// Method-of-moments fit under the random-effects model, rows of B i.i.d.
// N(0, Sigma_b / p). Under heteroskedastic noise Sigma_e_hat estimates the
// average noise covariance.
struct RandomEffectsEstimate {
  SymMatrix Sigma_b_hat;
  SymMatrix Sigma_e_hat;
  SpectralMoments moments;
  double rho2 = 0.0;
  double sigma2 = 0.0;
  double r2 = 0.0;
  Eigen::Index n = 0, p = 0, q = 0;
};

struct GroupHeteroskedasticity {
  Eigen::Index size = 0;
  SymMatrix Sigma_e_hat;
  double eta_hat_raw = 0.0;
  double eta_hat = 0.0;
};

struct HeteroskedasticityEstimate {
  double eta_hat_raw = 0.0;  // size-weighted mean over groups for subgroup fits
  double eta_hat = 0.0;
  double kappa_tot_hat = 0.0;
  std::optional<std::vector<GroupHeteroskedasticity>> per_group;
};

struct EtaEstimate {
  double eta_raw = 0.0;
  double eta = 0.0;
};

struct DataBlock {
  Matrix x;
  Matrix y;
};

/// True when |denom| is too small relative to the terms it is formed from.
bool moment_system_singular(const SpectralMoments& m);

RandomEffectsEstimate estimate_random(const Matrix& x, const Matrix& y);

/// Same estimator from precomputed pieces.
RandomEffectsEstimate estimate_random(const SpectralMoments& moments,
                                      const CrossProducts& cp, Eigen::Index n,
                                      Eigen::Index p);

/// Plug-in covariance of sqrt(n) (sigma2_hat, rho2_hat) for the random-effects
/// model. kappa_tot adds the heteroskedastic correction to V11; the aspect
/// ratio p/n stored in `moments` stands in for its limit.
AsymptoticVariance asymptotic_variance_random(const SpectralMoments& moments,
                                              const SymMatrix& Sigma_b,
                                              const SymMatrix& Sigma_e, Eigen::Index q,
                                              double kappa_tot, double rho2,
                                              double sigma2, double r2, double level,
                                              Eigen::Index n);

/// Homoskedastic V entries. The heteroskedastic V11 is this value plus the
/// kappa term, so kappa_tot = 0 reproduces it exactly.
struct VEntries {
  double V11 = 0.0;
  double V12 = 0.0;
  double V22 = 0.0;
};
VEntries random_effects_v(const SpectralMoments& moments, const SymMatrix& Sigma_b,
                          const SymMatrix& Sigma_e, Eigen::Index q);
/// Coefficient multiplying kappa_tot in V11.
double kappa_coefficient(const SpectralMoments& moments, Eigen::Index q);

/// Moment estimator of the scalar heteroskedasticity parameter eta.
EtaEstimate estimate_eta(const Matrix& x, const Matrix& y, const RandomEffectsEstimate& est);

/// kappa_tot under scalar heterogeneity: eta * ||Sigma_e||_F^2.
double kappa_scalar(double eta, const SymMatrix& Sigma_e_hat);

/// kappa_tot under the subgroup model, each group fitted on its own rows.
HeteroskedasticityEstimate kappa_subgroup(const std::vector<DataBlock>& groups);

/// Splits (X, Y) into contiguous row blocks of the given sizes.
std::vector<DataBlock> split_rows(const Matrix& x, const Matrix& y,
                                  const std::vector<Eigen::Index>& sizes);

}  // namespace snr
