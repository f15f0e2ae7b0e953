#include "snr/random_effects.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snr/errors.hpp"

namespace snr {

bool moment_system_singular(const SpectralMoments& m) {
  const double scale = std::max(m.g2, m.aspect * m.g1 * m.g1);
  return !(std::abs(m.denom) > 1e-10 * scale);
}

RandomEffectsEstimate estimate_random(const SpectralMoments& moments,
                                      const CrossProducts& cp, Eigen::Index n,
                                      Eigen::Index p) {
  if (moment_system_singular(moments)) {
    throw SingularMomentSystem("estimate_random: g2 - (p/n) g1^2 = " +
                               std::to_string(moments.denom) + " is numerically zero");
  }
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double inv = 1.0 / moments.denom;
  const double n2 = nd * nd;

  RandomEffectsEstimate est;
  est.moments = moments;
  est.n = n;
  est.p = p;
  est.q = cp.YtY.rows();
  est.Sigma_b_hat =
      symmetrize(inv * (-(pd * moments.g1 / n2) * cp.YtY + (1.0 / n2) * cp.YtXXtY));
  est.Sigma_e_hat =
      symmetrize(inv * ((moments.g2 / nd) * cp.YtY - (moments.g1 / n2) * cp.YtXXtY));

  const double qd = static_cast<double>(est.q);
  est.rho2 = est.Sigma_b_hat.trace() / qd;
  est.sigma2 = est.Sigma_e_hat.trace() / qd;
  const double total = est.rho2 + est.sigma2;
  if (total == 0.0) {
    throw DegenerateResponse("estimate_random: rho2_hat + sigma2_hat == 0");
  }
  est.r2 = est.rho2 / total;
  return est;
}

RandomEffectsEstimate estimate_random(const Matrix& x, const Matrix& y) {
  const CrossProducts cp = cross_products(x, y);
  return estimate_random(spectral_moments(x), cp, x.rows(), x.cols());
}

VEntries random_effects_v(const SpectralMoments& m, const SymMatrix& Sigma_b,
                          const SymMatrix& Sigma_e, Eigen::Index q) {
  if (Sigma_b.rows() != q || Sigma_b.cols() != q || Sigma_e.rows() != q ||
      Sigma_e.cols() != q) {
    throw DimensionMismatch("random_effects_v: covariance plug-ins must be q x q");
  }
  if (moment_system_singular(m)) {
    throw SingularMomentSystem("random_effects_v: moment system denominator is zero");
  }
  const double t = m.aspect;
  const double g1 = m.g1, g2 = m.g2, g3 = m.g3, g4 = m.g4;
  const double qd = static_cast<double>(q);
  const double pref = 1.0 / (m.denom * m.denom * qd * qd);

  const double e_f2 = frobenius_sq(Sigma_e);
  const double tr_eb = (Sigma_e * Sigma_b).trace();
  const double b_f2 = frobenius_sq(Sigma_b);

  VEntries v;
  v.V11 = pref * ((2.0 * g2 * g2 - 2.0 * t * g1 * g1 * g2) * e_f2 +
                  (4.0 * g1 * g1 * g3 - 4.0 * g1 * g2 * g2) * tr_eb +
                  (2.0 / t * g2 * g2 * g2 + 2.0 / t * g1 * g1 * g4 - 4.0 / t * g1 * g2 * g3) *
                      b_f2);
  v.V22 = pref * ((2.0 * t * g2 - 2.0 * t * t * g1 * g1) * e_f2 +
                  (4.0 * t * t * g1 * g1 * g1 + 4.0 * g3 - 8.0 * t * g1 * g2) * tr_eb +
                  (2.0 * t * g1 * g1 * g2 + 2.0 / t * g4 - 4.0 * g1 * g3) * b_f2);
  v.V12 = pref * ((-2.0 * t * g1 * g2 + 2.0 * t * t * g1 * g1 * g1) * e_f2 +
                  (-4.0 * g1 * g3 + 4.0 * g2 * g2) * tr_eb +
                  (-2.0 * g1 * g2 * g2 - 2.0 / t * g1 * g4 + 2.0 / t * g2 * g3 +
                   2.0 * g1 * g1 * g3) *
                      b_f2);
  return v;
}

double kappa_coefficient(const SpectralMoments& m, Eigen::Index q) {
  const double t = m.aspect;
  const double qd = static_cast<double>(q);
  const double g1sq = m.g1 * m.g1;
  return (2.0 * m.g2 * m.g2 + 2.0 * t * t * g1sq * g1sq - 4.0 * t * g1sq * m.g2) /
         (m.denom * m.denom * qd * qd);
}

AsymptoticVariance asymptotic_variance_random(const SpectralMoments& moments,
                                              const SymMatrix& Sigma_b,
                                              const SymMatrix& Sigma_e, Eigen::Index q,
                                              double kappa_tot, double rho2,
                                              double sigma2, double r2, double level,
                                              Eigen::Index n) {
  if (!(kappa_tot >= 0.0)) {
    throw InvalidParameter("asymptotic_variance_random: kappa_tot must be >= 0");
  }
  if (rho2 + sigma2 == 0.0) {
    throw InvalidParameter("asymptotic_variance_random: rho2 + sigma2 == 0");
  }
  critical_value(level);
  const VEntries v = random_effects_v(moments, Sigma_b, Sigma_e, q);
  const double V11 = v.V11 + kappa_tot * kappa_coefficient(moments, q);
  return finish_variance(V11, v.V12, v.V22, rho2, sigma2, r2, n, level);
}

EtaEstimate estimate_eta(const Matrix& x, const Matrix& y, const RandomEffectsEstimate& est) {
  if (x.rows() != y.rows()) throw DimensionMismatch("estimate_eta: row counts differ");
  const double nd = static_cast<double>(x.rows());
  const double pd = static_cast<double>(x.cols());
  const double qd = static_cast<double>(y.cols());

  const double sigma4 = est.sigma2 * est.sigma2;
  const double scale = 2.0 * frobenius_sq(est.Sigma_e_hat) + qd * qd * sigma4;
  if (!(scale > 0.0)) {
    throw DegenerateResponse("estimate_eta: 2||Sigma_e_hat||_F^2 + q^2 sigma2_hat^2 == 0");
  }

  const Vector y_sq = y.rowwise().squaredNorm();
  const Vector x_sq = x.rowwise().squaredNorm();
  const double y4_mean = y_sq.squaredNorm() / nd;  // (1/n) sum (y_i^T y_i)^2
  const double x4_sum = x_sq.squaredNorm();        // sum ||x_i||^4
  const double tr_xx = x_sq.sum();                 // tr(X X^T)

  const double rho4 = est.rho2 * est.rho2;
  const double np2 = nd * pd * pd;
  const double np = nd * pd;
  const double numerator =
      y4_mean - 2.0 / np2 * x4_sum * frobenius_sq(est.Sigma_b_hat) -
      4.0 / np * tr_xx * (est.Sigma_b_hat * est.Sigma_e_hat).trace() -
      1.0 / np2 * x4_sum * qd * qd * rho4 -
      2.0 / np * tr_xx * qd * qd * est.sigma2 * est.rho2;

  EtaEstimate out;
  out.eta_raw = numerator / scale - 1.0;
  out.eta = std::max(out.eta_raw, 0.0);
  return out;
}

double kappa_scalar(double eta, const SymMatrix& Sigma_e_hat) {
  if (!(eta >= 0.0)) throw InvalidParameter("kappa_scalar: eta must be >= 0");
  return eta * frobenius_sq(Sigma_e_hat);
}

HeteroskedasticityEstimate kappa_subgroup(const std::vector<DataBlock>& groups) {
  if (groups.empty()) throw InvalidParameter("kappa_subgroup: no groups");

  std::vector<GroupHeteroskedasticity> fits;
  fits.reserve(groups.size());
  Eigen::Index total = 0;
  for (std::size_t m = 0; m < groups.size(); ++m) {
    const DataBlock& g = groups[m];
    try {
      const RandomEffectsEstimate est = estimate_random(g.x, g.y);
      const EtaEstimate eta = estimate_eta(g.x, g.y, est);
      fits.push_back({g.x.rows(), est.Sigma_e_hat, eta.eta_raw, eta.eta});
    } catch (const SingularMomentSystem& e) {
      throw SingularMomentSystem("group " + std::to_string(m) + ": " + e.what());
    } catch (const DegenerateResponse& e) {
      throw DegenerateResponse("group " + std::to_string(m) + ": " + e.what());
    }
    total += g.x.rows();
  }

  const double nd = static_cast<double>(total);
  const Eigen::Index q = fits.front().Sigma_e_hat.rows();
  SymMatrix pooled = SymMatrix::Zero(q, q);
  for (const auto& f : fits) {
    pooled += (static_cast<double>(f.size) / nd) * f.Sigma_e_hat;
  }

  HeteroskedasticityEstimate out;
  double between = 0.0;
  double within = 0.0;
  for (const auto& f : fits) {
    const double r = static_cast<double>(f.size) / nd;
    between += r * frobenius_sq(f.Sigma_e_hat - pooled);
    within += r * f.eta_hat * frobenius_sq(f.Sigma_e_hat);
    out.eta_hat_raw += r * f.eta_hat_raw;
    out.eta_hat += r * f.eta_hat;
  }
  out.kappa_tot_hat = between + within;
  out.per_group = std::move(fits);
  return out;
}

std::vector<DataBlock> split_rows(const Matrix& x, const Matrix& y,
                                  const std::vector<Eigen::Index>& sizes) {
  if (x.rows() != y.rows()) throw DimensionMismatch("split_rows: row counts differ");
  Eigen::Index total = 0;
  for (Eigen::Index s : sizes) {
    if (s < 1) throw InvalidParameter("split_rows: group sizes must be positive");
    total += s;
  }
  if (total != x.rows()) {
    throw InvalidParameter("split_rows: group sizes sum to " + std::to_string(total) +
                           " but n = " + std::to_string(x.rows()));
  }
  std::vector<DataBlock> blocks;
  blocks.reserve(sizes.size());
  Eigen::Index start = 0;
  for (Eigen::Index s : sizes) {
    blocks.push_back({x.middleRows(start, s), y.middleRows(start, s)});
    start += s;
  }
  return blocks;
}

}  // namespace snr
