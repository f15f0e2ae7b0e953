#include "snr/fixed_effects.hpp"

#include <string>

#include "snr/errors.hpp"

namespace snr {

namespace {

void check_square(const SymMatrix& m, Eigen::Index q, const char* what) {
  if (m.rows() != q || m.cols() != q) {
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(q) + "x" +
                            std::to_string(q));
  }
}

}  // namespace

FixedEffectsEstimate estimate_fixed(const CrossProducts& cp, Eigen::Index n,
                                    Eigen::Index p) {
  if (n < 2) throw InvalidParameter("estimate_fixed: need n >= 2");
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double c = 1.0 / (nd * (nd + 1.0));

  FixedEffectsEstimate est;
  est.n = n;
  est.p = p;
  est.q = cp.YtY.rows();
  est.Wb_hat = symmetrize(-pd * c * cp.YtY + c * cp.YtXXtY);
  est.Sigma_e_hat = symmetrize((pd + nd + 1.0) * c * cp.YtY - c * cp.YtXXtY);

  const double qd = static_cast<double>(est.q);
  est.rho2 = est.Wb_hat.trace() / qd;
  est.sigma2 = est.Sigma_e_hat.trace() / qd;
  const double total = est.rho2 + est.sigma2;
  if (total == 0.0) {
    throw DegenerateResponse("estimate_fixed: rho2_hat + sigma2_hat == 0");
  }
  est.r2 = est.rho2 / total;
  return est;
}

FixedEffectsEstimate estimate_fixed(const Matrix& x, const Matrix& y) {
  return estimate_fixed(cross_products(x, y), x.rows(), x.cols());
}

AsymptoticVariance asymptotic_variance_fixed(Eigen::Index n, Eigen::Index p,
                                             Eigen::Index q, const SymMatrix& Wb,
                                             const SymMatrix& Sigma_e, double rho2,
                                             double sigma2, double r2, double level) {
  if (n < 1) throw InvalidParameter("asymptotic_variance_fixed: need n >= 1");
  check_square(Wb, q, "Wb");
  check_square(Sigma_e, q, "Sigma_e");
  if (rho2 + sigma2 == 0.0) {
    throw InvalidParameter("asymptotic_variance_fixed: rho2 + sigma2 == 0");
  }
  critical_value(level);

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double qd = static_cast<double>(q);

  const double wb_f2 = frobenius_sq(Wb);
  const double tr_ew = (Sigma_e * Wb).trace();
  const double tr_e2 = frobenius_sq(Sigma_e);

  const double k = 2.0 / (qd * qd * (nd + 1.0) * (nd + 1.0));
  const double V11 =
      k * ((nd * nd + nd * pd) * wb_f2 + 2.0 * pd * nd * tr_ew + (nd * nd + nd * pd) * tr_e2);
  const double V22 = k * ((4.0 * nd * nd + nd * pd) * wb_f2 +
                          (2.0 * nd * nd + 2.0 * pd * nd) * tr_ew + pd * nd * tr_e2);
  const double V12 =
      -k * ((2.0 * nd * nd + nd * pd) * wb_f2 + 2.0 * nd * pd * tr_ew + pd * nd * tr_e2);

  return finish_variance(V11, V12, V22, rho2, sigma2, r2, n, level);
}

ExactCovariance exact_covariance_fixed(Eigen::Index n, Eigen::Index p, Eigen::Index q,
                                       const SymMatrix& Wb, const SymMatrix& Sigma_e) {
  if (n < 1) throw InvalidParameter("exact_covariance_fixed: need n >= 1");
  check_square(Wb, q, "Wb");
  check_square(Sigma_e, q, "Sigma_e");

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double qd = static_cast<double>(q);

  const double wb_f2 = frobenius_sq(Wb);           // ||B^T B||_F^2
  const double b_f4 = Wb.trace() * Wb.trace();     // ||B||_F^4
  const double weighted = Sigma_e.diagonal().dot(Wb.diagonal());
  const double b_tr = Wb.trace() * Sigma_e.trace();  // ||B||_F^2 tr(Sigma_e)
  const double tr_e2 = frobenius_sq(Sigma_e);
  const double tr2_e = Sigma_e.trace() * Sigma_e.trace();

  const double k = 2.0 / (qd * qd * (nd + 1.0) * (nd + 1.0) * nd);

  ExactCovariance out;
  out.var_sigma2 = k * ((nd * nd + nd * pd - 2.0 * nd + 2.0 * pd + 9.0) * wb_f2 +
                        (9.0 * nd + 1.0) * b_f4 +
                        (2.0 * pd * nd + 2.0 * pd + 2.0 * nd + 6.0) * weighted +
                        (2.0 * nd + 2.0 * pd + 2.0) * b_tr +
                        (nd * nd + nd * pd + 2.0 * nd + pd + 1.0) * tr_e2 + pd * tr2_e);
  out.var_rho2 = k * ((4.0 * nd * nd + nd * pd + 2.0 * nd + 2.0 * pd + 10.0) * wb_f2 +
                      (13.0 * nd + 5.0) * b_f4 +
                      (2.0 * nd * nd + 2.0 * pd * nd + 6.0 * nd + 2.0 * pd + 8.0) * weighted +
                      (4.0 * nd + 2.0 * pd + 4.0) * b_tr + (pd * nd + pd) * tr_e2 +
                      pd * tr2_e);
  out.cov = -k * ((2.0 * nd * nd + nd * pd - nd + 2.0 * pd + 9.0) * wb_f2 +
                  (11.0 * nd + 3.0) * b_f4 +
                  (2.0 * nd * pd + 2.0 * nd + 2.0 * pd + 6.0) * weighted +
                  (3.0 * nd + 2.0 * pd + 3.0) * b_tr + (pd * nd + pd) * tr_e2 +
                  pd * tr2_e);
  return out;
}

AsymptoticVariance exact_variance_fixed(Eigen::Index n, Eigen::Index p, Eigen::Index q,
                                        const SymMatrix& Wb, const SymMatrix& Sigma_e,
                                        double rho2, double sigma2, double r2,
                                        double level) {
  if (rho2 + sigma2 == 0.0) {
    throw InvalidParameter("exact_variance_fixed: rho2 + sigma2 == 0");
  }
  const ExactCovariance c = exact_covariance_fixed(n, p, q, Wb, Sigma_e);
  const double nd = static_cast<double>(n);
  return finish_variance(nd * c.var_sigma2, nd * c.cov, nd * c.var_rho2, rho2, sigma2, r2,
                         n, level);
}

}  // namespace snr
