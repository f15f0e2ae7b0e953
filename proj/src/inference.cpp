#include "snr/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <string>

#include "snr/errors.hpp"

namespace snr {

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw InvalidParameter("normal_quantile: probability must lie in (0,1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidParameter("confidence level must lie in (0,1), got " +
                           std::to_string(level));
  }
  return normal_quantile(0.5 * (1.0 + level));
}

double delta_method_r2(double V11, double V12, double V22, double rho2, double sigma2) {
  const double total = rho2 + sigma2;
  if (total == 0.0) {
    throw InvalidParameter("delta_method_r2: rho2 + sigma2 == 0");
  }
  const double t2 = total * total;
  const double t4 = t2 * t2;
  return (rho2 * rho2 * V11 + sigma2 * sigma2 * V22 - 2.0 * rho2 * sigma2 * V12) / t4;
}

AsymptoticVariance finish_variance(double V11, double V12, double V22, double rho2,
                                   double sigma2, double r2, Eigen::Index n,
                                   double level) {
  const double z = critical_value(level);
  AsymptoticVariance out;
  out.V11 = V11;
  out.V12 = V12;
  out.V22 = V22;
  out.level = level;
  double s = delta_method_r2(V11, V12, V22, rho2, sigma2);
  if (!(s >= kVarianceFloor)) {
    s = kVarianceFloor;
    out.variance_floored = true;
  }
  out.sigma_r2 = s;
  out.se_r2 = std::sqrt(s / static_cast<double>(n));
  out.ci_low = r2 - z * out.se_r2;
  out.ci_high = r2 + z * out.se_r2;
  return out;
}

void clamp_interval(AsymptoticVariance& v) {
  const double lo = std::clamp(v.ci_low, 0.0, 1.0);
  const double hi = std::clamp(v.ci_high, 0.0, 1.0);
  if (lo != v.ci_low || hi != v.ci_high) v.clamped = true;
  v.ci_low = lo;
  v.ci_high = hi;
}

}  // namespace snr
