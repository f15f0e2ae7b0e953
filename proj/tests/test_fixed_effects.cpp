#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "snr/errors.hpp"
#include "snr/fixed_effects.hpp"
#include "snr/generators.hpp"
#include "support.hpp"

using namespace snr;
using snr::test::random_matrix;
using snr::test::rel_diff;

TEST_CASE("estimate_fixed: n = 2 hand example") {
  const Matrix x = Matrix::Identity(2, 2);
  Matrix y(2, 1);
  y << 1, 2;
  const auto est = estimate_fixed(x, y);
  CHECK(est.Wb_hat(0, 0) == doctest::Approx(-5.0 / 6.0).epsilon(1e-14));
  CHECK(est.Sigma_e_hat(0, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(est.rho2 == doctest::Approx(-5.0 / 6.0).epsilon(1e-14));
  CHECK(est.sigma2 == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(est.r2 == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("estimate_fixed: zero response is degenerate") {
  CHECK_THROWS_AS(estimate_fixed(random_matrix(5, 3, 1), Matrix::Zero(5, 2)), DegenerateResponse);
  CHECK_THROWS_AS(estimate_fixed(Matrix::Zero(4, 2), Matrix::Zero(3, 1)), DimensionMismatch);
  CHECK_THROWS_AS(estimate_fixed(Matrix::Ones(1, 2), Matrix::Ones(1, 1)), InvalidParameter);
}

TEST_CASE("estimate_fixed: additivity and trace identities") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix x = random_matrix(15 + s, 7 + s % 5, 100 + s);
    const Matrix y = random_matrix(15 + s, 1 + s % 4, 200 + s);
    const auto est = estimate_fixed(x, y);
    const Matrix yty = y.transpose() * y / static_cast<double>(x.rows());
    CHECK(rel_diff(est.Wb_hat + est.Sigma_e_hat, yty) < 1e-10);
    const double q = static_cast<double>(y.cols());
    CHECK(std::abs(est.rho2 - est.Wb_hat.trace() / q) <= 1e-12 * std::abs(est.rho2) + 1e-15);
    CHECK(std::abs(est.sigma2 - est.Sigma_e_hat.trace() / q) <= 1e-12 * std::abs(est.sigma2));
    CHECK(rel_diff(est.r2, est.rho2 / (est.rho2 + est.sigma2)) < 1e-14);
  }
}

TEST_CASE("estimate_fixed: scale equivariance") {
  const Matrix x = random_matrix(40, 12, 3);
  const Matrix y = random_matrix(40, 3, 4);
  const auto base = estimate_fixed(x, y);
  for (double c : {0.1, 3.0, 10.0}) {
    const auto est = estimate_fixed(x, c * y);
    CHECK(rel_diff(est.Wb_hat, c * c * base.Wb_hat) < 1e-12);
    CHECK(rel_diff(est.Sigma_e_hat, c * c * base.Sigma_e_hat) < 1e-12);
    CHECK(rel_diff(est.rho2, c * c * base.rho2) < 1e-12);
    CHECK(rel_diff(est.sigma2, c * c * base.sigma2) < 1e-12);
    CHECK(rel_diff(est.r2, base.r2) < 1e-12);
  }
}

TEST_CASE("estimate_fixed: joint row permutation") {
  const Matrix x = random_matrix(50, 10, 5);
  const Matrix y = random_matrix(50, 4, 6);
  const auto perm = snr::test::random_permutation(50, 7);
  const auto a = estimate_fixed(x, y);
  const auto b = estimate_fixed(snr::test::permute_rows(x, perm), snr::test::permute_rows(y, perm));
  CHECK(rel_diff(a.Wb_hat, b.Wb_hat) < 1e-12);
  CHECK(rel_diff(a.Sigma_e_hat, b.Sigma_e_hat) < 1e-12);
  CHECK(rel_diff(a.r2, b.r2) < 1e-12);
}

TEST_CASE("estimate_fixed: unbiased over (X, E) draws") {
  const Eigen::Index n = 200, p = 100, q = 5;
  const Matrix b = gen_coeff_sparse(p, q, 1.0);
  const SymMatrix sigma_e = make_sigma_e(q, 0.5, 0.5, 17);
  const SymMatrix wb = b.transpose() * b;
  const int draws = 10000;

  Matrix sum_w = Matrix::Zero(q, q), sumsq_w = Matrix::Zero(q, q);
  Matrix sum_e = Matrix::Zero(q, q), sumsq_e = Matrix::Zero(q, q);
  double s_rho = 0, ss_rho = 0, s_sig = 0, ss_sig = 0;
  for (int d = 0; d < draws; ++d) {
    const Matrix x = gen_gaussian_design(n, p, std::nullopt, derive_seed(99, d, Stream::kDesign));
    const Matrix y = x * b + gen_noise(n, Homoskedastic{sigma_e}, derive_seed(99, d, Stream::kNoise));
    const auto est = estimate_fixed(x, y);
    sum_w += est.Wb_hat;
    sumsq_w += est.Wb_hat.cwiseAbs2();
    sum_e += est.Sigma_e_hat;
    sumsq_e += est.Sigma_e_hat.cwiseAbs2();
    s_rho += est.rho2;
    ss_rho += est.rho2 * est.rho2;
    s_sig += est.sigma2;
    ss_sig += est.sigma2 * est.sigma2;
  }
  const double k = draws;
  auto se = [&](double s, double ss) { return std::sqrt((ss - s * s / k) / (k - 1) / k); };
  CHECK(std::abs(s_rho / k - 1.0) < 3 * se(s_rho, ss_rho));
  CHECK(std::abs(s_sig / k - 0.5) < 3 * se(s_sig, ss_sig));
  int misses = 0;
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      if (std::abs(sum_w(i, j) / k - wb(i, j)) > 4 * se(sum_w(i, j), sumsq_w(i, j))) ++misses;
      if (std::abs(sum_e(i, j) / k - sigma_e(i, j)) > 4 * se(sum_e(i, j), sumsq_e(i, j))) ++misses;
    }
  }
  CHECK(misses == 0);
}

TEST_CASE("asymptotic_variance_fixed: n = p = q = 1 hand values") {
  const SymMatrix wb = SymMatrix::Zero(1, 1);
  const SymMatrix se = SymMatrix::Identity(1, 1);
  const auto v = asymptotic_variance_fixed(1, 1, 1, wb, se, 0.0, 1.0, 0.0, 0.95);
  CHECK(v.V11 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v.V22 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(v.V12 == doctest::Approx(-0.5).epsilon(1e-14));
  // rho2 = 0, sigma2 = 1: only the V22 term survives.
  CHECK(v.sigma_r2 == doctest::Approx(v.V22).epsilon(1e-14));
  CHECK(v.se_r2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("asymptotic_variance_fixed: coefficients by unit-basis evaluation") {
  const Eigen::Index n = 10, p = 5;
  const double nd = n, pd = p;
  auto eval = [&](double w, double s) {
    return asymptotic_variance_fixed(n, p, 1, SymMatrix::Constant(1, 1, w),
                                     SymMatrix::Constant(1, 1, s), 1.0, 1.0, 0.5, 0.95);
  };
  const auto a = eval(1, 0), c = eval(0, 1), ac = eval(1, 1);
  const double k = 2.0 / ((nd + 1) * (nd + 1));
  struct Row { double w2, ws, s2; };
  const Row v11{k * (nd * nd + nd * pd), k * 2 * pd * nd, k * (nd * nd + nd * pd)};
  const Row v22{k * (4 * nd * nd + nd * pd), k * (2 * nd * nd + 2 * pd * nd), k * pd * nd};
  const Row v12{-k * (2 * nd * nd + nd * pd), -k * 2 * nd * pd, -k * pd * nd};
  CHECK(a.V11 == doctest::Approx(v11.w2));
  CHECK(c.V11 == doctest::Approx(v11.s2));
  CHECK(ac.V11 - a.V11 - c.V11 == doctest::Approx(v11.ws));
  CHECK(a.V22 == doctest::Approx(v22.w2));
  CHECK(c.V22 == doctest::Approx(v22.s2));
  CHECK(ac.V22 - a.V22 - c.V22 == doctest::Approx(v22.ws));
  CHECK(a.V12 == doctest::Approx(v12.w2));
  CHECK(c.V12 == doctest::Approx(v12.s2));
  CHECK(ac.V12 - a.V12 - c.V12 == doctest::Approx(v12.ws));
}

TEST_CASE("asymptotic_variance_fixed: delta method and interval") {
  const SymMatrix wb = ar1_matrix(3, 0.8);
  const SymMatrix se = 0.5 * SymMatrix::Identity(3, 3);
  const double rho2 = 1.0, sigma2 = 0.5, r2 = 2.0 / 3.0;
  const auto v = asymptotic_variance_fixed(400, 100, 3, wb, se, rho2, sigma2, r2, 0.95);
  const double t4 = std::pow(rho2 + sigma2, 4);
  const double expect = (rho2 * rho2 * v.V11 + sigma2 * sigma2 * v.V22 -
                         2 * rho2 * sigma2 * v.V12) / t4;
  CHECK(v.sigma_r2 == doctest::Approx(expect).epsilon(1e-14));
  CHECK(v.se_r2 == doctest::Approx(std::sqrt(expect / 400)).epsilon(1e-14));
  CHECK(v.ci_low == doctest::Approx(r2 - 1.959963984540054 * v.se_r2).epsilon(1e-12));
  CHECK(v.ci_high == doctest::Approx(r2 + 1.959963984540054 * v.se_r2).epsilon(1e-12));
  CHECK(v.V11 >= 0);
  CHECK(v.V22 >= 0);
  CHECK_FALSE(v.variance_floored);

  CHECK_THROWS_AS(asymptotic_variance_fixed(400, 100, 3, wb, se, rho2, sigma2, r2, 1.0),
                  InvalidParameter);
  CHECK_THROWS_AS(asymptotic_variance_fixed(400, 100, 3, wb, se, 0.0, 0.0, r2, 0.95),
                  InvalidParameter);
}

TEST_CASE("variance flooring and clamping flags") {
  // Indefinite plug-ins can make the delta-method variance negative.
  const auto v = finish_variance(-1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 10, 0.95);
  CHECK(v.variance_floored);
  CHECK(v.sigma_r2 == kVarianceFloor);
  CHECK(v.se_r2 == doctest::Approx(std::sqrt(kVarianceFloor / 10)));
  const auto ok = finish_variance(1.0, 0.0, 1.0, 1.0, 1.0, 0.5, 10, 0.95);
  CHECK_FALSE(ok.variance_floored);
  AsymptoticVariance c;
  c.ci_low = -0.2;
  c.ci_high = 0.4;
  clamp_interval(c);
  CHECK(c.clamped);
  CHECK(c.ci_low == 0.0);
  CHECK(c.ci_high == 0.4);
  AsymptoticVariance inside;
  inside.ci_low = 0.2;
  inside.ci_high = 0.4;
  clamp_interval(inside);
  CHECK_FALSE(inside.clamped);
}

TEST_CASE("exact_covariance_fixed: hand values") {
  const auto one = exact_covariance_fixed(1, 1, 1, SymMatrix::Zero(1, 1), SymMatrix::Identity(1, 1));
  CHECK(one.var_sigma2 == doctest::Approx(3.5).epsilon(1e-14));

  const Eigen::Index n = 7, p = 4, q = 3;
  const double nd = n, pd = p, qd = q;
  const auto z = exact_covariance_fixed(n, p, q, SymMatrix::Zero(q, q), SymMatrix::Identity(q, q));
  const double expect = 2.0 / (qd * qd * (nd + 1) * (nd + 1) * nd) *
                        ((nd * nd + nd * pd + 2 * nd + pd + 1) * qd + pd * qd * qd);
  CHECK(z.var_sigma2 == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("exact_covariance_fixed: approaches the leading-order form") {
  const Eigen::Index n = 2000, p = 2000, q = 2;
  const Matrix a = random_matrix(q, q, 21);
  const SymMatrix wb = a * a.transpose();
  const SymMatrix se = SymMatrix::Identity(q, q);
  const auto exact = exact_covariance_fixed(n, p, q, wb, se);
  const auto asym = asymptotic_variance_fixed(n, p, q, wb, se, 1.0, 1.0, 0.5, 0.95);
  const double nd = n;
  CHECK(rel_diff(nd * exact.var_sigma2, asym.V11) < 0.01);
  CHECK(rel_diff(nd * exact.var_rho2, asym.V22) < 0.01);
  CHECK(rel_diff(nd * exact.cov, asym.V12) < 0.01);
}
