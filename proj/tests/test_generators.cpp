#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "snr/errors.hpp"
#include "snr/generators.hpp"
#include "support.hpp"

using namespace snr;
using snr::test::rel_diff;

namespace {

Matrix sample_cov(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows());
}

// Direct evaluation of sum_kl (1/n) sum_i (sigma_i,kl - mean_kl)^2.
double kappa_direct(const NoiseModel& model, Eigen::Index n) {
  const Eigen::Index q = noise_dim(model);
  SymMatrix mean = SymMatrix::Zero(q, q);
  for (Eigen::Index i = 0; i < n; ++i) mean += row_covariance(model, i);
  mean /= static_cast<double>(n);
  double k = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) k += (row_covariance(model, i) - mean).squaredNorm();
  return k / static_cast<double>(n);
}

}  // namespace

TEST_CASE("seed derivation is a pure function") {
  CHECK(derive_seed(1, 2, Stream::kNoise) == derive_seed(1, 2, Stream::kNoise));
  CHECK(derive_seed(1, 2, Stream::kNoise) != derive_seed(1, 3, Stream::kNoise));
  CHECK(derive_seed(1, 2, Stream::kNoise) != derive_seed(1, 2, Stream::kDesign));
  CHECK(derive_seed(1, 2, Stream::kNoise) != derive_seed(2, 2, Stream::kNoise));
}

TEST_CASE("gen_gaussian_design") {
  const Matrix x = gen_gaussian_design(10000, 5, std::nullopt, 1);
  CHECK((x.colwise().mean().array().abs() < 4.0 / std::sqrt(10000.0)).all());
  CHECK(x == gen_gaussian_design(10000, 5, std::nullopt, 1));
  CHECK(x != gen_gaussian_design(10000, 5, std::nullopt, 2));

  const SymMatrix s = ar1_matrix(3, 0.5);
  const Matrix y = gen_gaussian_design(100000, 3, s, 3);
  CHECK((sample_cov(y) - s).cwiseAbs().maxCoeff() < 0.02);

  SymMatrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(gen_gaussian_design(10, 2, bad, 1), NotPositiveSemiDefinite);
}

TEST_CASE("gen_snp_design: standardized columns with at most three values") {
  const Matrix x = gen_snp_design(200, 50, 4);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    CHECK(std::abs(col.mean()) < 1e-12);
    CHECK(std::abs(col.squaredNorm() / 200.0 - 1.0) < 1e-10);
    std::set<double> values(col.data(), col.data() + col.size());
    CHECK(values.size() <= 3);
  }
  CHECK(x == gen_snp_design(200, 50, 4));
}

TEST_CASE("gen_snp_genotypes: Hardy-Weinberg frequencies at f = 0.5") {
  const Matrix u = gen_snp_genotypes(100000, 1, 5, 0.5);
  const double n = 100000.0;
  const double f0 = (u.array() == 0.0).count() / n;
  const double f1 = (u.array() == 1.0).count() / n;
  const double f2 = (u.array() == 2.0).count() / n;
  CHECK(std::abs(f0 - 0.25) < 0.01);
  CHECK(std::abs(f1 - 0.5) < 0.01);
  CHECK(std::abs(f2 - 0.25) < 0.01);
}

TEST_CASE("gen_snp_genotypes: tiny n regenerates constant columns") {
  // n = 2 gives constant columns often; every returned column must vary.
  const Matrix u = gen_snp_genotypes(2, 200, 6);
  for (Eigen::Index j = 0; j < u.cols(); ++j) CHECK(u(0, j) != u(1, j));
}

TEST_CASE("gen_t7_design") {
  const Matrix z = gen_t7_design(1000000, 1, std::nullopt, 7);
  const auto col = z.col(0).array();
  const double mean = col.mean();
  const double var = (col - mean).square().mean();
  const double kurt = (col - mean).pow(4).mean() / (var * var);
  CHECK(std::abs(var - 1.0) < 0.01);
  CHECK(kurt > 3.0);
  CHECK(gen_t7_design(50, 4, std::nullopt, 8) == gen_t7_design(50, 4, std::nullopt, 8));
}

TEST_CASE("gen_coeff_sparse") {
  CHECK(gen_coeff_sparse(1, 1, 2.0)(0, 0) == doctest::Approx(std::sqrt(2.0)));
  const Matrix b = gen_coeff_sparse(2, 1, 1.0);
  CHECK(b(0, 0) == doctest::Approx(1.0 / std::sqrt(1.64)).epsilon(1e-14));
  CHECK(b(1, 0) == doctest::Approx(0.8 / std::sqrt(1.64)).epsilon(1e-14));
  for (auto [p, q] : {std::pair<Eigen::Index, Eigen::Index>{100, 20}, {1000, 20}}) {
    const Matrix c = gen_coeff_sparse(p, q, 1.0);
    CHECK(std::abs(c.squaredNorm() / static_cast<double>(q) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(gen_coeff_sparse(3, 2, 0.0), InvalidParameter);
}

TEST_CASE("gen_coeff_dense") {
  const SymMatrix sb = ar1_matrix(4, 0.8);
  const Matrix b = gen_coeff_dense(30, 4, sb, 1.5, 9);
  CHECK(std::abs(b.squaredNorm() / 4.0 - 1.5) < 1e-12);
  CHECK(b == gen_coeff_dense(30, 4, sb, 1.5, 9));
  CHECK_THROWS_AS(gen_coeff_dense(30, 4, sb, -1.0, 9), InvalidParameter);

  // Before rescaling the draw is gen_coeff_random: E tr(B^T B)/q = tr(Sigma_b)/q.
  double s = 0, ss = 0;
  const int draws = 1000;
  for (int d = 0; d < draws; ++d) {
    const double v = gen_coeff_random(30, 4, sb, 1000 + d).squaredNorm() / 4.0;
    s += v;
    ss += v * v;
  }
  const double mean = s / draws, se = std::sqrt((ss / draws - mean * mean) / draws);
  CHECK(std::abs(mean - sb.trace() / 4.0) < 3 * se);
}

TEST_CASE("gen_coeff_random") {
  const SymMatrix sb = ar1_matrix(3, 0.8);
  const int draws = 10000;
  Matrix sum = Matrix::Zero(3, 3), sumsq = Matrix::Zero(3, 3);
  for (int d = 0; d < draws; ++d) {
    const Matrix b = gen_coeff_random(50, 3, sb, 5000 + d);
    const Matrix w = b.transpose() * b;
    sum += w;
    sumsq += w.cwiseAbs2();
  }
  const Matrix mean = sum / draws;
  const Matrix se = ((sumsq / draws - mean.cwiseAbs2()) / draws).cwiseSqrt();
  CHECK(((mean - sb).cwiseAbs().array() <= 4 * se.array()).all());
  CHECK(gen_coeff_random(10, 3, SymMatrix::Zero(3, 3), 1).isZero(0.0));
  CHECK(gen_coeff_random(10, 3, sb, 2) == gen_coeff_random(10, 3, sb, 2));
}

TEST_CASE("make_sigma_e") {
  CHECK(make_sigma_e(1, 0.7, 0.5, 1)(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  const SymMatrix s = make_sigma_e(20, 0.5, 0.5, 2);
  CHECK(std::abs(s.trace() / 20.0 - 0.5) < 1e-12);
  CHECK(s == s.transpose());
  Eigen::SelfAdjointEigenSolver<SymMatrix> es(s);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  Vector gamma(2);
  gamma << 1.0, std::pow(2.0, -0.5);
  const SymMatrix h = make_sigma_e_from_gamma(gamma, 0.5, 0.5);
  const double scale = 2 * 0.5 / 1.70711;
  CHECK(scale == doctest::Approx(0.58579).epsilon(1e-4));
  CHECK(h(0, 0) == doctest::Approx(scale * 1.0).epsilon(1e-4));
  CHECK(h(1, 1) == doctest::Approx(scale * 0.70711).epsilon(1e-4));
  CHECK(h(0, 1) == doctest::Approx(scale * 0.42045).epsilon(1e-4));

  const Vector g = gamma_permutation(6, 3);
  std::vector<double> sorted(g.data(), g.data() + g.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (int k = 0; k < 6; ++k) CHECK(sorted[k] == doctest::Approx(1.0 / std::sqrt(k + 1.0)));

  CHECK_THROWS_AS(make_sigma_e(3, 0.0, 0.5, 1), InvalidParameter);
  CHECK_THROWS_AS(make_sigma_e(3, 0.5, 1.0, 1), InvalidParameter);
}

TEST_CASE("gen_noise: homoskedastic covariance") {
  const Matrix e = gen_noise(100000, Homoskedastic{SymMatrix::Identity(3, 3)}, 10);
  CHECK((sample_cov(e) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("gen_noise: scalar heterogeneity with unit nu matches homoskedastic") {
  const SymMatrix s = make_sigma_e(3, 0.5, 0.5, 11);
  const std::vector<double> ones(50, 1.0);
  CHECK(eta_of(ones) == 0.0);
  CHECK(gen_noise(50, ScalarHetero{s, ones}, 12) == gen_noise(50, Homoskedastic{s}, 12));
}

TEST_CASE("sample_nu: normalization and half-normal eta") {
  const auto nu = sample_nu(100000, 13);
  double total = 0.0;
  for (double v : nu) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(rel_diff(total, 100000.0) < 1e-8);
  CHECK(std::abs(eta_of(nu) - (M_PI / 2 - 1)) < 0.03);
}

TEST_CASE("true_kappa_tot matches direct evaluation") {
  const Eigen::Index n = 60, q = 4;
  const SymMatrix s = make_sigma_e(q, 0.5, 0.5, 14);
  CHECK(true_kappa_tot(Homoskedastic{s}) == 0.0);

  const ScalarHetero sh{s, sample_nu(n, 15)};
  CHECK(rel_diff(true_kappa_tot(sh), kappa_direct(sh, n)) < 1e-10);
  CHECK(rel_diff(true_kappa_tot(sh), eta_of(sh.nu) * frobenius_sq(s)) < 1e-12);

  Subgroup sg{{{20, make_sigma_e(q, 0.5, 0.3, 14), {}},
               {25, make_sigma_e(q, 0.5, 0.6, 14), {}},
               {15, make_sigma_e(q, 0.5, 0.2, 14), {}}}};
  CHECK(rel_diff(true_kappa_tot(sg), kappa_direct(sg, n)) < 1e-10);

  Subgroup with_nu = sg;
  with_nu.groups[1].nu = sample_nu(25, 16);
  CHECK(rel_diff(true_kappa_tot(with_nu), kappa_direct(with_nu, n)) < 1e-10);
}

TEST_CASE("simulate_dataset") {
  ScenarioConfig c;
  c.model = Model::Fixed;
  c.n = 80;
  c.p = 30;
  c.q = 4;
  c.coeff = Coeff::Sparse;
  c.master_seed = 17;
  CHECK(c.true_r2() == doctest::Approx(2.0 / 3.0));

  const auto a = simulate_dataset(c, 3, 17);
  const auto b = simulate_dataset(c, 3, 17);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
  CHECK(a.truth.r2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(a.truth.rho2 - a.truth.B.squaredNorm() / 4.0) < 1e-10);
  CHECK(simulate_dataset(c, 4, 17).X != a.X);

  ScenarioConfig zero = c;
  zero.sigma2 = 0.0;
  const auto z = simulate_dataset(zero, 0, 17);
  CHECK(z.Y == z.X * z.truth.B);
  CHECK(z.truth.r2 == 1.0);
}

TEST_CASE("simulate_dataset: frozen and per-replication pieces") {
  ScenarioConfig c;
  c.model = Model::Fixed;
  c.n = 50;
  c.p = 20;
  c.q = 3;
  c.coeff = Coeff::DenseFixed;
  c.master_seed = 18;
  const auto plan = prepare_simulation(c);
  const auto r0 = simulate_dataset(plan, 0), r1 = simulate_dataset(plan, 1);
  CHECK(r0.truth.B == r1.truth.B);
  CHECK(std::abs(r0.truth.B.squaredNorm() / 3.0 - 1.0) < 1e-12);
  CHECK(r0.X != r1.X);

  ScenarioConfig r = c;
  r.model = Model::Random;
  r.coeff = Coeff::Random;
  r.noise = NoiseKind::ScalarHetero;
  const auto rp = prepare_simulation(r);
  const auto d0 = simulate_dataset(rp, 0), d1 = simulate_dataset(rp, 1);
  CHECK(d0.truth.B != d1.truth.B);
  CHECK(std::get<ScalarHetero>(d0.truth.noise).sigma_e == std::get<ScalarHetero>(d1.truth.noise).sigma_e);
  CHECK(std::get<ScalarHetero>(d0.truth.noise).nu != std::get<ScalarHetero>(d1.truth.noise).nu);
  CHECK(std::abs(d0.truth.rho2 - 1.0) < 1e-10);
  CHECK(std::abs(d0.truth.sigma2 - 0.5) < 1e-10);
  CHECK(d0.truth.kappa_tot > 0.0);

  ScenarioConfig g = r;
  g.noise = NoiseKind::Subgroup;
  g.group_sizes = even_group_sizes(50, 5);
  const auto gd = simulate_dataset(g, 0, 18);
  const auto& sg = std::get<Subgroup>(gd.truth.noise);
  CHECK(sg.groups.size() == 5);
  CHECK(std::abs(gd.truth.sigma2 - 0.5) < 1e-10);
  CHECK(rel_diff(gd.truth.kappa_tot, kappa_direct(gd.truth.noise, 50)) < 1e-10);
}
