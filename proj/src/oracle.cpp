#include "snr/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "snr/errors.hpp"
#include "snr/fixed_effects.hpp"
#include "snr/montecarlo.hpp"
#include "snr/parallel.hpp"
#include "snr/random_effects.hpp"

namespace snr {

namespace {

constexpr std::size_t kChunks = 64;

// Running sums of a fixed number of statistics.
template <std::size_t K>
struct Sums {
  std::array<double, K> s{};
  std::array<double, K> ss{};
  std::int64_t count = 0;

  void add(const std::array<double, K>& v) {
    for (std::size_t k = 0; k < K; ++k) {
      s[k] += v[k];
      ss[k] += v[k] * v[k];
    }
    ++count;
  }
  void merge(const Sums& o) {
    for (std::size_t k = 0; k < K; ++k) {
      s[k] += o.s[k];
      ss[k] += o.ss[k];
    }
    count += o.count;
  }
  double mean(std::size_t k) const { return s[k] / static_cast<double>(count); }
  double mc_se(std::size_t k) const {
    const double c = static_cast<double>(count);
    if (count < 2) return 0.0;
    const double var = std::max(0.0, (ss[k] - s[k] * s[k] / c) / (c - 1.0));
    return std::sqrt(var / c);
  }
};

OracleReport make_report(std::string name, double analytic, double empirical, double mc_se,
                         std::int64_t draws, double rel_tol, double se_mult) {
  OracleReport r;
  r.name = std::move(name);
  r.analytic = analytic;
  r.empirical = empirical;
  r.mc_se = mc_se;
  r.draws = draws;
  r.rel_tol = rel_tol;
  r.se_mult = se_mult;
  r.pass = oracle_pass(analytic, empirical, mc_se, rel_tol, se_mult);
  return r;
}

std::int64_t chunk_draws(std::int64_t draws, std::size_t chunk) {
  const auto base = draws / static_cast<std::int64_t>(kChunks);
  const auto extra = draws % static_cast<std::int64_t>(kChunks);
  return base + (static_cast<std::int64_t>(chunk) < extra ? 1 : 0);
}

}  // namespace

bool oracle_pass(double analytic, double empirical, double mc_se, double rel_tol,
                 double se_mult) {
  const double tol = std::max(se_mult * mc_se, rel_tol * std::abs(analytic));
  return std::abs(empirical - analytic) <= tol;
}

WishartMoments wishart_moments(Eigen::Index n_, Eigen::Index p_, const Vector& alpha,
                               const Vector& beta) {
  const double n = static_cast<double>(n_);
  const double p = static_cast<double>(p_);
  const double bb = beta.squaredNorm();
  const double aa = alpha.squaredNorm();
  const double ab2 = alpha.dot(beta) * alpha.dot(beta);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, p2 = p * p;
  WishartMoments m{};
  m.quad = n * bb;
  m.trace_quad = (p * n2 + 2 * n) * bb;
  m.quad2 = (p * n + n2 + n) * bb;
  m.quad3 = (p2 * n + 3 * p * n2 + 3 * p * n + n3 + 3 * n2 + 4 * n) * bb;
  m.cross11 = 2 * n * ab2 + n2 * aa * bb;
  m.cross12 = (4 * n2 + 2 * n * p + 4 * n) * ab2 + (n3 + n2 * p + n2 + 2 * n) * aa * bb;
  m.cross22 = (8 * n3 + 10 * n2 * p + 20 * n2 + 2 * n * p2 + 10 * n * p + 20 * n) * ab2 +
              (n4 + 2 * p * n3 + 2 * n3 + p2 * n2 + 2 * p * n2 + 11 * n2 + 6 * p * n + 10 * n) *
                  aa * bb;
  return m;
}

std::vector<OracleReport> wishart_moment_oracle(Eigen::Index n, Eigen::Index p,
                                                const Vector& alpha, const Vector& beta,
                                                std::int64_t draws, std::uint64_t seed,
                                                unsigned workers) {
  if (n < 1 || p < 1) throw InvalidParameter("wishart_moment_oracle: n and p must be >= 1");
  if (alpha.size() != p || beta.size() != p) {
    throw DimensionMismatch("wishart_moment_oracle: alpha and beta must have length p");
  }
  if (draws < 1000) throw InvalidParameter("wishart_moment_oracle: draws must be >= 1000");

  std::vector<Sums<7>> chunks(kChunks);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    Rng rng = make_rng(derive_seed(seed, c, Stream::kOracle));
    std::normal_distribution<double> normal;
    Matrix x(n, p);
    const std::int64_t count = chunk_draws(draws, c);
    for (std::int64_t d = 0; d < count; ++d) {
      for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
      }
      const Matrix w = x.transpose() * x;
      const Vector wa = w * alpha;
      const Vector wb = w * beta;
      const double awa = alpha.dot(wa);
      const double bwb = beta.dot(wb);
      const double aw2a = wa.squaredNorm();
      const double bw2b = wb.squaredNorm();
      const double bw3b = wb.dot(w * wb);
      chunks[c].add({bwb, w.trace() * bwb, bw2b, bw3b, awa * bwb, awa * bw2b, aw2a * bw2b});
    }
  });
  Sums<7> total;
  for (const auto& c : chunks) total.merge(c);

  const WishartMoments m = wishart_moments(n, p, alpha, beta);
  const std::array<std::pair<const char*, double>, 7> rows = {{
      {"E[b'Wb]", m.quad},
      {"E[tr(W) b'Wb]", m.trace_quad},
      {"E[b'W^2b]", m.quad2},
      {"E[b'W^3b]", m.quad3},
      {"E[a'Wa b'Wb]", m.cross11},
      {"E[a'Wa b'W^2b]", m.cross12},
      {"E[a'W^2a b'W^2b]", m.cross22},
  }};
  std::vector<OracleReport> out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.push_back(make_report(rows[k].first, rows[k].second, total.mean(k), total.mc_se(k),
                              draws, 0.02, 4.0));
  }
  return out;
}

std::vector<OracleReport> conditional_moment_oracle(const Matrix& x, const SymMatrix& sigma_b,
                                                    const NoiseModel& noise, std::int64_t draws,
                                                    std::uint64_t seed, unsigned workers) {
  const Eigen::Index n = x.rows(), p = x.cols(), q = sigma_b.rows();
  if (noise_dim(noise) != q) throw DimensionMismatch("conditional_moment_oracle: q mismatch");
  if (draws < 1000) throw InvalidParameter("conditional_moment_oracle: draws must be >= 1000");
  const double nd = static_cast<double>(n), pd = static_cast<double>(p);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
  for (Eigen::Index k = 0; k < q; ++k) {
    for (Eigen::Index l = k; l < q; ++l) entries.emplace_back(k, l);
  }
  const std::size_t ne = entries.size();

  // Per-draw values, reduced in draw order afterwards.
  Matrix yty(draws, static_cast<Eigen::Index>(ne));
  Matrix yxxy(draws, static_cast<Eigen::Index>(ne));
  parallel_for(static_cast<std::size_t>(draws), workers, [&](std::size_t d) {
    const Matrix b = gen_coeff_random(p, q, sigma_b, derive_seed(seed, d, Stream::kCoefficients));
    const Matrix e = gen_noise(n, noise, derive_seed(seed, d, Stream::kNoise));
    const Matrix y = x * b + e;
    const CrossProducts cp = cross_products(x, y);
    for (std::size_t j = 0; j < ne; ++j) {
      const auto [k, l] = entries[j];
      yty(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = cp.YtY(k, l) / nd;
      yxxy(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = cp.YtXXtY(k, l) / (nd * nd);
    }
  });

  const Matrix s = x.transpose() * x / nd;
  const double g1 = s.trace() / pd;
  const double g2 = (s * s).trace() / pd;
  const SymMatrix mean_yty = average_noise_covariance(noise) + g1 * sigma_b;
  SymMatrix lambda = SymMatrix::Zero(q, q);
  for (Eigen::Index i = 0; i < n; ++i) lambda += x.row(i).squaredNorm() * row_covariance(noise, i);
  const SymMatrix mean_yxxy = lambda / (nd * nd) + g2 * sigma_b;

  auto report = [&](const Matrix& vals, Eigen::Index j, const std::string& label,
                    double analytic) {
    double sum = 0.0, sumsq = 0.0;
    for (Eigen::Index d = 0; d < vals.rows(); ++d) {
      sum += vals(d, j);
      sumsq += vals(d, j) * vals(d, j);
    }
    const double c = static_cast<double>(draws);
    const double mean = sum / c;
    const double var = c > 1 ? std::max(0.0, (sumsq - sum * sum / c) / (c - 1.0)) : 0.0;
    return make_report(label, analytic, mean, std::sqrt(var / c), draws, 0.0, 4.0);
  };

  std::vector<OracleReport> out;
  for (std::size_t j = 0; j < ne; ++j) {
    const auto [k, l] = entries[j];
    const std::string idx = "(" + std::to_string(k) + "," + std::to_string(l) + ")";
    out.push_back(report(yty, static_cast<Eigen::Index>(j), "E[Y'Y/n|X]" + idx, mean_yty(k, l)));
  }
  for (std::size_t j = 0; j < ne; ++j) {
    const auto [k, l] = entries[j];
    const std::string idx = "(" + std::to_string(k) + "," + std::to_string(l) + ")";
    out.push_back(
        report(yxxy, static_cast<Eigen::Index>(j), "E[Y'XX'Y/n^2|X]" + idx, mean_yxxy(k, l)));
  }
  return out;
}

std::vector<OracleReport> variance_formula_oracle(const ScenarioConfig& config,
                                                  Eigen::Index reps, double rel_tol,
                                                  unsigned workers) {
  if (reps < 500) throw InvalidParameter("variance_formula_oracle: reps must be >= 500");
  const SimulationPlan plan = prepare_simulation(config);
  const auto outcomes = run_replications(plan, reps, workers);
  const GroundTruth truth = simulate_dataset(plan, 0).truth;

  std::vector<double> a, b, kappa;
  std::array<double, 4> g{};
  for (const auto& o : outcomes) {
    if (o.failed) continue;
    const double root_n = std::sqrt(static_cast<double>(config.n));
    a.push_back(root_n * o.sigma2_hat);
    b.push_back(root_n * o.rho2_hat);
    kappa.push_back(o.true_kappa);
    g[0] += o.moments.g1;
    g[1] += o.moments.g2;
    g[2] += o.moments.g3;
    g[3] += o.moments.g4;
  }
  const std::size_t k = a.size();
  if (k < 2) throw EmptyInput("variance_formula_oracle: fewer than two usable replications");
  const double kd = static_cast<double>(k);

  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= kd;
  mb /= kd;
  // Sample (co)variances and the MC standard error of each, from the spread
  // of the centred products.
  auto moment = [&](const std::vector<double>& u, double mu, const std::vector<double>& v,
                    double mv) {
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double t = (u[i] - mu) * (v[i] - mv);
      s += t;
      ss += t * t;
    }
    const double mean = s / kd;
    const double var = std::max(0.0, ss / kd - mean * mean);
    return std::pair<double, double>{s / (kd - 1.0), std::sqrt(var / kd)};
  };
  const auto [v11, se11] = moment(a, ma, a, ma);
  const auto [v22, se22] = moment(b, mb, b, mb);
  const auto [v12, se12] = moment(a, ma, b, mb);

  double V11 = 0.0, V12 = 0.0, V22 = 0.0, V11_plain = 0.0;
  bool control = false;
  if (config.model == Model::Fixed) {
    const SymMatrix wb = truth.B.transpose() * truth.B;
    const auto v = asymptotic_variance_fixed(config.n, config.p, config.q, wb, truth.Sigma_e_bar,
                                             truth.rho2, truth.sigma2, truth.r2, config.level);
    V11 = v.V11;
    V12 = v.V12;
    V22 = v.V22;
  } else {
    SpectralMoments m;
    m.g1 = g[0] / kd;
    m.g2 = g[1] / kd;
    m.g3 = g[2] / kd;
    m.g4 = g[3] / kd;
    m.aspect = static_cast<double>(config.p) / static_cast<double>(config.n);
    m.denom = m.g2 - m.aspect * m.g1 * m.g1;
    double kappa_mean = 0.0;
    for (double x : kappa) kappa_mean += x;
    kappa_mean /= kd;
    const VEntries v = random_effects_v(m, *plan.sigma_b, truth.Sigma_e_bar, config.q);
    V11_plain = v.V11;
    V11 = v.V11 + kappa_coefficient(m, config.q) * kappa_mean;
    V12 = v.V12;
    V22 = v.V22;
    control = kappa_mean > 0.0;
  }

  const std::string prefix = config.id + " ";
  std::vector<OracleReport> out;
  out.push_back(make_report(prefix + "V11", V11, v11, se11, static_cast<std::int64_t>(k), rel_tol, 0.0));
  out.push_back(make_report(prefix + "V12", V12, v12, se12, static_cast<std::int64_t>(k), rel_tol, 0.0));
  out.push_back(make_report(prefix + "V22", V22, v22, se22, static_cast<std::int64_t>(k), rel_tol, 0.0));
  if (control) {
    auto r = make_report(prefix + "V11 without kappa", V11_plain, v11, se11,
                         static_cast<std::int64_t>(k), rel_tol, 0.0);
    r.expect_pass = false;
    out.push_back(r);
  }
  return out;
}

}  // namespace snr

namespace snr {

namespace {

void prefix_names(std::vector<OracleReport>& reports, const std::string& prefix) {
  for (auto& r : reports) r.name = prefix + r.name;
}

}  // namespace

bool all_ok(const std::vector<OracleReport>& reports) {
  for (const auto& r : reports) {
    if (!r.ok()) return false;
  }
  return true;
}

std::vector<OracleReport> wishart_suite(std::int64_t draws, std::uint64_t seed,
                                        unsigned workers) {
  if (draws <= 0) draws = 200000;
  const Eigen::Index n = 20, p = 5;
  Vector alpha = Vector::Zero(p), beta = Vector::Zero(p);
  alpha(0) = 1.0;
  beta(0) = 0.6;
  beta(1) = 0.8;
  return wishart_moment_oracle(n, p, alpha, beta, draws, seed, workers);
}

std::vector<OracleReport> conditional_suite(std::int64_t draws, std::uint64_t seed,
                                            unsigned workers) {
  if (draws <= 0) draws = 10000;
  const Eigen::Index n = 50, p = 20, q = 3;
  const Matrix x = gen_gaussian_design(n, p, std::nullopt, derive_seed(seed, 0, Stream::kDesign));
  const SymMatrix sigma_b = ar1_matrix(q, 0.8);
  const SymMatrix sigma_e = make_sigma_e(q, 0.5, 0.5, derive_seed(seed, 0, Stream::kPermutation));
  const auto nu = sample_nu(n, derive_seed(seed, 0, Stream::kNu));

  std::vector<OracleReport> out;
  auto run = [&](const std::string& label, const SymMatrix& sb, const NoiseModel& noise,
                 std::uint64_t tag) {
    auto r = conditional_moment_oracle(x, sb, noise, draws, derive_seed(seed, tag, Stream::kOracle),
                                       workers);
    prefix_names(r, label + " ");
    out.insert(out.end(), r.begin(), r.end());
  };
  run("noise-only", SymMatrix::Zero(q, q), Homoskedastic{sigma_e}, 1);
  run("homoskedastic", sigma_b, Homoskedastic{sigma_e}, 2);
  run("scalar", sigma_b, ScalarHetero{sigma_e, nu}, 3);
  return out;
}

std::vector<ScenarioConfig> variance_suite_configs(std::uint64_t seed) {
  ScenarioConfig fixed;
  fixed.id = "fixed-300x300";
  fixed.model = Model::Fixed;
  fixed.n = 300;
  fixed.p = 300;
  fixed.q = 5;
  fixed.design = Design::Gaussian;
  fixed.coeff = Coeff::Sparse;
  fixed.master_seed = derive_seed(seed, 1, Stream::kOracle);

  ScenarioConfig random = fixed;
  random.id = "random-500x250";
  random.model = Model::Random;
  random.n = 500;
  random.p = 250;
  random.q = 10;
  random.coeff = Coeff::Random;
  random.master_seed = derive_seed(seed, 2, Stream::kOracle);

  ScenarioConfig hetero = random;
  hetero.id = "random-scalar-500x250";
  hetero.noise = NoiseKind::ScalarHetero;
  hetero.hetero = HeteroCorrection::Scalar;
  // Noise-dominated, so the kappa term is a visible share of V11.
  hetero.rho2 = 0.25;
  hetero.sigma2 = 1.0;
  hetero.master_seed = derive_seed(seed, 3, Stream::kOracle);
  return {fixed, random, hetero};
}

std::vector<OracleReport> variance_suite(Eigen::Index reps, std::uint64_t seed,
                                         unsigned workers) {
  if (reps <= 0) reps = 2000;
  std::vector<OracleReport> out;
  for (const auto& c : variance_suite_configs(seed)) {
    auto r = variance_formula_oracle(c, reps, 0.15, workers);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace snr
