#include "snr/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "snr/errors.hpp"

namespace snr {

namespace {

void fill_normal(Matrix& m, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  }
}

void check_psd_dims(const SymMatrix& s, Eigen::Index dim, const char* what) {
  if (s.rows() != dim || s.cols() != dim) {
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(dim) + "x" +
                            std::to_string(dim));
  }
}

Matrix apply_covariance(Matrix z, const std::optional<SymMatrix>& sigma) {
  if (!sigma) return z;
  check_psd_dims(*sigma, z.cols(), "design covariance");
  const Matrix l = sym_factor(*sigma);
  return z * l.transpose();
}

double sparse_entry(Eigen::Index i, Eigen::Index j) {
  const auto lag = static_cast<int>(i > j ? i - j : j - i);
  return std::pow(0.8, lag);
}

}  // namespace

// ---------------------------------------------------------------- noise model

Eigen::Index noise_dim(const NoiseModel& model) {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Subgroup>) {
          return m.groups.empty() ? 0 : m.groups.front().sigma_e.rows();
        } else {
          return m.sigma_e.rows();
        }
      },
      model);
}

std::optional<Eigen::Index> noise_rows(const NoiseModel& model) {
  if (const auto* s = std::get_if<ScalarHetero>(&model)) {
    return static_cast<Eigen::Index>(s->nu.size());
  }
  if (const auto* g = std::get_if<Subgroup>(&model)) {
    Eigen::Index total = 0;
    for (const auto& grp : g->groups) total += grp.size;
    return total;
  }
  return std::nullopt;
}

SymMatrix row_covariance(const NoiseModel& model, Eigen::Index i) {
  if (const auto* h = std::get_if<Homoskedastic>(&model)) return h->sigma_e;
  if (const auto* s = std::get_if<ScalarHetero>(&model)) {
    return s->nu.at(static_cast<std::size_t>(i)) * s->sigma_e;
  }
  const auto& g = std::get<Subgroup>(model);
  Eigen::Index start = 0;
  for (const auto& grp : g.groups) {
    if (i < start + grp.size) {
      const double nu = grp.nu.empty() ? 1.0 : grp.nu.at(static_cast<std::size_t>(i - start));
      return nu * grp.sigma_e;
    }
    start += grp.size;
  }
  throw InvalidParameter("row_covariance: row index out of range");
}

SymMatrix average_noise_covariance(const NoiseModel& model) {
  if (const auto* h = std::get_if<Homoskedastic>(&model)) return h->sigma_e;
  if (const auto* s = std::get_if<ScalarHetero>(&model)) {
    const double mean_nu =
        std::accumulate(s->nu.begin(), s->nu.end(), 0.0) / static_cast<double>(s->nu.size());
    return mean_nu * s->sigma_e;
  }
  const auto& g = std::get<Subgroup>(model);
  const Eigen::Index q = noise_dim(model);
  const double n = static_cast<double>(*noise_rows(model));
  SymMatrix avg = SymMatrix::Zero(q, q);
  for (const auto& grp : g.groups) {
    const double weight =
        grp.nu.empty() ? static_cast<double>(grp.size)
                       : std::accumulate(grp.nu.begin(), grp.nu.end(), 0.0);
    avg += (weight / n) * grp.sigma_e;
  }
  return symmetrize(avg);
}

double eta_of(const std::vector<double>& nu) {
  if (nu.empty()) return 0.0;
  double s = 0.0;
  for (double v : nu) s += (v - 1.0) * (v - 1.0);
  return s / static_cast<double>(nu.size());
}

double true_kappa_tot(const NoiseModel& model) {
  if (std::holds_alternative<Homoskedastic>(model)) return 0.0;
  if (const auto* s = std::get_if<ScalarHetero>(&model)) {
    return eta_of(s->nu) * frobenius_sq(s->sigma_e);
  }
  const auto& g = std::get<Subgroup>(model);
  const SymMatrix avg = average_noise_covariance(model);
  const double n = static_cast<double>(*noise_rows(model));
  double kappa = 0.0;
  for (const auto& grp : g.groups) {
    const double r = static_cast<double>(grp.size) / n;
    kappa += r * frobenius_sq(grp.sigma_e - avg);
    kappa += r * eta_of(grp.nu) * frobenius_sq(grp.sigma_e);
  }
  return kappa;
}

// ------------------------------------------------------------------- designs

Matrix gen_gaussian_design(Eigen::Index n, Eigen::Index p,
                           const std::optional<SymMatrix>& sigma, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidParameter("gen_gaussian_design: n, p must be >= 1");
  Rng rng = make_rng(seed);
  Matrix z(n, p);
  fill_normal(z, rng);
  return apply_covariance(std::move(z), sigma);
}

Matrix gen_snp_genotypes(Eigen::Index n, Eigen::Index p, std::uint64_t seed,
                         std::optional<double> freq) {
  if (n < 2) throw InvalidParameter("gen_snp_genotypes: need n >= 2");
  if (p < 1) throw InvalidParameter("gen_snp_genotypes: need p >= 1");
  if (freq && !(*freq > 0.0 && *freq < 1.0)) {
    throw InvalidParameter("gen_snp_genotypes: allele frequency must lie in (0,1)");
  }
  constexpr int kMaxAttempts = 100;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> freq_dist(0.05, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix u(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      const double f = freq ? *freq : freq_dist(rng);
      const double p0 = (1.0 - f) * (1.0 - f);
      const double p01 = p0 + 2.0 * f * (1.0 - f);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = unit(rng);
        u(i, j) = r < p0 ? 0.0 : (r < p01 ? 1.0 : 2.0);
      }
      const auto col = u.col(j);
      ok = col.maxCoeff() != col.minCoeff();
    }
    if (!ok) {
      throw GenerationFailed("gen_snp_genotypes: column " + std::to_string(j) +
                             " constant after 100 attempts");
    }
  }
  return u;
}

void standardize_columns(Matrix& x) {
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd == 0.0) {
      throw GenerationFailed("standardize_columns: column " + std::to_string(j) +
                             " is constant");
    }
    col /= sd;
  }
}

Matrix gen_snp_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Matrix x = gen_snp_genotypes(n, p, seed);
  standardize_columns(x);
  return x;
}

Matrix gen_t7_design(Eigen::Index n, Eigen::Index p, const std::optional<SymMatrix>& sigma,
                     std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidParameter("gen_t7_design: n, p must be >= 1");
  Rng rng = make_rng(seed);
  std::student_t_distribution<double> t7(7.0);
  const double scale = 1.0 / std::sqrt(7.0 / 5.0);
  Matrix z(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = t7(rng) * scale;
  }
  return apply_covariance(std::move(z), sigma);
}

// -------------------------------------------------------------- coefficients

Matrix gen_coeff_sparse(Eigen::Index p, Eigen::Index q, double rho2) {
  if (!(rho2 > 0.0)) throw InvalidParameter("gen_coeff_sparse: rho2 must be > 0");
  if (p < 1 || q < 1) throw InvalidParameter("gen_coeff_sparse: p, q must be >= 1");
  Matrix b(p, q);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) b(i, j) = sparse_entry(i, j);
  }
  b *= std::sqrt(rho2 * static_cast<double>(q) / b.squaredNorm());
  return b;
}

Matrix gen_coeff_random(Eigen::Index p, Eigen::Index q, const SymMatrix& sigma_b,
                        std::uint64_t seed) {
  if (p < 1 || q < 1) throw InvalidParameter("gen_coeff_random: p, q must be >= 1");
  check_psd_dims(sigma_b, q, "Sigma_b");
  const Matrix l = sym_factor(sigma_b);
  Rng rng = make_rng(seed);
  Matrix z(p, q);
  fill_normal(z, rng);
  return (z * l.transpose()) / std::sqrt(static_cast<double>(p));
}

Matrix gen_coeff_dense(Eigen::Index p, Eigen::Index q, const SymMatrix& sigma_b, double rho2,
                       std::uint64_t seed) {
  if (!(rho2 > 0.0)) throw InvalidParameter("gen_coeff_dense: rho2 must be > 0");
  Matrix b = gen_coeff_random(p, q, sigma_b, seed);
  const double norm2 = b.squaredNorm();
  if (norm2 == 0.0) throw InvalidParameter("gen_coeff_dense: Sigma_b is zero");
  b *= std::sqrt(rho2 * static_cast<double>(q) / norm2);
  return b;
}

// --------------------------------------------------------------------- noise

Vector gamma_permutation(Eigen::Index q, std::uint64_t seed) {
  std::vector<double> g(static_cast<std::size_t>(q));
  for (Eigen::Index k = 0; k < q; ++k) g[static_cast<std::size_t>(k)] = 1.0 / std::sqrt(k + 1.0);
  Rng rng = make_rng(seed);
  std::shuffle(g.begin(), g.end(), rng);
  return Eigen::Map<Vector>(g.data(), q);
}

SymMatrix make_sigma_e_from_gamma(const Vector& gamma, double sigma2, double phi) {
  if (!(sigma2 > 0.0)) throw InvalidParameter("make_sigma_e: sigma2 must be > 0");
  const Eigen::Index q = gamma.size();
  const SymMatrix corr = ar1_matrix(q, phi);
  const Vector root = gamma.array().sqrt();
  SymMatrix s = root.asDiagonal() * corr * root.asDiagonal();
  s *= static_cast<double>(q) * sigma2 / s.trace();
  return symmetrize(s);
}

SymMatrix make_sigma_e(Eigen::Index q, double sigma2, double phi, std::uint64_t seed) {
  if (q < 1) throw InvalidParameter("make_sigma_e: q must be >= 1");
  return make_sigma_e_from_gamma(gamma_permutation(q, seed), sigma2, phi);
}

std::vector<double> sample_nu(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("sample_nu: n must be >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> w(0.0, 3.0);
  std::vector<double> nu(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& v : nu) {
    v = std::abs(w(rng));
    total += v;
  }
  const double theta = static_cast<double>(n) / total;
  for (auto& v : nu) v *= theta;
  return nu;
}

Matrix gen_noise(Eigen::Index n, const NoiseModel& model, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("gen_noise: n must be >= 1");
  if (const auto rows = noise_rows(model); rows && *rows != n) {
    throw DimensionMismatch("gen_noise: model describes " + std::to_string(*rows) +
                            " rows, requested " + std::to_string(n));
  }
  const Eigen::Index q = noise_dim(model);
  Rng rng = make_rng(seed);
  Matrix z(n, q);
  fill_normal(z, rng);

  if (const auto* h = std::get_if<Homoskedastic>(&model)) {
    return z * sym_factor(h->sigma_e).transpose();
  }
  if (const auto* s = std::get_if<ScalarHetero>(&model)) {
    Matrix e = z * sym_factor(s->sigma_e).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      e.row(i) *= std::sqrt(s->nu[static_cast<std::size_t>(i)]);
    }
    return e;
  }
  const auto& g = std::get<Subgroup>(model);
  Matrix e(n, q);
  Eigen::Index start = 0;
  for (const auto& grp : g.groups) {
    if (grp.sigma_e.rows() != q) throw DimensionMismatch("gen_noise: group dimension mismatch");
    e.middleRows(start, grp.size) =
        z.middleRows(start, grp.size) * sym_factor(grp.sigma_e).transpose();
    if (!grp.nu.empty()) {
      for (Eigen::Index i = 0; i < grp.size; ++i) {
        e.row(start + i) *= std::sqrt(grp.nu[static_cast<std::size_t>(i)]);
      }
    }
    start += grp.size;
  }
  return e;
}

// ---------------------------------------------------------------- scenarios

SimulationPlan prepare_simulation(const ScenarioConfig& config) {
  validate(config);
  SimulationPlan plan;
  plan.config = config;
  const std::uint64_t master = config.master_seed;

  if (config.design_cov.ar1) {
    plan.design_factor = sym_factor(ar1_matrix(config.p, config.design_cov.phi));
  }

  const std::uint64_t perm_seed = derive_seed(master, 0, Stream::kPermutation);
  if (config.noise == NoiseKind::Subgroup) {
    Rng rng = make_rng(derive_seed(master, 0, Stream::kGroupPhi));
    std::uniform_real_distribution<double> phi_dist(0.2, 0.6);
    for (std::size_t m = 0; m < config.group_sizes.size(); ++m) {
      const double phi = phi_dist(rng);
      plan.group_sigma_e.push_back(config.sigma2 > 0.0
                                       ? make_sigma_e(config.q, config.sigma2, phi, perm_seed)
                                       : SymMatrix::Zero(config.q, config.q));
    }
  } else {
    plan.sigma_e = config.sigma2 > 0.0
                       ? make_sigma_e(config.q, config.sigma2, config.noise_phi, perm_seed)
                       : SymMatrix::Zero(config.q, config.q);
  }

  switch (config.coeff) {
    case Coeff::Sparse:
      plan.fixed_B = gen_coeff_sparse(config.p, config.q, config.rho2);
      break;
    case Coeff::DenseFixed:
      plan.sigma_b = ar1_matrix(config.q, 0.8);
      plan.fixed_B = gen_coeff_dense(config.p, config.q, *plan.sigma_b, config.rho2,
                                     derive_seed(master, 0, Stream::kDenseCoefficients));
      break;
    case Coeff::Random:
      // tr(ar1) = q, so tr(Sigma_b) / q = rho2.
      plan.sigma_b = SymMatrix(config.rho2 * ar1_matrix(config.q, 0.8));
      break;
  }
  return plan;
}

SimulatedData simulate_dataset(const SimulationPlan& plan, std::uint64_t rep) {
  const ScenarioConfig& c = plan.config;
  const std::uint64_t master = c.master_seed;
  SimulatedData out;

  const std::uint64_t design_seed = derive_seed(master, rep, Stream::kDesign);
  switch (c.design) {
    case Design::Gaussian: out.X = gen_gaussian_design(c.n, c.p, std::nullopt, design_seed); break;
    case Design::Snp: out.X = gen_snp_design(c.n, c.p, design_seed); break;
    case Design::T7: out.X = gen_t7_design(c.n, c.p, std::nullopt, design_seed); break;
  }
  if (plan.design_factor) out.X = out.X * plan.design_factor->transpose();

  GroundTruth& truth = out.truth;
  if (plan.fixed_B) {
    truth.B = *plan.fixed_B;
  } else {
    truth.B = gen_coeff_random(c.p, c.q, *plan.sigma_b,
                               derive_seed(master, rep, Stream::kCoefficients));
  }
  truth.Sigma_b = plan.sigma_b;

  const std::uint64_t nu_seed = derive_seed(master, rep, Stream::kNu);
  switch (c.noise) {
    case NoiseKind::Homoskedastic:
      truth.noise = Homoskedastic{plan.sigma_e};
      break;
    case NoiseKind::ScalarHetero:
      truth.noise = ScalarHetero{plan.sigma_e, sample_nu(c.n, nu_seed)};
      break;
    case NoiseKind::Subgroup: {
      Subgroup sg;
      for (std::size_t m = 0; m < c.group_sizes.size(); ++m) {
        NoiseGroup grp{c.group_sizes[m], plan.group_sigma_e[m], {}};
        if (c.group_eta) grp.nu = sample_nu(grp.size, derive_seed(nu_seed, m, Stream::kNu));
        sg.groups.push_back(std::move(grp));
      }
      truth.noise = std::move(sg);
      break;
    }
  }

  const Matrix e = gen_noise(c.n, truth.noise, derive_seed(master, rep, Stream::kNoise));
  out.Y = out.X * truth.B + e;

  const double qd = static_cast<double>(c.q);
  truth.Sigma_e_bar = average_noise_covariance(truth.noise);
  truth.rho2 = c.model == Model::Fixed ? truth.B.squaredNorm() / qd : truth.Sigma_b->trace() / qd;
  truth.sigma2 = truth.Sigma_e_bar.trace() / qd;
  truth.r2 = truth.rho2 / (truth.rho2 + truth.sigma2);
  truth.kappa_tot = true_kappa_tot(truth.noise);
  return out;
}

SimulatedData simulate_dataset(const ScenarioConfig& config, std::uint64_t rep_index,
                               std::uint64_t master_seed) {
  ScenarioConfig c = config;
  c.master_seed = master_seed;
  return simulate_dataset(prepare_simulation(c), rep_index);
}

}  // namespace snr
