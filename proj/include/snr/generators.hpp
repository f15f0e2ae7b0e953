#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "snr/matrix_stats.hpp"
#include "snr/scenario.hpp"
#include "snr/seeding.hpp"

namespace snr {

// Noise models. Row i of E is N(0, Sigma_i).
struct Homoskedastic {
  SymMatrix sigma_e;
};

// Sigma_i = nu_i * Sigma_e with sum(nu) = n.
struct ScalarHetero {
  SymMatrix sigma_e;
  std::vector<double> nu;
};

// Rows of one group; empty nu means nu_i = 1 for every row.
struct NoiseGroup {
  Eigen::Index size = 0;
  SymMatrix sigma_e;
  std::vector<double> nu;
};

// Contiguous row blocks, each with its own covariance.
struct Subgroup {
  std::vector<NoiseGroup> groups;
};

using NoiseModel = std::variant<Homoskedastic, ScalarHetero, Subgroup>;

Eigen::Index noise_dim(const NoiseModel& model);
/// Number of rows the model describes; nullopt for homoskedastic noise.
std::optional<Eigen::Index> noise_rows(const NoiseModel& model);
/// Sigma_i for row i.
SymMatrix row_covariance(const NoiseModel& model, Eigen::Index i);
/// (1/n) sum_i Sigma_i; for homoskedastic noise, Sigma_e.
SymMatrix average_noise_covariance(const NoiseModel& model);
/// kappa_tot = sum_kl (1/n) sum_i (sigma_i,kl - mean_kl)^2 via the closed forms
/// of each model.
double true_kappa_tot(const NoiseModel& model);

struct GroundTruth {
  Matrix B;
  double rho2 = 0.0;
  double sigma2 = 0.0;
  double r2 = 0.0;
  std::optional<SymMatrix> Sigma_b;
  SymMatrix Sigma_e_bar;
  NoiseModel noise;
  double kappa_tot = 0.0;
};

struct SimulatedData {
  Matrix X;
  Matrix Y;
  GroundTruth truth;
};

Matrix gen_gaussian_design(Eigen::Index n, Eigen::Index p,
                           const std::optional<SymMatrix>& sigma, std::uint64_t seed);

/// Raw genotype counts in {0,1,2}; `freq` pins every allele frequency, otherwise
/// each column draws f ~ Unif[0.05, 0.5]. Constant columns are redrawn.
Matrix gen_snp_genotypes(Eigen::Index n, Eigen::Index p, std::uint64_t seed,
                         std::optional<double> freq = std::nullopt);
/// Column-standardized genotypes (mean 0, divisor-n variance 1).
Matrix gen_snp_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed);
void standardize_columns(Matrix& x);

/// Student-t(7) entries scaled to unit variance, then right-multiplied by
/// sym_factor(sigma)^T.
Matrix gen_t7_design(Eigen::Index n, Eigen::Index p, const std::optional<SymMatrix>& sigma,
                     std::uint64_t seed);

Matrix gen_coeff_sparse(Eigen::Index p, Eigen::Index q, double rho2);
Matrix gen_coeff_dense(Eigen::Index p, Eigen::Index q, const SymMatrix& sigma_b, double rho2,
                       std::uint64_t seed);
Matrix gen_coeff_random(Eigen::Index p, Eigen::Index q, const SymMatrix& sigma_b,
                        std::uint64_t seed);

/// Gamma^{1/2} (phi^|i-j|) Gamma^{1/2} scaled to trace q * sigma2, with the
/// diagonal of Gamma a seeded permutation of (1, 2^-0.5, ..., q^-0.5).
SymMatrix make_sigma_e(Eigen::Index q, double sigma2, double phi, std::uint64_t seed);
/// Same construction with an explicit Gamma diagonal.
SymMatrix make_sigma_e_from_gamma(const Vector& gamma, double sigma2, double phi);
Vector gamma_permutation(Eigen::Index q, std::uint64_t seed);

/// nu_i = theta |w_i|, w_i ~ N(0, 9), theta fixed so that sum(nu) = n.
std::vector<double> sample_nu(Eigen::Index n, std::uint64_t seed);
/// (1/n) sum (nu_i - 1)^2.
double eta_of(const std::vector<double>& nu);

Matrix gen_noise(Eigen::Index n, const NoiseModel& model, std::uint64_t seed);

// Per-scenario pieces that stay fixed across replications: design factor,
// Gamma permutation, dense coefficients, group covariances.
struct SimulationPlan {
  ScenarioConfig config;
  std::optional<Matrix> design_factor;
  SymMatrix sigma_e;                       // homoskedastic / scalar models
  std::vector<SymMatrix> group_sigma_e;    // subgroup model
  std::optional<SymMatrix> sigma_b;        // random and dense coefficients
  std::optional<Matrix> fixed_B;           // sparse and dense_fixed coefficients
};

SimulationPlan prepare_simulation(const ScenarioConfig& config);
SimulatedData simulate_dataset(const SimulationPlan& plan, std::uint64_t rep_index);
SimulatedData simulate_dataset(const ScenarioConfig& config, std::uint64_t rep_index,
                               std::uint64_t master_seed);

}  // namespace snr
