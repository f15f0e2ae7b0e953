#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snr/generators.hpp"
#include "snr/scenario.hpp"

namespace snr {

struct OracleReport {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double mc_se = 0.0;
  std::int64_t draws = 0;
  double rel_tol = 0.02;
  double se_mult = 4.0;  // 0 = relative tolerance only
  bool pass = false;
  // Controls are comparisons that should fail; a passing control means the
  // oracle cannot tell the formulas apart.
  bool expect_pass = true;

  bool ok() const { return pass == expect_pass; }
};

/// |empirical - analytic| <= max(se_mult * mc_se, rel_tol * |analytic|).
bool oracle_pass(double analytic, double empirical, double mc_se, double rel_tol,
                 double se_mult);

// Analytic values of the seven Wishart(n, I_p) moment identities.
struct WishartMoments {
  double quad;               // E[b'Wb]
  double trace_quad;         // E[tr(W) b'Wb]
  double quad2;              // E[b'W^2 b]
  double quad3;              // E[b'W^3 b]
  double cross11;            // E[a'Wa b'Wb]
  double cross12;            // E[a'Wa b'W^2 b]
  double cross22;            // E[a'W^2 a b'W^2 b]
};
WishartMoments wishart_moments(Eigen::Index n, Eigen::Index p, const Vector& alpha,
                               const Vector& beta);

std::vector<OracleReport> wishart_moment_oracle(Eigen::Index n, Eigen::Index p,
                                                const Vector& alpha, const Vector& beta,
                                                std::int64_t draws, std::uint64_t seed,
                                                unsigned workers = 0);

/// For fixed X, compares MC means of Y'Y/n and Y'XX'Y/n^2 over fresh (B, E)
/// draws with their conditional expectations, one report per entry k <= l.
std::vector<OracleReport> conditional_moment_oracle(const Matrix& x, const SymMatrix& sigma_b,
                                                    const NoiseModel& noise, std::int64_t draws,
                                                    std::uint64_t seed, unsigned workers = 0);

/// Empirical covariance of sqrt(n) (sigma2_hat, rho2_hat) across replications
/// against V evaluated at the true parameters. Random-effects runs with
/// heteroskedastic noise add a control report for V11 without the kappa term.
std::vector<OracleReport> variance_formula_oracle(const ScenarioConfig& config,
                                                  Eigen::Index reps, double rel_tol = 0.15,
                                                  unsigned workers = 0);

// Standard suites behind `snrmm oracle`. draws / reps <= 0 picks the default
// (2e5 Wishart draws, 1e4 conditional draws, 2000 replications).
std::vector<OracleReport> wishart_suite(std::int64_t draws, std::uint64_t seed,
                                        unsigned workers = 0);
std::vector<OracleReport> conditional_suite(std::int64_t draws, std::uint64_t seed,
                                            unsigned workers = 0);
std::vector<ScenarioConfig> variance_suite_configs(std::uint64_t seed);
std::vector<OracleReport> variance_suite(Eigen::Index reps, std::uint64_t seed,
                                         unsigned workers = 0);

/// True when every report matches its expectation.
bool all_ok(const std::vector<OracleReport>& reports);

}  // namespace snr
