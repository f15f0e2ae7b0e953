#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snr/inference.hpp"
#include "snr/matrix_stats.hpp"
#include "snr/montecarlo.hpp"
#include "snr/oracle.hpp"
#include "snr/scenario.hpp"

namespace snr {

const char* version();

struct EstimateOptions {
  Model model = Model::Fixed;
  HeteroCorrection hetero = HeteroCorrection::None;
  std::vector<Eigen::Index> group_sizes;  // subgroup correction only
  double level = 0.95;
  bool clamp = false;
  bool exact_se = false;  // fixed effects only
};

// One estimate plus the provenance needed to replay it.
struct RunResult {
  Model model = Model::Fixed;
  Eigen::Index n = 0, p = 0, q = 0;
  double rho2 = 0.0;
  double sigma2 = 0.0;
  double r2 = 0.0;
  std::optional<double> r2_clamped;
  AsymptoticVariance variance;
  bool clamped = false;
  std::string se_method = "asymptotic";
  HeteroCorrection hetero = HeteroCorrection::None;
  std::optional<double> eta_hat_raw;
  std::optional<double> eta_hat;
  std::optional<double> kappa_tot_hat;
  std::string x_path;
  std::string y_path;
  std::optional<std::uint64_t> seed;
};

/// Full estimation pipeline behind `snrmm estimate`. Throws ConfigError for
/// option combinations that make no sense, estimator errors otherwise.
RunResult run_estimate(const Matrix& x, const Matrix& y, const EstimateOptions& options);

/// Comma list of group sizes, e.g. "100,100,50".
std::vector<Eigen::Index> parse_group_spec(const std::string& spec);

std::string format_double(double v);

std::string to_text(const RunResult& r);
std::string to_json(const RunResult& r);
std::string to_csv(const RunResult& r);  // header line and one row

std::string to_json(const McSummary& s);
std::string to_csv(const McSummary& s);  // header line and one row

std::string to_table(const std::vector<OracleReport>& reports);

}  // namespace snr
