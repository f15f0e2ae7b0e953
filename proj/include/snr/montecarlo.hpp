#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snr/generators.hpp"
#include "snr/inference.hpp"
#include "snr/scenario.hpp"

namespace snr {

// Everything one replication produces. Failed replications carry only the
// error name.
struct RepOutcome {
  bool failed = false;
  std::string failure;
  double rho2_hat = 0.0;
  double sigma2_hat = 0.0;
  double r2_hat = 0.0;
  AsymptoticVariance variance;
  double kappa_hat = 0.0;
  double eta_hat = 0.0;  // only set when a scalar correction ran
  SpectralMoments moments;  // random-effects fits only
  double true_kappa = 0.0;
  double true_r2 = 0.0;
};

struct RepRecord {
  double r2_hat = 0.0;
  double se_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct McSummary {
  std::string id;
  Eigen::Index n = 0, p = 0, q = 0;
  double truth_r2 = 0.0;
  double level = 0.95;
  double mean_r2 = 0.0;
  double emp_se = 0.0;  // NaN with a single usable replication
  double avg_se_hat = 0.0;
  double coverage = 0.0;
  Eigen::Index reps = 0;
  Eigen::Index reps_failed = 0;
  Eigen::Index covered = 0;
  Eigen::Index uncovered = 0;
  Eigen::Index variance_floored = 0;
  std::optional<double> mean_eta_hat;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
  std::optional<std::vector<RepRecord>> per_rep;
};

struct RunOptions {
  unsigned workers = 0;  // 0 = one per hardware thread
  bool keep_per_rep = false;
};

/// Estimates one simulated data set according to the scenario's model and
/// correction. Throws whatever the estimators throw.
RepOutcome analyse_replication(const ScenarioConfig& config, const SimulatedData& data);

/// Runs replications [0, reps) of a prepared plan. SingularMomentSystem and
/// DegenerateResponse mark the replication failed; anything else propagates.
/// The result is ordered by replication index.
std::vector<RepOutcome> run_replications(const SimulationPlan& plan, Eigen::Index reps,
                                         unsigned workers = 0);

McSummary run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Table statistics over usable replications. Throws EmptyInput when
/// per_rep is empty. Invariant under permutations of per_rep.
McSummary summarize(const std::vector<RepRecord>& per_rep, double truth_r2, double level);

/// Rebuilds each Wald interval r2 +- z * se at another level.
std::vector<RepRecord> at_level(const std::vector<RepRecord>& per_rep, double level);

}  // namespace snr
