#include "snr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snr/errors.hpp"
#include "snr/fixed_effects.hpp"
#include "snr/parallel.hpp"
#include "snr/random_effects.hpp"

namespace snr {

namespace {

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

RepOutcome analyse_replication(const ScenarioConfig& c, const SimulatedData& data) {
  RepOutcome out;
  out.true_kappa = data.truth.kappa_tot;
  out.true_r2 = data.truth.r2;
  if (c.model == Model::Fixed) {
    const auto est = estimate_fixed(data.X, data.Y);
    out.rho2_hat = est.rho2;
    out.sigma2_hat = est.sigma2;
    out.r2_hat = est.r2;
    out.variance = asymptotic_variance_fixed(est.n, est.p, est.q, est.Wb_hat, est.Sigma_e_hat,
                                             est.rho2, est.sigma2, est.r2, c.level);
    return out;
  }

  const auto est = estimate_random(data.X, data.Y);
  out.rho2_hat = est.rho2;
  out.sigma2_hat = est.sigma2;
  out.r2_hat = est.r2;
  out.moments = est.moments;
  switch (c.hetero) {
    case HeteroCorrection::None:
      break;
    case HeteroCorrection::Scalar: {
      const auto eta = estimate_eta(data.X, data.Y, est);
      out.eta_hat = eta.eta;
      out.kappa_hat = kappa_scalar(eta.eta, est.Sigma_e_hat);
      break;
    }
    case HeteroCorrection::Subgroup:
      out.kappa_hat = kappa_subgroup(split_rows(data.X, data.Y, c.group_sizes)).kappa_tot_hat;
      break;
  }
  out.variance = asymptotic_variance_random(est.moments, est.Sigma_b_hat, est.Sigma_e_hat, est.q,
                                            out.kappa_hat, est.rho2, est.sigma2, est.r2, c.level,
                                            est.n);
  return out;
}

std::vector<RepOutcome> run_replications(const SimulationPlan& plan, Eigen::Index reps,
                                         unsigned workers) {
  std::vector<RepOutcome> out(static_cast<std::size_t>(reps));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const SimulatedData data = simulate_dataset(plan, i);
    try {
      out[i] = analyse_replication(plan.config, data);
    } catch (const SingularMomentSystem& e) {
      out[i].failed = true;
      out[i].failure = e.name();
    } catch (const DegenerateResponse& e) {
      out[i].failed = true;
      out[i].failure = e.name();
    }
  });
  return out;
}

McSummary summarize(const std::vector<RepRecord>& per_rep, double truth_r2, double level) {
  if (per_rep.empty()) throw EmptyInput("summarize: no usable replications");
  const std::size_t k = per_rep.size();
  std::vector<double> r2(k), se(k);
  Eigen::Index covered = 0;
  for (std::size_t i = 0; i < k; ++i) {
    r2[i] = per_rep[i].r2_hat;
    se[i] = per_rep[i].se_hat;
    if (per_rep[i].ci_low <= truth_r2 && truth_r2 <= per_rep[i].ci_high) ++covered;
  }
  const double kd = static_cast<double>(k);
  McSummary s;
  s.truth_r2 = truth_r2;
  s.level = level;
  s.mean_r2 = sorted_sum(r2) / kd;
  if (k > 1) {
    std::vector<double> dev(k);
    for (std::size_t i = 0; i < k; ++i) dev[i] = (r2[i] - s.mean_r2) * (r2[i] - s.mean_r2);
    s.emp_se = std::sqrt(sorted_sum(dev) / (kd - 1.0));
  } else {
    s.emp_se = std::numeric_limits<double>::quiet_NaN();
  }
  s.avg_se_hat = sorted_sum(se) / kd;
  s.covered = covered;
  s.uncovered = static_cast<Eigen::Index>(k) - covered;
  s.coverage = static_cast<double>(covered) / kd;
  s.reps = static_cast<Eigen::Index>(k);
  return s;
}

std::vector<RepRecord> at_level(const std::vector<RepRecord>& per_rep, double level) {
  const double z = critical_value(level);
  std::vector<RepRecord> out = per_rep;
  for (auto& r : out) {
    r.ci_low = r.r2_hat - z * r.se_hat;
    r.ci_high = r.r2_hat + z * r.se_hat;
  }
  return out;
}

McSummary run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const SimulationPlan plan = prepare_simulation(config);
  const auto outcomes = run_replications(plan, config.reps, options.workers);

  std::vector<RepRecord> records;
  std::vector<double> etas;
  Eigen::Index failed = 0, floored = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++failed;
      continue;
    }
    records.push_back({o.r2_hat, o.variance.se_r2, o.variance.ci_low, o.variance.ci_high});
    if (o.variance.variance_floored) ++floored;
    if (config.hetero == HeteroCorrection::Scalar) etas.push_back(o.eta_hat);
  }

  McSummary s = summarize(records, config.true_r2(), config.level);
  s.id = config.id;
  s.n = config.n;
  s.p = config.p;
  s.q = config.q;
  s.reps = config.reps;
  s.reps_failed = failed;
  s.variance_floored = floored;
  s.seed = config.master_seed;
  s.warnings = scenario_warnings(config);
  if (!etas.empty()) s.mean_eta_hat = sorted_sum(etas) / static_cast<double>(etas.size());
  if (options.keep_per_rep) s.per_rep = std::move(records);
  return s;
}

}  // namespace snr
