// snrmm: signal-to-noise ratio estimation, simulation and moment checks.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "snr/errors.hpp"
#include "snr/matrix_io.hpp"
#include "snr/montecarlo.hpp"
#include "snr/oracle.hpp"
#include "snr/report.hpp"
#include "snr/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kEstimationError = 1;
constexpr int kUsageError = 2;
constexpr int kOracleFailure = 3;

struct EstimateArgs {
  std::string x, y, model = "fixed", hetero = "none", groups;
  double level = 0.95;
  bool clamp = false, exact_se = false, json = false, csv = false;
};

struct SimulateArgs {
  std::string scenario, out;
  bool json = false, per_rep = false;
  unsigned workers = 0;
};

struct OracleArgs {
  std::string suite = "all";
  std::int64_t draws = 0;
  std::int64_t reps = 0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

int cmd_estimate(const EstimateArgs& a) {
  snr::EstimateOptions o;
  o.model = a.model == "random" ? snr::Model::Random : snr::Model::Fixed;
  if (a.hetero == "scalar") o.hetero = snr::HeteroCorrection::Scalar;
  if (a.hetero == "subgroup") o.hetero = snr::HeteroCorrection::Subgroup;
  if (!a.groups.empty()) {
    if (o.hetero != snr::HeteroCorrection::Subgroup) {
      throw snr::ConfigError("--groups needs --hetero subgroup");
    }
    o.group_sizes = snr::parse_group_spec(a.groups);
  }
  o.level = a.level;
  o.clamp = a.clamp;
  o.exact_se = a.exact_se;
  if (!(a.level > 0.0 && a.level < 1.0)) throw snr::ConfigError("--level must lie in (0,1)");

  const snr::Matrix x = snr::read_matrix(a.x);
  const snr::Matrix y = snr::read_matrix(a.y);
  snr::RunResult r = snr::run_estimate(x, y, o);
  r.x_path = a.x;
  r.y_path = a.y;
  std::cout << (a.json ? snr::to_json(r) : a.csv ? snr::to_csv(r) : snr::to_text(r));
  return kOk;
}

int cmd_simulate(const SimulateArgs& a) {
  const snr::ScenarioConfig config = snr::parse_scenario(a.scenario);
  for (const auto& w : snr::scenario_warnings(config)) std::cerr << "warning: " << w << "\n";
  snr::RunOptions opts;
  opts.workers = a.workers;
  opts.keep_per_rep = a.per_rep;
  const snr::McSummary s = snr::run_scenario(config, opts);
  const std::string text = a.json ? snr::to_json(s) : snr::to_csv(s);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw snr::ConfigError("cannot write " + a.out);
    out << text;
  }
  return kOk;
}

int cmd_oracle(const OracleArgs& a) {
  std::vector<snr::OracleReport> reports;
  auto add = [&](const std::vector<snr::OracleReport>& r) {
    reports.insert(reports.end(), r.begin(), r.end());
  };
  const bool all = a.suite == "all";
  if (all || a.suite == "wishart") add(snr::wishart_suite(a.draws, a.seed, a.workers));
  if (all || a.suite == "conditional") add(snr::conditional_suite(a.draws, a.seed, a.workers));
  if (all || a.suite == "variance") add(snr::variance_suite(a.reps, a.seed, a.workers));
  std::cout << snr::to_table(reports);
  std::cout << "seed = " << a.seed << ", version = " << snr::version() << "\n";
  return snr::all_ok(reports) ? kOk : kOracleFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Method-of-moments signal-to-noise ratio estimation"};
  app.set_version_flag("--version", std::string(snr::version()));
  app.require_subcommand(1);

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate r2 from a design and response matrix");
  e->add_option("--x", est.x, "Design matrix, headerless CSV (n x p)")->required()->check(CLI::ExistingFile);
  e->add_option("--y", est.y, "Response matrix, headerless CSV (n x q)")->required()->check(CLI::ExistingFile);
  e->add_option("--model", est.model, "fixed or random")->check(CLI::IsMember({"fixed", "random"}));
  e->add_option("--hetero", est.hetero, "Noise correction (random model)")
      ->check(CLI::IsMember({"none", "scalar", "subgroup"}));
  e->add_option("--groups", est.groups, "Comma list of contiguous group sizes summing to n");
  e->add_option("--level", est.level, "Confidence level");
  e->add_flag("--clamp", est.clamp, "Also report r2 and the interval clamped to [0,1]");
  e->add_flag("--exact-se", est.exact_se, "Finite-sample standard error (fixed model)");
  auto* json_flag = e->add_flag("--json", est.json, "JSON output");
  e->add_flag("--csv", est.csv, "CSV output")->excludes(json_flag);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  s->add_option("--scenario", sim.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "Write the result here instead of standard output");
  s->add_flag("--json", sim.json, "JSON output instead of the table row");
  s->add_flag("--per-rep", sim.per_rep, "Include per-replication records (JSON only)");
  s->add_option("--workers", sim.workers, "Worker threads, 0 = all cores");

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Check moment identities and variance formulas by simulation");
  o->add_option("--suite", orc.suite, "wishart, conditional, variance or all")
      ->check(CLI::IsMember({"wishart", "conditional", "variance", "all"}));
  o->add_option("--draws", orc.draws, "Monte Carlo draws (wishart, conditional), at least 1000")
      ->check(CLI::Range(std::int64_t{1000}, std::numeric_limits<std::int64_t>::max()));
  o->add_option("--reps", orc.reps, "Replications (variance), at least 500")
      ->check(CLI::Range(std::int64_t{500}, std::numeric_limits<std::int64_t>::max()));
  o->add_option("--seed", orc.seed, "Master seed");
  o->add_option("--workers", orc.workers, "Worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*e) return cmd_estimate(est);
    if (*s) return cmd_simulate(sim);
    if (*o) return cmd_oracle(orc);
  } catch (const snr::ConfigError& err) {
    std::cerr << err.name() << ": " << err.what() << "\n";
    return kUsageError;
  } catch (const snr::Error& err) {
    std::cerr << err.name() << ": " << err.what() << "\n";
    return kEstimationError;
  }
  return kUsageError;
}
