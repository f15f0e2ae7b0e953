#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace snr {

enum class Model { Fixed, Random };
enum class Design { Gaussian, Snp, T7 };
enum class Coeff { Sparse, DenseFixed, Random };
enum class NoiseKind { Homoskedastic, ScalarHetero, Subgroup };
enum class HeteroCorrection { None, Scalar, Subgroup };

struct DesignCov {
  bool ar1 = false;
  double phi = 0.0;
};

// One cell of a simulation grid.
struct ScenarioConfig {
  std::string id = "scenario";
  Model model = Model::Fixed;
  Eigen::Index n = 0, p = 0, q = 0;
  Design design = Design::Gaussian;
  DesignCov design_cov;
  Coeff coeff = Coeff::Sparse;
  double rho2 = 1.0;
  double sigma2 = 0.5;
  NoiseKind noise = NoiseKind::Homoskedastic;
  std::vector<Eigen::Index> group_sizes;  // subgroup noise only
  bool group_eta = false;                 // within-group scalar heterogeneity
  double noise_phi = 0.5;
  HeteroCorrection hetero = HeteroCorrection::None;
  Eigen::Index reps = 1;
  double level = 0.95;
  std::uint64_t master_seed = 0;

  double true_r2() const { return rho2 / (rho2 + sigma2); }
};

/// Checks internal consistency. Throws ConfigError.
void validate(const ScenarioConfig& config);

/// Non-fatal oddities worth reporting next to results.
std::vector<std::string> scenario_warnings(const ScenarioConfig& config);

/// Parses the key = value scenario format. `origin` names the source in
/// error messages. Throws ConfigError naming the offending key.
ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin = "<string>");
ScenarioConfig parse_scenario(const std::string& path);

/// Inverse of parse_scenario_text.
std::string format_scenario(const ScenarioConfig& config);

const char* to_string(Model m);
const char* to_string(Design d);
const char* to_string(Coeff c);
const char* to_string(NoiseKind k);
const char* to_string(HeteroCorrection h);

/// Splits n into `groups` contiguous blocks whose sizes differ by at most one.
std::vector<Eigen::Index> even_group_sizes(Eigen::Index n, Eigen::Index groups);

}  // namespace snr
