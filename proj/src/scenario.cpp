#include "snr/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "snr/errors.hpp"

namespace snr {

const char* to_string(Model m) { return m == Model::Fixed ? "fixed" : "random"; }

const char* to_string(Design d) {
  switch (d) {
    case Design::Gaussian: return "gaussian";
    case Design::Snp: return "snp";
    case Design::T7: return "t7";
  }
  return "?";
}

const char* to_string(Coeff c) {
  switch (c) {
    case Coeff::Sparse: return "sparse";
    case Coeff::DenseFixed: return "dense_fixed";
    case Coeff::Random: return "random";
  }
  return "?";
}

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Homoskedastic: return "homoskedastic";
    case NoiseKind::ScalarHetero: return "scalar";
    case NoiseKind::Subgroup: return "subgroup";
  }
  return "?";
}

const char* to_string(HeteroCorrection h) {
  switch (h) {
    case HeteroCorrection::None: return "none";
    case HeteroCorrection::Scalar: return "scalar";
    case HeteroCorrection::Subgroup: return "subgroup";
  }
  return "?";
}

std::vector<Eigen::Index> even_group_sizes(Eigen::Index n, Eigen::Index groups) {
  if (groups < 1 || groups > n) {
    throw ConfigError("groups: cannot split n = " + std::to_string(n) + " into " +
                      std::to_string(groups) + " groups");
  }
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(groups), n / groups);
  for (Eigen::Index m = 0; m < n % groups; ++m) ++sizes[static_cast<std::size_t>(m)];
  return sizes;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(key + ": cannot parse value '" + value + "'");
  }
  return out;
}

Eigen::Index parse_count(const std::string& key, const std::string& value) {
  const auto v = parse_number<long long>(key, value);
  if (v < 1) throw ConfigError(key + ": must be a positive integer");
  return static_cast<Eigen::Index>(v);
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected on/off, got '" + value + "'");
}

DesignCov parse_design_cov(const std::string& value) {
  if (value == "identity") return {};
  const std::string prefix = "ar1(";
  if (value.rfind(prefix, 0) == 0 && value.back() == ')') {
    const std::string inner = trim(value.substr(prefix.size(), value.size() - prefix.size() - 1));
    return {true, parse_number<double>("design_cov", inner)};
  }
  throw ConfigError("design_cov: expected identity or ar1(phi), got '" + value + "'");
}

std::vector<Eigen::Index> parse_group_list(const std::string& value) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count("groups", trim(item)));
  if (out.empty()) throw ConfigError("groups: empty list");
  return out;
}

const std::set<std::string> kRequired = {"model", "n",      "p",     "q",    "design", "coeff",
                                         "rho2",  "sigma2", "noise", "reps", "seed"};
const std::set<std::string> kOptional = {"id",    "design_cov", "level",    "hetero_correction",
                                         "groups", "group_eta", "noise_phi"};

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kRequired.count(key) && !kOptional.count(key)) {
      throw ConfigError("unknown key: " + key);
    }
    if (kv.count(key)) throw ConfigError("duplicate key: " + key);
    if (value.empty()) throw ConfigError(key + ": empty value");
    kv[key] = value;
  }
  for (const auto& key : kRequired) {
    if (!kv.count(key)) throw ConfigError("missing required key: " + key);
  }

  ScenarioConfig c;
  if (kv.count("id")) c.id = kv["id"];

  const std::string& model = kv["model"];
  if (model == "fixed") c.model = Model::Fixed;
  else if (model == "random") c.model = Model::Random;
  else throw ConfigError("model: expected fixed or random, got '" + model + "'");

  c.n = parse_count("n", kv["n"]);
  c.p = parse_count("p", kv["p"]);
  c.q = parse_count("q", kv["q"]);

  const std::string& design = kv["design"];
  if (design == "gaussian") c.design = Design::Gaussian;
  else if (design == "snp") c.design = Design::Snp;
  else if (design == "t7") c.design = Design::T7;
  else throw ConfigError("design: expected gaussian, snp or t7, got '" + design + "'");

  if (kv.count("design_cov")) c.design_cov = parse_design_cov(kv["design_cov"]);

  const std::string& coeff = kv["coeff"];
  if (coeff == "sparse") c.coeff = Coeff::Sparse;
  else if (coeff == "dense_fixed" || coeff == "dense") c.coeff = Coeff::DenseFixed;
  else if (coeff == "random") c.coeff = Coeff::Random;
  else throw ConfigError("coeff: expected sparse, dense_fixed or random, got '" + coeff + "'");

  c.rho2 = parse_number<double>("rho2", kv["rho2"]);
  c.sigma2 = parse_number<double>("sigma2", kv["sigma2"]);

  const std::string& noise = kv["noise"];
  if (noise == "homoskedastic") c.noise = NoiseKind::Homoskedastic;
  else if (noise == "scalar" || noise == "scalar_hetero") c.noise = NoiseKind::ScalarHetero;
  else if (noise == "subgroup") c.noise = NoiseKind::Subgroup;
  else throw ConfigError("noise: expected homoskedastic, scalar or subgroup, got '" + noise + "'");

  if (kv.count("hetero_correction")) {
    const std::string& h = kv["hetero_correction"];
    if (h == "none") c.hetero = HeteroCorrection::None;
    else if (h == "scalar") c.hetero = HeteroCorrection::Scalar;
    else if (h == "subgroup") c.hetero = HeteroCorrection::Subgroup;
    else throw ConfigError("hetero_correction: expected none, scalar or subgroup, got '" + h + "'");
  }

  if (kv.count("groups")) {
    const auto list = parse_group_list(kv["groups"]);
    c.group_sizes = list.size() == 1 ? even_group_sizes(c.n, list.front()) : list;
  }
  if (kv.count("group_eta")) c.group_eta = parse_flag("group_eta", kv["group_eta"]);
  if (kv.count("noise_phi")) c.noise_phi = parse_number<double>("noise_phi", kv["noise_phi"]);

  c.reps = parse_count("reps", kv["reps"]);
  if (kv.count("level")) c.level = parse_number<double>("level", kv["level"]);
  c.master_seed = parse_number<std::uint64_t>("seed", kv["seed"]);

  validate(c);
  return c;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

void validate(const ScenarioConfig& c) {
  if (c.n < 2) throw ConfigError("n: must be >= 2");
  if (c.p < 1) throw ConfigError("p: must be >= 1");
  if (c.q < 1) throw ConfigError("q: must be >= 1");
  if (c.reps < 1) throw ConfigError("reps: must be >= 1");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("level: must lie in (0,1)");
  if (!(c.sigma2 >= 0.0)) throw ConfigError("sigma2: must be >= 0");
  if (c.coeff == Coeff::Random ? !(c.rho2 >= 0.0) : !(c.rho2 > 0.0)) {
    throw ConfigError("rho2: must be > 0 (or >= 0 for random coefficients)");
  }
  if (!(c.rho2 + c.sigma2 > 0.0)) throw ConfigError("rho2 + sigma2 must be > 0");
  if (c.design_cov.ar1 && !(std::abs(c.design_cov.phi) < 1.0)) {
    throw ConfigError("design_cov: |phi| must be < 1");
  }
  if (!(std::abs(c.noise_phi) < 1.0)) throw ConfigError("noise_phi: |phi| must be < 1");
  if (c.model == Model::Fixed) {
    if (c.coeff == Coeff::Random) throw ConfigError("coeff: random coefficients need model = random");
    if (c.hetero != HeteroCorrection::None) {
      throw ConfigError("hetero_correction: only available for model = random");
    }
  } else if (c.coeff != Coeff::Random) {
    throw ConfigError("coeff: model = random needs coeff = random");
  }
  const bool needs_groups =
      c.noise == NoiseKind::Subgroup || c.hetero == HeteroCorrection::Subgroup;
  if (needs_groups) {
    if (c.group_sizes.empty()) throw ConfigError("groups: required for subgroup noise or correction");
    Eigen::Index total = 0;
    for (auto s : c.group_sizes) {
      if (s < 2) throw ConfigError("groups: every group needs at least 2 rows");
      total += s;
    }
    if (total != c.n) {
      throw ConfigError("groups: sizes sum to " + std::to_string(total) + ", expected n = " +
                        std::to_string(c.n));
    }
  } else if (!c.group_sizes.empty()) {
    throw ConfigError("groups: only meaningful with subgroup noise or correction");
  }
  if (c.group_eta && c.noise != NoiseKind::Subgroup) {
    throw ConfigError("group_eta: only meaningful with subgroup noise");
  }
}

std::vector<std::string> scenario_warnings(const ScenarioConfig& c) {
  std::vector<std::string> out;
  if (c.hetero == HeteroCorrection::Subgroup && c.noise != NoiseKind::Subgroup) {
    out.emplace_back("subgroup correction applied to non-subgroup noise");
  }
  if (c.hetero == HeteroCorrection::Scalar && c.noise != NoiseKind::ScalarHetero) {
    out.emplace_back("scalar correction applied to non-scalar noise");
  }
  if (c.hetero == HeteroCorrection::None && c.noise != NoiseKind::Homoskedastic) {
    out.emplace_back("heteroskedastic noise without correction");
  }
  return out;
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "id = " << c.id << "\n"
      << "model = " << to_string(c.model) << "\n"
      << "n = " << c.n << "\np = " << c.p << "\nq = " << c.q << "\n"
      << "design = " << to_string(c.design) << "\n";
  if (c.design_cov.ar1) out << "design_cov = ar1(" << c.design_cov.phi << ")\n";
  out << "coeff = " << to_string(c.coeff) << "\n"
      << "rho2 = " << c.rho2 << "\nsigma2 = " << c.sigma2 << "\n"
      << "noise = " << to_string(c.noise) << "\n"
      << "noise_phi = " << c.noise_phi << "\n";
  if (!c.group_sizes.empty()) {
    out << "groups = ";
    for (std::size_t i = 0; i < c.group_sizes.size(); ++i) {
      out << (i ? "," : "") << c.group_sizes[i];
    }
    out << "\n";
  }
  if (c.group_eta) out << "group_eta = on\n";
  out << "hetero_correction = " << to_string(c.hetero) << "\n"
      << "reps = " << c.reps << "\nlevel = " << c.level << "\nseed = " << c.master_seed << "\n";
  return out.str();
}

}  // namespace snr
