#include "snr/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "snr/errors.hpp"
#include "snr/fixed_effects.hpp"
#include "snr/random_effects.hpp"

namespace snr {

const char* version() { return SNR_VERSION; }

std::vector<Eigen::Index> parse_group_spec(const std::string& spec) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw ConfigError("groups: empty entry in '" + spec + "'");
    const char* first = item.data() + b;
    const char* last = item.data() + e + 1;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || v < 1) {
      throw ConfigError("groups: bad size '" + item + "'");
    }
    out.push_back(static_cast<Eigen::Index>(v));
  }
  if (out.empty()) throw ConfigError("groups: empty list");
  return out;
}

RunResult run_estimate(const Matrix& x, const Matrix& y, const EstimateOptions& o) {
  RunResult r;
  r.model = o.model;
  r.hetero = o.hetero;
  critical_value(o.level);  // rejects a bad level before any work
  if (o.model == Model::Fixed) {
    if (o.hetero != HeteroCorrection::None) {
      throw ConfigError("--hetero is only available with --model random");
    }
    const auto est = estimate_fixed(x, y);
    r.n = est.n;
    r.p = est.p;
    r.q = est.q;
    r.rho2 = est.rho2;
    r.sigma2 = est.sigma2;
    r.r2 = est.r2;
    if (o.exact_se) {
      r.se_method = "exact";
      r.variance = exact_variance_fixed(est.n, est.p, est.q, est.Wb_hat, est.Sigma_e_hat,
                                        est.rho2, est.sigma2, est.r2, o.level);
    } else {
      r.variance = asymptotic_variance_fixed(est.n, est.p, est.q, est.Wb_hat, est.Sigma_e_hat,
                                             est.rho2, est.sigma2, est.r2, o.level);
    }
  } else {
    if (o.exact_se) throw ConfigError("--exact-se is only available with --model fixed");
    if (o.hetero == HeteroCorrection::Subgroup) {
      if (o.group_sizes.empty()) throw ConfigError("--hetero subgroup needs --groups");
      Eigen::Index total = 0;
      for (auto s : o.group_sizes) total += s;
      if (total != x.rows()) {
        throw ConfigError("--groups sizes sum to " + std::to_string(total) + ", expected n = " +
                          std::to_string(x.rows()));
      }
    }
    const auto est = estimate_random(x, y);
    r.n = est.n;
    r.p = est.p;
    r.q = est.q;
    r.rho2 = est.rho2;
    r.sigma2 = est.sigma2;
    r.r2 = est.r2;
    double kappa = 0.0;
    if (o.hetero == HeteroCorrection::Scalar) {
      const auto eta = estimate_eta(x, y, est);
      kappa = kappa_scalar(eta.eta, est.Sigma_e_hat);
      r.eta_hat_raw = eta.eta_raw;
      r.eta_hat = eta.eta;
      r.kappa_tot_hat = kappa;
    } else if (o.hetero == HeteroCorrection::Subgroup) {
      const auto h = kappa_subgroup(split_rows(x, y, o.group_sizes));
      kappa = h.kappa_tot_hat;
      r.eta_hat_raw = h.eta_hat_raw;
      r.eta_hat = h.eta_hat;
      r.kappa_tot_hat = kappa;
    }
    r.variance = asymptotic_variance_random(est.moments, est.Sigma_b_hat, est.Sigma_e_hat, est.q,
                                            kappa, est.rho2, est.sigma2, est.r2, o.level, est.n);
  }
  if (o.clamp) {
    r.r2_clamped = std::clamp(r.r2, 0.0, 1.0);
    clamp_interval(r.variance);
    r.clamped = r.variance.clamped || *r.r2_clamped != r.r2;
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["model"] = to_string(r.model);
  j["n"] = r.n;
  j["p"] = r.p;
  j["q"] = r.q;
  j["rho2"] = r.rho2;
  j["sigma2"] = r.sigma2;
  j["r2"] = r.r2;
  if (r.r2_clamped) j["r2_clamped"] = *r.r2_clamped;
  j["se"] = r.variance.se_r2;
  j["ci"] = {r.variance.ci_low, r.variance.ci_high};
  j["level"] = r.variance.level;
  j["se_method"] = r.se_method;
  j["V"] = {{"V11", r.variance.V11}, {"V12", r.variance.V12}, {"V22", r.variance.V22}};
  j["hetero"] = to_string(r.hetero);
  if (r.kappa_tot_hat) {
    j["eta_hat_raw"] = *r.eta_hat_raw;
    j["eta_hat"] = *r.eta_hat;
    j["kappa_tot_hat"] = *r.kappa_tot_hat;
  }
  j["flags"] = {{"variance_floored", r.variance.variance_floored}, {"clamped", r.clamped}};
  j["inputs"] = {{"x", r.x_path}, {"y", r.y_path}};
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  j["version"] = version();
  return j.dump(2) + "\n";
}

std::string to_text(const RunResult& r) {
  std::ostringstream out;
  out << "model = " << to_string(r.model) << "\n"
      << "n = " << r.n << "\np = " << r.p << "\nq = " << r.q << "\n"
      << "rho2 = " << format_double(r.rho2) << "\n"
      << "sigma2 = " << format_double(r.sigma2) << "\n"
      << "r2 = " << format_double(r.r2) << "\n";
  if (r.r2_clamped) out << "r2_clamped = " << format_double(*r.r2_clamped) << "\n";
  out << "se = " << format_double(r.variance.se_r2) << " (" << r.se_method << ")\n"
      << "ci = [" << format_double(r.variance.ci_low) << ", "
      << format_double(r.variance.ci_high) << "] at level " << format_double(r.variance.level)
      << "\n";
  if (r.kappa_tot_hat) {
    out << "hetero = " << to_string(r.hetero) << "\n"
        << "eta_hat = " << format_double(*r.eta_hat) << " (raw "
        << format_double(*r.eta_hat_raw) << ")\n"
        << "kappa_tot_hat = " << format_double(*r.kappa_tot_hat) << "\n";
  }
  out << "variance_floored = " << (r.variance.variance_floored ? "true" : "false") << "\n"
      << "clamped = " << (r.clamped ? "true" : "false") << "\n"
      << "seed = " << (r.seed ? std::to_string(*r.seed) : "none") << "\n"
      << "version = " << version() << "\n";
  return out.str();
}

std::string to_csv(const RunResult& r) {
  std::ostringstream out;
  out << "model,n,p,q,rho2,sigma2,r2,r2_clamped,se,ci_low,ci_high,level,se_method,hetero,"
         "kappa_tot_hat,variance_floored,clamped,seed,version\n";
  out << to_string(r.model) << ',' << r.n << ',' << r.p << ',' << r.q << ','
      << format_double(r.rho2) << ',' << format_double(r.sigma2) << ',' << format_double(r.r2)
      << ',' << (r.r2_clamped ? format_double(*r.r2_clamped) : "") << ','
      << format_double(r.variance.se_r2) << ',' << format_double(r.variance.ci_low) << ','
      << format_double(r.variance.ci_high) << ',' << format_double(r.variance.level) << ','
      << r.se_method << ',' << to_string(r.hetero) << ','
      << (r.kappa_tot_hat ? format_double(*r.kappa_tot_hat) : "") << ','
      << (r.variance.variance_floored ? "true" : "false") << ','
      << (r.clamped ? "true" : "false") << ',' << (r.seed ? std::to_string(*r.seed) : "")
      << ',' << version() << "\n";
  return out.str();
}

std::string to_json(const McSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.id;
  j["n"] = s.n;
  j["p"] = s.p;
  j["q"] = s.q;
  j["truth_r2"] = s.truth_r2;
  j["level"] = s.level;
  j["mean_r2"] = s.mean_r2;
  j["emp_se"] = number_or_null(s.emp_se);
  j["avg_se_hat"] = s.avg_se_hat;
  j["coverage"] = s.coverage;
  j["reps"] = s.reps;
  j["reps_failed"] = s.reps_failed;
  j["covered"] = s.covered;
  j["uncovered"] = s.uncovered;
  j["variance_floored"] = s.variance_floored;
  if (s.mean_eta_hat) j["mean_eta_hat"] = *s.mean_eta_hat;
  j["warnings"] = s.warnings;
  if (s.per_rep) {
    auto& arr = j["per_rep"] = nlohmann::ordered_json::array();
    for (const auto& r : *s.per_rep) {
      arr.push_back({{"r2_hat", r.r2_hat}, {"se_hat", r.se_hat}, {"ci", {r.ci_low, r.ci_high}}});
    }
  }
  j["seed"] = s.seed;
  j["version"] = version();
  return j.dump(2) + "\n";
}

std::string to_csv(const McSummary& s) {
  std::ostringstream out;
  out << "scenario,n,p,mean,emp_se_x100,avg_se_x100,coverage_pct,reps,reps_failed,seed,version\n";
  out << s.id << ',' << s.n << ',' << s.p << ',' << fixed("%.3f", s.mean_r2) << ','
      << fixed("%.2f", 100.0 * s.emp_se) << ',' << fixed("%.2f", 100.0 * s.avg_se_hat) << ','
      << fixed("%.1f", 100.0 * s.coverage) << ',' << s.reps << ',' << s.reps_failed << ','
      << s.seed << ',' << version() << "\n";
  return out.str();
}

std::string to_table(const std::vector<OracleReport>& reports) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-30s %15s %15s %12s %9s  %s\n", "name", "analytic",
                "empirical", "mc_se", "draws", "status");
  out << buf;
  for (const auto& r : reports) {
    const char* status = r.expect_pass ? (r.pass ? "pass" : "FAIL")
                                       : (r.pass ? "FAIL (control passed)" : "control fails");
    std::snprintf(buf, sizeof buf, "%-30s %15.8g %15.8g %12.4g %9lld  %s\n", r.name.c_str(),
                  r.analytic, r.empirical, r.mc_se, static_cast<long long>(r.draws), status);
    out << buf;
  }
  return out.str();
}

}  // namespace snr
