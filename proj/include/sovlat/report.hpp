/**
 * @file report.hpp
 * @brief Check records, JSON report (schema 1) and form-factor CSV emission.
 */
#pragma once

#include "sovlat/form_factors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sovlat {

/// One named verification.
struct Check {
  std::string name;
  std::string anchor;      ///< short tag naming the identity being tested
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool lower_bound = false;  ///< pass iff residual > tolerance
  bool gated = true;         ///< informational checks do not affect the exit code
};

inline Check make_check(std::string name, std::string anchor, double residual, double tol, bool lower_bound = false) {
  Check c{std::move(name), std::move(anchor), residual, tol, false, lower_bound, true};
  c.pass = std::isfinite(residual) && (lower_bound ? residual > tol : residual < tol);
  return c;
}

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  std::vector<FormFactorResult> form_factors;
  int retries = 0;

  bool passed() const {
    for (const Check& c : checks)
      if (c.gated && !c.pass) return false;
    return true;
  }
  void add(Check c) { checks.push_back(std::move(c)); }
  void append(const SuiteReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    form_factors.insert(form_factors.end(), other.form_factors.begin(), other.form_factors.end());
    retries = std::max(retries, other.retries);
  }
};

/// Non-finite residuals are written as null.
inline nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline nlohmann::ordered_json report_json(const SuiteReport& r, const nlohmann::ordered_json& config) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["suite"] = r.suite;
  j["config"] = config;
  j["passed"] = r.passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const Check& c : r.checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["anchor"] = c.anchor;
    o["residual"] = json_number(c.residual);
    o["tolerance"] = c.tolerance;
    o["pass"] = c.pass;
    o["comparison"] = c.lower_bound ? "above" : "below";
    o["gated"] = c.gated;
    j["checks"].push_back(std::move(o));
  }
  j["form_factors"] = nlohmann::ordered_json::array();
  for (const FormFactorResult& f : r.form_factors) {
    nlohmann::ordered_json o;
    o["left_index"] = f.left_index;
    o["right_index"] = f.right_index;
    o["k"] = f.k;
    o["k_prime"] = f.k_prime;
    o["operator"] = f.op;
    o["det_value"] = {f.det_value.real(), f.det_value.imag()};
    o["oracle"] = {f.oracle_value.real(), f.oracle_value.imag()};
    o["rel_err"] = json_number(f.rel_err);
    j["form_factors"].push_back(std::move(o));
  }
  return j;
}

inline std::vector<FormFactorResult> form_factors_from_json(const nlohmann::ordered_json& j) {
  std::vector<FormFactorResult> out;
  for (const auto& o : j.at("form_factors")) {
    FormFactorResult f;
    f.left_index = o.at("left_index").get<int>();
    f.right_index = o.at("right_index").get<int>();
    f.k = o.at("k").get<int>();
    f.k_prime = o.at("k_prime").get<int>();
    f.op = o.at("operator").get<std::string>();
    f.det_value = cx(o.at("det_value")[0].get<double>(), o.at("det_value")[1].get<double>());
    f.oracle_value = cx(o.at("oracle")[0].get<double>(), o.at("oracle")[1].get<double>());
    f.rel_err = o.at("rel_err").is_null() ? std::nan("") : o.at("rel_err").get<double>();
    out.push_back(std::move(f));
  }
  return out;
}

inline std::string csv_header() {
  return "left_index,right_index,k,k',operator,det_value_re,det_value_im,oracle_re,oracle_im,rel_err\n";
}

inline std::string to_csv(const std::vector<FormFactorResult>& rows) {
  std::string s = csv_header();
  for (const FormFactorResult& f : rows)
    s += fmt::format("{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", f.left_index, f.right_index, f.k,
                     f.k_prime, f.op, f.det_value.real(), f.det_value.imag(), f.oracle_value.real(),
                     f.oracle_value.imag(), f.rel_err);
  return s;
}

/// One line per check, fixed width, for terminal output.
inline std::string summary_line(const Check& c) {
  return fmt::format("{:<4} {:<48} {:<22} residual={:.3e} {} {:.1e}{}", !c.gated ? "INFO" : c.pass ? "PASS" : "FAIL", c.name, c.anchor,
                     c.residual, c.lower_bound ? ">" : "<", c.tolerance, "");
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace sovlat
