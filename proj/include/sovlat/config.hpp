/**
 * @file config.hpp
 * @brief Run configuration parsed from ini files.
 *
 * Schema (all keys optional except p, p_prime, n_sites):
 *
 *   [model]
 *   p = 3              odd, >= 3
 *   p_prime = 2        even, co-prime with p
 *   n_sites = 2        >= 2
 *   mode = generic     generic | chP-curve | self-adjoint | homogeneous-chP
 *   seed = 42
 *
 *   [limits]
 *   dim_cap = 243      p^n_sites must not exceed this
 *   min_z_separation = 0.1   genericity gate: min |Z_a - Z_b| / max |Z|
 *   max_condition = 1e3      genericity gate: condition number of the left SOV basis
 *
 *   [tolerances]
 *   <check tolerance key> = <float>   overrides one entry of default_tolerances()
 */
#pragma once

#include "sovlat/sov.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <map>
#include <sstream>

namespace sovlat {

/// Tolerance table keyed by check family.
using Tolerances = std::map<std::string, double>;

inline Tolerances default_tolerances() {
  return {
      {"algebra", 1e-9},        {"sov_action", 1e-8},     {"sov_measure", 1e-8},   {"sov_identity", 1e-7},
      {"functional", 1e-8},     {"perturbed", 1e-3},      {"overlap", 1e-8},       {"kernel_dim", 1e-6},
      {"scalar", 1e-8},         {"witness", 1e-8},        {"selection", 1e-10},    {"curve", 1e-12},
      {"weights", 1e-10},       {"chp_commute", 1e-8},    {"q_operator", 1e-7},    {"intertwining", 1e-9},
      {"propagator", 1e-8},     {"reconstruction", 1e-7}, {"lemma", 1e-9},         {"spanning", 1e-9},
      {"form_factor", 1e-7},    {"form_factor_spot", 1e-6}, {"invariance", 1e-7},  {"hamiltonian", 1e-6},
      {"order_parameter", 1e-6}, {"hermiticity", 1e-10},
  };
}

/// Keys whose tolerance is a lower bound (the residual must exceed it); --tol does not touch them.
inline bool is_lower_bound(const std::string& key) { return key == "perturbed" || key == "kernel_dim"; }

struct RunConfig {
  int p = 3;
  int p_prime = 2;
  int n_sites = 2;
  ParamMode mode = ParamMode::Generic;
  std::uint64_t seed = 42;
  int dim_cap = 243;
  GenericityGate gate;
  Tolerances tol = default_tolerances();
  std::string suite = "all";
  std::string out_dir = "out";

  Phase phase() const { return Phase::make(p, p_prime); }
  double t(const std::string& key) const { return tol.at(key); }

  /// Replaces every upper-bound tolerance by value.
  void override_tolerances(double value) {
    if (!(value > 0.0)) throw ConfigError("--tol must be positive");
    for (auto& [k, v] : tol)
      if (!is_lower_bound(k)) v = value;
  }

  void validate() const {
    (void)phase();
    if (n_sites < 2) throw ConfigError("n_sites must be >= 2; got " + std::to_string(n_sites));
    if (dim_cap < 1) throw ConfigError("dim_cap must be positive");
    double dim = 1.0;
    for (int i = 0; i < n_sites; ++i) dim *= p;
    if (dim > dim_cap)
      throw ConfigError("p^n_sites = " + std::to_string(long(dim)) + " exceeds dim_cap = " + std::to_string(dim_cap));
  }
};

namespace detail {
template <class T>
T ini_get(const boost::property_tree::ptree& pt, const std::string& key) {
  try {
    return pt.get<T>(key);
  } catch (const boost::property_tree::ptree_bad_path&) {
    throw ConfigError("missing key '" + key + "'");
  } catch (const boost::property_tree::ptree_bad_data&) {
    throw ConfigError("malformed value for '" + key + "'");
  }
}
template <class T>
T ini_get(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  if (!pt.get_child_optional(key)) return fallback;
  return ini_get<T>(pt, key);
}
}  // namespace detail

inline RunConfig parse_config(const boost::property_tree::ptree& pt) {
  RunConfig c;
  c.p = detail::ini_get<int>(pt, "model.p");
  c.p_prime = detail::ini_get<int>(pt, "model.p_prime");
  c.n_sites = detail::ini_get<int>(pt, "model.n_sites");
  c.mode = parse_mode(detail::ini_get<std::string>(pt, "model.mode", "generic"));
  c.seed = detail::ini_get<std::uint64_t>(pt, "model.seed", 42);
  c.dim_cap = detail::ini_get<int>(pt, "limits.dim_cap", 243);
  c.gate.min_z_separation = detail::ini_get<double>(pt, "limits.min_z_separation", c.gate.min_z_separation);
  c.gate.max_condition = detail::ini_get<double>(pt, "limits.max_condition", c.gate.max_condition);
  if (auto tols = pt.get_child_optional("tolerances")) {
    for (const auto& [key, node] : *tols) {
      if (!c.tol.count(key)) throw ConfigError("unknown tolerance key '" + key + "'");
      c.tol[key] = detail::ini_get<double>(*tols, key);
    }
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return parse_config(pt);
}

inline RunConfig config_from_string(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return parse_config(pt);
}

}  // namespace sovlat
