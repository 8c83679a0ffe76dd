/**
 * @file sov_lattice.cpp
 * @brief Batch driver: runs verification suites and emits JSON/CSV reports.
 *
 * Exit codes: 0 all gated checks pass, 1 a check failed (or I/O error),
 * 2 configuration error, 3 no generic parameters after the retry budget.
 */
#include "sovlat/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace sovlat;

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["p"] = c.p;
  j["p_prime"] = c.p_prime;
  j["n_sites"] = c.n_sites;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["dim_cap"] = c.dim_cap;
  j["min_z_separation"] = c.gate.min_z_separation;
  j["max_condition"] = c.gate.max_condition;
  nlohmann::ordered_json t;
  for (const auto& [k, v] : c.tol) t[k] = v;
  j["tolerances"] = t;
  return j;
}

int cmd_run(const std::string& config_path, const std::string& suite, const std::string& out_dir,
            std::optional<double> tol) {
  RunConfig cfg = load_config(config_path);
  if (tol) cfg.override_tolerances(*tol);
  if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ConfigError("unknown suite '" + suite + "'");
  cfg.suite = suite;
  cfg.out_dir = out_dir;
  const SuiteReport rep = run_suite(cfg, suite);
  for (const Check& c : rep.checks) std::cout << summary_line(c) << '\n';
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/report.json", report_json(rep, config_json(cfg)).dump(2) + "\n");
  write_file(out_dir + "/form_factors.csv", to_csv(rep.form_factors));
  std::cout << fmt::format("{} checks, {} failed, {} retries; report written to {}/report.json\n", rep.checks.size(),
                           std::count_if(rep.checks.begin(), rep.checks.end(),
                                         [](const Check& c) { return c.gated && !c.pass; }),
                           rep.retries, out_dir);
  return rep.passed() ? 0 : 1;
}

int cmd_report(const std::string& format, const std::string& in_dir) {
  const auto j = nlohmann::ordered_json::parse(read_file(in_dir + "/report.json"));
  if (j.value("schema", 0) != 1) throw std::runtime_error("unsupported report schema");
  if (format == "json")
    std::cout << j.dump(2) << '\n';
  else
    std::cout << to_csv(form_factors_from_json(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separation-of-variables verification suites for cyclic lattice models"};
  app.require_subcommand(1);

  std::string config_path, suite, out_dir = "out", format = "json", in_dir = "out";
  std::optional<double> tol;
  auto* run = app.add_subcommand("run", "Run a verification suite");
  run->add_option("--config", config_path, "ini configuration file")->required();
  run->add_option("--suite", suite, "algebra|sov|spectrum|scalar|chp|inverse|formfactor|all")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--tol", tol, "override every upper-bound tolerance");

  auto* report = app.add_subcommand("report", "Print the last report");
  report->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}))->required();
  report->add_option("--in", in_dir, "directory holding report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, suite, out_dir, tol);
    return cmd_report(format, in_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NonGenericError& e) {
    std::cerr << "non-generic parameters: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
