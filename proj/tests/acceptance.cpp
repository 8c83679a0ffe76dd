/**
 * @file acceptance.cpp
 * @brief Runs the suites behind each acceptance criterion and prints one PASS/FAIL line per criterion.
 *
 * Usage: acceptance <configs-dir>. Exit code 0 iff every criterion passes.
 */
#include "sovlat/suites.hpp"

#include <chrono>
#include <functional>
#include <iostream>

namespace {

using namespace sovlat;

struct Criterion {
  int id;
  std::string title;
  std::vector<std::pair<std::string, std::string>> runs;  ///< (config file, suite)
  double time_limit_s = 0.0;                              ///< per run, 0 = none
};

struct Outcome {
  bool pass = true;
  int checks = 0;
  std::vector<std::string> failures;
  double slowest_s = 0.0;
};

SuiteReport run_named(const RunConfig& cfg, const std::string& suite) {
  if (suite == "hamiltonian") return run_hamiltonian(cfg);
  return run_suite(cfg, suite);
}

Outcome evaluate(const Criterion& c, const std::string& dir) {
  Outcome o;
  for (const auto& [file, suite] : c.runs) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunConfig cfg = load_config(dir + "/" + file);
      const SuiteReport r = run_named(cfg, suite);
      for (const Check& k : r.checks) {
        if (!k.gated) continue;
        ++o.checks;
        if (!k.pass) {
          o.pass = false;
          o.failures.push_back(fmt::format("{}:{}:{} residual={:.3e} tol={:.1e}", file, suite, k.name, k.residual,
                                           k.tolerance));
        }
      }
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures.push_back(fmt::format("{}:{}: {}", file, suite, e.what()));
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.slowest_s = std::max(o.slowest_s, s);
    if (c.time_limit_s > 0.0 && s > c.time_limit_s) {
      o.pass = false;
      o.failures.push_back(fmt::format("{}:{}: took {:.1f} s (limit {:.0f} s)", file, suite, s, c.time_limit_s));
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <configs-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  const std::vector<std::string> generic = {"p3_n2.ini", "p3_n3.ini", "p5_n2.ini"};
  auto over = [](const std::vector<std::string>& files, const std::string& suite) {
    std::vector<std::pair<std::string, std::string>> r;
    for (const auto& f : files) r.emplace_back(f, suite);
    return r;
  };
  const std::vector<Criterion> criteria = {
      {1, "monodromy algebra (Yang-Baxter, commutativity, quantum determinant, averages)", over(generic, "algebra"), 10.0},
      {2, "SOV basis actions, measure and identity decomposition", over(generic, "sov")},
      {3, "functional equation, Q tables and SOV eigenstates", over(generic, "spectrum")},
      {4, "scalar-product determinants and charge selection", over(generic, "scalar")},
      {5, "chiral Potts curve, weights, commutativity, Q-operator, intertwining, propagator",
       over({"p3_n3.ini", "p5_n2.ini"}, "chp")},
      {6, "quantum inverse problem and elementary operators", over({"p3_n2.ini", "p3_n3.ini"}, "inverse")},
      {7, "form factors as determinants", over(generic, "formfactor")},
      {8, "Hamiltonian commutativity and order parameter", {{"p3_n3_homogeneous_chp.ini", "hamiltonian"}}},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    const Outcome o = evaluate(c, dir);
    all = all && o.pass;
    std::cout << fmt::format("CRITERION {} {}: {} ({} gated checks, slowest run {:.1f} s)\n", c.id,
                             o.pass ? "PASS" : "FAIL", c.title, o.checks, o.slowest_s);
    for (const auto& f : o.failures) std::cout << "    " << f << '\n';
  }
  std::cout << (all ? "ALL CRITERIA PASS\n" : "SOME CRITERIA FAIL\n");
  return all ? 0 : 1;
}
