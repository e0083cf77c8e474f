// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include <cstring>
#include <iomanip>
#include <iostream>

#include "nct/suite.hpp"

using namespace nct;
using nlohmann::json;

namespace {

const json kPinned = {
    {"identities", {{"fi_box", 6.0}, {"fi_step", 0.25}, {"fi_tol", 1e-10}, {"fi_runtime_s", 5.0}, {"bern_terms", 6},
                    {"bern_tol", 1e-9}, {"bern_runtime_s", 1.0}}},
    {"curvature", {{"dilatons", 10}, {"radius", 2}, {"l1", 1.0}, {"N", 16}, {"N_fine", 32}, {"gb_tol", 1e-7},
                   {"runtime_s", 120.0}}},
    {"parametrix", {{"dilatons", 3}, {"radius", 1}, {"l1", 0.5}, {"N_heat", 24}, {"fit_tol", 5e-2},
                    {"symbol_tol", 1e-3}, {"a2_runtime_s", 900.0}, {"routes_tol", 1e-8},
                    {"symbol_product_tol", 1e-14}, {"degeneration_tol", 1e-12}, {"slope_window_tol", 0.2},
                    {"twist_runtime_s", 120.0}}},
    {"heat", {{"flat_a0_tol", 1e-3}, {"flat_a2_factor", 2e-3}, {"flat_runtime_s", 180.0}, {"zeta_dilatons", 3},
              {"zeta_tol", 5e-2}, {"projection_tol", 1e-8}, {"decay_slope", -6.0}, {"trace_runtime_s", 60.0}}},
    {"gradient", {{"directions", 10}, {"fd_tol", 1e-5}, {"positivity_samples", 20}, {"scale_tol", 1e-9},
                  {"runtime_s", 300.0}}},
    {"heisenberg", {{"L", 12.0}, {"G", 512}, {"modules", {{0, -1, 1, 0}, {1, 0, 2, 1}}}, {"pairs", 10},
                    {"relation_tol", 1e-7}, {"commutator_tol", 1e-8}, {"ladder_tol", 1e-6}, {"flat_a2_tol", 1e-3},
                    {"morita_tol", 0.1}, {"runtime_s", 600.0}}},
};

const char *kTitles[] = {"",
                         "functional identity",
                         "Bernoulli series",
                         "Gauss-Bonnet",
                         "three-way a2 agreement",
                         "flat-case calibration",
                         "zeta value at zero",
                         "variational suite",
                         "twisted calculus",
                         "trace formula",
                         "Heisenberg suite"};

}  // namespace

int main(int argc, char **argv) {
  std::string out = "acceptance";
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--out") && i + 1 < argc) out = argv[++i];
    else ids.push_back(std::atoi(argv[i]));
  }
  if (ids.empty()) ids = suite_criteria("all");

  const json cfg = merge_config(default_config(), kPinned);
  Report all;
  all.command = "acceptance";
  all.config = cfg;
  all.seed = cfg.at("seed");
  int failed = 0;
  for (int id : ids) {
    Report r;
    try {
      r = run_criterion(id, cfg);
    } catch (const std::exception &e) {
      r.check("c" + std::to_string(id) + ".exception", NAN, 0.0);
      r.results["c" + std::to_string(id) + "_error"] = e.what();
      std::cerr << "criterion " << id << " threw: " << e.what() << "\n";
    }
    std::string failing;
    for (const Check &c : r.checks)
      if (!c.pass) failing += (failing.empty() ? "" : ", ") + c.name;
    std::cout << "criterion " << std::setw(2) << id << " [" << kTitles[id] << "]: " << (r.passed() ? "PASS" : "FAIL");
    if (!failing.empty()) std::cout << " (" << failing << ")";
    std::cout << std::endl;
    for (const Check &c : r.checks)
      std::cout << "    " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << c.value
                << (c.relation == Relation::AtMost ? " <= " : " >= ") << c.tolerance << "\n";
    failed += !r.passed();
    all.append(r);
  }
  emit_report(all, out, "acceptance");
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
