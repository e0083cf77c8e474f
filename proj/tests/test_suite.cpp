#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sys/wait.h>

#include "nct/curvature.hpp"
#include "nct/suite.hpp"

using namespace nct;
using nlohmann::json;

namespace {

int run_cli(const std::string &args) {
  const std::string cmd = std::string(NCTLAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir() {
  const auto d = std::filesystem::temp_directory_path() / "nct_suite_test";
  std::filesystem::create_directories(d);
  return d;
}

void write(const std::filesystem::path &p, const json &j) { std::ofstream(p) << j.dump(2); }

}  // namespace

TEST_SUITE("suite") {
  TEST_CASE("config merge") {
    const json d = default_config();
    CHECK(merge_config(d, json()) == d);
    CHECK(merge_config(d, {{"heat", {{"N", 12}}}})["heat"]["N"] == 12);
    CHECK(merge_config(d, {{"heat", {{"zeta_tol", 1}}}})["heat"]["zeta_tol"].is_number_float());
    CHECK_THROWS_AS(merge_config(d, {{"nope", 1}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heat", {{"nope", 1}}}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heat", {{"N", 1.5}}}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heat", 3}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heat", {{"zeta_tol", 0.0}}}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"tau", {0.3, -1.0}}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heisenberg", {{"modules", {{1, 0, 0, 1}}}}}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, {{"heat", {{"family_s", {"a"}}}}}), ConfigError);
    CHECK_THROWS_AS(suite_criteria("nope"), ConfigError);
  }

  TEST_CASE("every bundle maps to criteria and all ten are covered") {
    std::set<int> seen;
    for (const auto &n : suite_names())
      for (int id : suite_criteria(n)) seen.insert(id);
    CHECK(seen.size() == 10);
    CHECK(suite_criteria("all").size() == 10);
  }

  TEST_CASE("fast criteria pass and report carries config and seed") {
    const json cfg = load_config("");
    const Report r = run_suite("identities", cfg);
    CHECK(r.passed());
    const json j = to_json(r);
    CHECK(validate_report(j).empty());
    CHECK(j["config"] == cfg);
    CHECK(j["seed"] == cfg["seed"]);
    bool fi_grid = false;
    for (const auto &t : r.tables) fi_grid = fi_grid || (t.name == "fi_grid" && t.rows.size() == 49 * 49);
    CHECK(fi_grid);
  }

  TEST_CASE("identical seed gives identical values") {
    const json cfg = load_config("");
    const Report a = run_criterion(9, cfg), b = run_criterion(9, cfg);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].pass == b.checks[i].pass);
      if (a.checks[i].name.find("runtime") == std::string::npos) CHECK(a.checks[i].value == b.checks[i].value);
    }
  }

  TEST_CASE("calibration is deterministic and a tampered file breaks a2 agreement") {
    json cfg = merge_config(default_config(), {{"parametrix", {{"N_symbol", 6}}}});
    const json c1 = calibrate_conventions(cfg), c2 = calibrate_conventions(cfg);
    CHECK(c1 == c2);
    CHECK(c1["contour_sign"] == 1);
    CHECK(c1["plancherel"] == 1.0);
    CHECK(std::abs(c1["flat_a0"].get<double>() - c1["flat_a0_expected"].get<double>()) < 1e-6);
    CHECK(c1["prefactor_lm_over_cm"].get<double>() == doctest::Approx(4 * kPi * 1.1));

    const auto dir = scratch_dir();
    write(dir / "good.json", c1);
    json bad = c1;
    bad["contour_sign"] = -1;
    write(dir / "bad.json", bad);
    const FrozenConventions good = load_conventions(dir / "good.json"), tampered = load_conventions(dir / "bad.json");
    CHECK(good.contour_sign == 1);

    const AlgebraParams p = config_params(cfg);
    std::mt19937_64 rng(5);
    const TorusElement h = random_self_adjoint(p, 1, 0.5, rng);
    auto ctx = make_context(p);
    const Parametrix par = resolvent_parametrix(laplace_kdk(dilaton_factors(h).k), ctx);
    SymbolEvaluator ev(ctx, GnsTruncation{6});
    const TorusElement probe = TorusElement::monomial(p, 1, 0) + TorusElement::monomial(p, -1, 0);
    const double closed = trace0(multiply(probe, modular_curvature(h, 16).density)).real();
    const double ok = a2_by_integration(par, {probe}, ev, {}, good).values[0];
    const double off = a2_by_integration(par, {probe}, ev, {}, tampered).values[0];
    CHECK(std::abs(ok - closed) < 1e-3 * std::abs(closed));
    CHECK(std::abs(off - closed) > 1e-3 * std::abs(closed));

    json wrong = c1;
    wrong["schema"] = "other/9";
    CHECK_THROWS_AS(conventions_from_json(wrong), ConfigError);
    wrong = c1;
    wrong["contour_sign"] = 0;
    CHECK_THROWS_AS(conventions_from_json(wrong), ConfigError);
    CHECK_THROWS_AS(load_conventions(dir / "missing.json"), ConfigError);
  }

  TEST_CASE("command-line exit codes") {
    const auto dir = scratch_dir();
    const std::string out = " --out " + (dir / "cli").string();
    CHECK(run_cli("kernels --which K0 --grid -1:1:0.5" + out) == 0);
    CHECK(run_cli("kernels --which K7" + out) == 2);
    CHECK(run_cli("kernels --grid 1:0:0.1" + out) == 2);
    CHECK(run_cli("suite nonsense" + out) == 2);
    write(dir / "unknown.json", {{"bogus", 1}});
    CHECK(run_cli("suite identities --config " + (dir / "unknown.json").string() + out) == 2);
    write(dir / "strict.json", {{"identities", {{"fi_tol", 1e-300}}}});
    CHECK(run_cli("suite identities --config " + (dir / "strict.json").string() + out) == 1);
    CHECK(std::filesystem::exists(dir / "cli" / "suite_identities.json"));
    CHECK(run_cli("suite identities" + out) == 0);
    CHECK(run_cli("curvature --input " + (dir / "missing.json").string() + out) == 2);
    CHECK(run_cli("heisenberg-spectrum --g 1,0,0,1" + out) == 2);
  }
}
