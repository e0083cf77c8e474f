#pragma once
// Acceptance bundles, configuration handling and convention calibration behind the nctlab front end.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nct/nctorus.hpp"
#include "nct/psymbol.hpp"
#include "nct/report.hpp"

namespace nct {

inline constexpr const char *kConventionSchemaVersion = "nctlab-conventions/1";

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitTolerance = 1, kExitConfig = 2, kExitCalibration = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CalibrationAmbiguity : std::runtime_error {
  nlohmann::json diagnostics;
  CalibrationAmbiguity(const std::string &what, nlohmann::json diag)
      : std::runtime_error(what), diagnostics(std::move(diag)) {}
};

/// Every parameter with its default; echoed verbatim into reports.
nlohmann::json default_config();
/// Overlay user values on the defaults. Unknown keys, type mismatches and non-positive tolerances throw ConfigError.
nlohmann::json merge_config(const nlohmann::json &defaults, const nlohmann::json &user);
/// default_config() merged with the JSON file at path (defaults alone for an empty path).
nlohmann::json load_config(const std::filesystem::path &path);
AlgebraParams config_params(const nlohmann::json &cfg);

/// Bundle names in execution order, "all" excluded.
const std::vector<std::string> &suite_names();
/// Acceptance criteria (1..10) run by a bundle; "all" gives every criterion.
std::vector<int> suite_criteria(const std::string &name);

/// One acceptance criterion with its checks (including a runtime bound) and tables.
Report run_criterion(int id, const nlohmann::json &cfg);
Report run_suite(const std::string &name, const nlohmann::json &cfg);

/// Flat-case calibration of the contour sign, the xi-measure normalisation and the density prefactor map.
/// Throws CalibrationAmbiguity unless exactly one (sign, measure) pair is consistent.
nlohmann::json calibrate_conventions(const nlohmann::json &cfg);
FrozenConventions conventions_from_json(const nlohmann::json &j, const std::string &source = "inline");
FrozenConventions load_conventions(const std::filesystem::path &path);
/// Conventions named by cfg["conventions"], built-in ones when that path is empty.
FrozenConventions config_conventions(const nlohmann::json &cfg);

}  // namespace nct
