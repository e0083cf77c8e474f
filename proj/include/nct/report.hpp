#pragma once
// Result emission: JSON reports with per-check tolerances and CSV tables.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nct {

inline constexpr const char *kReportSchemaVersion = "nctlab-report/1";

enum class Relation { AtMost, AtLeast };

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::AtMost;
  bool pass = false;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::vector<Table> tables;
  nlohmann::json results = nlohmann::json::object();

  /// value <= tol (AtMost) or value >= tol (AtLeast); NaN never passes.
  Check &check(const std::string &name, double value, double tolerance, Relation rel = Relation::AtMost);
  bool passed() const;
  void append(const Report &other);
};

nlohmann::json to_json(const Check &c);
nlohmann::json to_json(const Table &t);
nlohmann::json to_json(const Report &r);
Report report_from_json(const nlohmann::json &j);
/// Empty when the document follows the report schema, else one message per violation.
std::vector<std::string> validate_report(const nlohmann::json &j);

void write_csv(const Table &t, const std::filesystem::path &path);
/// <dir>/<stem>.json and <dir>/<stem>_<table>.csv; returns the written paths.
std::vector<std::filesystem::path> emit_report(const Report &r, const std::filesystem::path &dir,
                                               const std::string &stem);

}  // namespace nct
