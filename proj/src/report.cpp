#include "nct/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace nct {

using nlohmann::json;

Check &Report::check(const std::string &name, double value, double tolerance, Relation rel) {
  Check c{name, value, tolerance, rel, false};
  c.pass = std::isfinite(value) && (rel == Relation::AtMost ? value <= tolerance : value >= tolerance);
  checks.push_back(c);
  return checks.back();
}

bool Report::passed() const {
  for (const Check &c : checks)
    if (!c.pass) return false;
  return true;
}

void Report::append(const Report &other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  tables.insert(tables.end(), other.tables.begin(), other.tables.end());
  for (const auto &[k, v] : other.results.items()) results[k] = v;
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string relation_name(Relation r) { return r == Relation::AtMost ? "<=" : ">="; }

}  // namespace

json to_json(const Check &c) {
  return {{"name", c.name},
          {"value", number(c.value)},
          {"tolerance", c.tolerance},
          {"relation", relation_name(c.relation)},
          {"pass", c.pass}};
}

json to_json(const Table &t) { return {{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}}; }

json to_json(const Report &r) {
  json checks = json::array(), tables = json::array();
  for (const Check &c : r.checks) checks.push_back(to_json(c));
  for (const Table &t : r.tables) tables.push_back(to_json(t));
  return {{"schema", kReportSchemaVersion},
          {"command", r.command},
          {"seed", r.seed},
          {"config", r.config},
          {"checks", checks},
          {"tables", tables},
          {"results", r.results},
          {"pass", r.passed()}};
}

std::vector<std::string> validate_report(const json &j) {
  std::vector<std::string> err;
  if (!j.is_object()) return {"report is not an object"};
  auto need = [&](const char *key, json::value_t type) {
    if (!j.contains(key)) {
      err.push_back(std::string("missing key ") + key);
      return false;
    }
    if (j[key].type() != type && !(type == json::value_t::number_unsigned && j[key].is_number_integer())) {
      err.push_back(std::string("wrong type for ") + key);
      return false;
    }
    return true;
  };
  if (need("schema", json::value_t::string) && j["schema"] != kReportSchemaVersion) err.push_back("unknown schema");
  need("command", json::value_t::string);
  need("seed", json::value_t::number_unsigned);
  need("config", json::value_t::object);
  need("results", json::value_t::object);
  need("pass", json::value_t::boolean);
  if (need("tables", json::value_t::array))
    for (const auto &t : j["tables"])
      if (!t.contains("name") || !t.contains("columns") || !t.contains("rows")) err.push_back("malformed table entry");
  if (need("checks", json::value_t::array)) {
    bool all = true;
    for (const auto &c : j["checks"]) {
      if (!c.is_object() || !c.contains("name") || !c.contains("value") || !c.contains("tolerance") ||
          !c.contains("relation") || !c.contains("pass")) {
        err.push_back("malformed check entry");
        continue;
      }
      if (!c["tolerance"].is_number()) err.push_back("check " + c["name"].get<std::string>() + " has no tolerance");
      if (c["relation"] != "<=" && c["relation"] != ">=") err.push_back("unknown relation");
      all = all && c["pass"].get<bool>();
    }
    if (j.contains("pass") && j["pass"].is_boolean() && j["pass"].get<bool>() != all)
      err.push_back("pass flag disagrees with checks");
  }
  return err;
}

Report report_from_json(const json &j) {
  const auto err = validate_report(j);
  if (!err.empty()) throw std::invalid_argument("invalid report: " + err.front());
  Report r;
  r.command = j["command"];
  r.seed = j["seed"];
  r.config = j["config"];
  r.results = j["results"];
  for (const auto &c : j["checks"]) {
    Check k;
    k.name = c["name"];
    k.value = c["value"].is_null() ? NAN : c["value"].get<double>();
    k.tolerance = c["tolerance"];
    k.relation = c["relation"] == "<=" ? Relation::AtMost : Relation::AtLeast;
    k.pass = c["pass"];
    r.checks.push_back(k);
  }
  for (const auto &t : j["tables"]) r.tables.push_back({t["name"], t["columns"], {}});
  return r;
}

void write_csv(const Table &t, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n" << std::setprecision(17);
  for (const auto &row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::vector<std::filesystem::path> emit_report(const Report &r, const std::filesystem::path &dir,
                                               const std::string &stem) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  const auto jpath = dir / (stem + ".json");
  std::ofstream out(jpath);
  if (!out) throw std::runtime_error("cannot write " + jpath.string());
  out << std::setw(2) << to_json(r) << "\n";
  files.push_back(jpath);
  for (const Table &t : r.tables) {
    const auto p = dir / (stem + "_" + t.name + ".csv");
    write_csv(t, p);
    files.push_back(p);
  }
  return files;
}

}  // namespace nct
