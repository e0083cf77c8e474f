#include <doctest.h>

#include <fstream>

#include "nct/report.hpp"

using namespace nct;

TEST_SUITE("report") {
  TEST_CASE("empty report is valid") {
    Report r;
    r.command = "empty";
    const auto j = to_json(r);
    CHECK(validate_report(j).empty());
    CHECK(j["checks"].empty());
    CHECK(j["pass"] == true);
  }

  TEST_CASE("round trip through the validator") {
    Report r;
    r.command = "x";
    r.seed = 42;
    r.config = {{"N", 8}};
    r.check("small", 1e-9, 1e-8);
    r.check("big", 3.0, 2.0, Relation::AtLeast);
    r.check("nan", NAN, 1.0);
    r.tables.push_back({"t", {"a", "b"}, {{1, 2}, {3, 4}}});
    const auto j = to_json(r);
    CHECK(validate_report(j).empty());
    const Report back = report_from_json(j);
    REQUIRE(back.checks.size() == 3);
    CHECK(back.checks[0].pass);
    CHECK(back.checks[1].pass);
    CHECK(!back.checks[2].pass);
    CHECK(std::isnan(back.checks[2].value));
    CHECK(back.seed == 42);
    CHECK(to_json(back)["pass"] == false);
  }

  TEST_CASE("validator catches tampering") {
    Report r;
    r.command = "x";
    r.check("a", 2.0, 1.0);
    auto j = to_json(r);
    j["pass"] = true;
    CHECK(!validate_report(j).empty());
    auto k = to_json(r);
    k.erase("seed");
    CHECK(!validate_report(k).empty());
    CHECK_THROWS(report_from_json(k));
  }

  TEST_CASE("csv rows match the table") {
    Report r;
    r.command = "csv";
    Table t{"grid", {"s", "value"}, {}};
    for (int i = 0; i < 17; ++i) t.rows.push_back({0.25 * i, 1.0 / (1 + i)});
    r.tables.push_back(t);
    const auto dir = std::filesystem::temp_directory_path() / "nct_report_test";
    const auto files = emit_report(r, dir, "r");
    REQUIRE(files.size() == 2);
    std::ifstream in(files[1]);
    int lines = 0;
    for (std::string s; std::getline(in, s);) ++lines;
    CHECK(lines == 18);
    std::filesystem::remove_all(dir);
  }
}
