#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "enfuse/error.hpp"
#include "enfuse/report.hpp"
#include "enfuse/schema_check.hpp"

using namespace enfuse;
using nlohmann::json;

namespace {

json method_row(const std::string& method, double cv, std::vector<double> folds, double test_rmse) {
  return {{"method", method},
          {"metrics", {{"train_rmse_cv", cv}, {"fold_rmse", std::move(folds)}, {"test_rmse", test_rmse}}}};
}

json report_doc(const std::string& dataset, std::uint64_t seed, json rows) {
  return {{"dataset", dataset}, {"seed", seed}, {"method_rows", std::move(rows)}};
}

}  // namespace

TEST(SchemaCheck, Keywords) {
  const json schema = json::parse(R"({
    "type": "object",
    "required": ["a", "b"],
    "additionalProperties": false,
    "properties": {
      "a": {"type": "integer", "minimum": 0, "maximum": 3},
      "b": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/c"}},
      "k": {"const": "x"},
      "e": {"enum": ["p", "q"]},
      "n": {"type": ["number", "null"]}
    },
    "$defs": {"c": {"type": "string"}}
  })");
  EXPECT_TRUE(schema::validate(json::parse(R"({"a": 1, "b": ["s"], "k": "x", "e": "q", "n": null})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 4, "b": ["s"]})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1.5, "b": ["s"]})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1, "b": []})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1, "b": [2]})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1, "b": ["s"], "z": 0})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1, "b": ["s"], "k": "y"})"), schema).empty());
  EXPECT_FALSE(schema::validate(json::parse(R"({"a": 1, "b": ["s"], "e": "r"})"), schema).empty());
}

TEST(SchemaCheck, ShippedSchemasLoad) {
  for (const char* name : {"pareto", "fusion", "benchmarks", "wilcoxon", "truth"}) {
    EXPECT_TRUE(schema::shipped(name).is_object()) << name;
  }
  EXPECT_THROW(schema::shipped("nope"), Error);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 123456.789, -2.5e-12, 0.0}) {
    EXPECT_EQ(std::stod(report::format_double(v)), v);
  }
}

TEST(Compare, CountsRows) {
  std::vector<json> docs;
  for (const char* dataset : {"house", "car"}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const double s = static_cast<double>(seed);
      docs.push_back(report_doc(dataset, seed,
                                json::array({method_row(report::kProposedMethod, 1.0, {1.0 + s, 2.0, 3.0}, 1.0 + 0.1 * s)})));
      docs.push_back(report_doc(dataset, seed,
                                json::array({method_row("ga-lr", 1.5, {2.0 + s, 2.5, 3.25}, 2.0 + 0.2 * s),
                                             method_row("en-grid", 1.4, {1.5 + s, 2.25, 3.5}, 1.5 + 0.3 * s)})));
    }
  }
  const auto rows = report::compare_reports(docs, {"fold_rmse", "test_rmse"}, "proposed-better");
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.defined) << r.note;
    EXPECT_EQ(r.alternative, "a-less");
  }
  EXPECT_EQ(rows[0].n, 18);
  const auto doc = report::comparison_json(rows);
  EXPECT_TRUE(schema::validate(doc, schema::shipped("wilcoxon")).empty());
}

TEST(Compare, IdenticalReportsAreUndefined) {
  std::vector<json> docs;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    docs.push_back(report_doc("d", seed,
                              json::array({method_row(report::kProposedMethod, 1.0, {1.0, 2.0}, 1.0),
                                           method_row("ga-lr", 1.0, {1.0, 2.0}, 1.0)})));
  }
  const auto rows = report::compare_reports(docs, {"fold_rmse"}, "two-sided");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].defined);
  EXPECT_EQ(rows[0].note, "identical samples");
  EXPECT_NE(report::comparison_csv(rows).find("undefined"), std::string::npos);
}

TEST(Compare, RepresentativeRowIsLowestCv) {
  std::vector<json> docs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    docs.push_back(report_doc("d", seed,
                              json::array({method_row(report::kProposedMethod, 1.0, {}, 1.0),
                                           method_row("ga-lr", 9.0, {}, 100.0),
                                           method_row("ga-lr", 2.0, {}, 2.0 + static_cast<double>(seed))})));
  }
  const auto rows = report::compare_reports(docs, {"test_rmse"}, "proposed-better");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].statistic, 0.0);
  EXPECT_EQ(rows[0].p_value, 1.0 / 32.0);
}

TEST(Compare, MissingProposedRows) {
  std::vector<json> docs{report_doc("d", 1, json::array({method_row("ga-lr", 1.0, {}, 1.0)}))};
  EXPECT_THROW(report::compare_reports(docs, {"test_rmse"}, "two-sided"), Error);
}
