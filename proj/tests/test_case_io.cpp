#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/test_support.hpp"

using namespace carbon;

namespace {

const char* kTwoBus = R"({
  "name": "two-bus",
  "periods": 2,
  "slack_bus": 1,
  "buses": [{"id": 1}, {"id": 2}],
  "lines": [{"from": 1, "to": 2, "reactance": 0.1, "capacity_mw": 80}],
  "generators": [{"id": "G1", "bus": 1, "pmax_mw": 100, "bid_per_mwh": 12.5, "emission_t_per_mwh": 0.7}],
  "loads": [{"bus": 2, "mw": [40, 55.5]}]
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(CaseIo, ParsesAllFields) {
  const CaseData c = parse_case(kTwoBus);
  EXPECT_EQ(c.name, "two-bus");
  EXPECT_EQ(c.periods, 2);
  ASSERT_EQ(c.lines.size(), 1u);
  EXPECT_DOUBLE_EQ(c.lines[0].reactance, 0.1);
  ASSERT_EQ(c.generators.size(), 1u);
  EXPECT_DOUBLE_EQ(c.generators[0].bid_per_mwh, 12.5);
  EXPECT_DOUBLE_EQ(c.load_matrix()(1, 1), 55.5);
}

TEST(CaseIo, LoadsOptional) {
  const std::string text = replace(kTwoBus, R"(,
  "loads": [{"bus": 2, "mw": [40, 55.5]}])", "");
  const CaseData c = parse_case(text);
  EXPECT_TRUE(c.loads.empty());
  EXPECT_EQ(c.load_matrix().sum(), 0.0);
}

TEST(CaseIo, RoundTrip) {
  const CaseData a = synthetic_6bus_24h_case();
  const CaseData b = parse_case(case_to_json(a));
  EXPECT_EQ(case_to_json(b), case_to_json(a));
  EXPECT_EQ(a.load_matrix(), b.load_matrix());
}

TEST(CaseIo, RejectsUnknownTopLevelKey) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "\"periods\"", "\"horizon\": 3, \"periods\"")), CaseParseError);
}

TEST(CaseIo, RejectsUnknownNestedKey) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "\"reactance\"", "\"resistance\": 0.01, \"reactance\"")), CaseParseError);
}

TEST(CaseIo, RejectsMissingKey) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "\"slack_bus\": 1,", "")), CaseParseError);
}

TEST(CaseIo, RejectsMalformedJson) {
  EXPECT_THROW(parse_case("{\"name\": "), CaseParseError);
}

TEST(CaseIo, RejectsWrongType) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "\"periods\": 2", "\"periods\": \"two\"")), CaseParseError);
}

TEST(CaseIo, ZeroReactanceIsValidationError) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "\"reactance\": 0.1", "\"reactance\": 0")), CaseValidationError);
}

TEST(CaseIo, InfeasibleCapacityIsValidationError) {
  EXPECT_THROW(parse_case(replace(kTwoBus, "[40, 55.5]", "[40, 155.5]")), CaseValidationError);
}

TEST(CaseIo, MissingFile) {
  try {
    load_case("/nonexistent/dir/case.json");
    FAIL();
  } catch (const CaseValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("case file not found"), std::string::npos);
  }
}

TEST(CaseIo, LoadsFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "carbon_case_io_test.json";
  std::ofstream(path) << kTwoBus;
  EXPECT_EQ(load_case(path).name, "two-bus");
  std::filesystem::remove(path);
}
