#include <gtest/gtest.h>

#include "support/test_support.hpp"

using namespace carbon;
using carbon::testing::dc_flow_oracle;
using carbon::testing::make_case;

TEST(Ptdf, PaperThreeBusRows) {
  const CaseData c = paper_3bus_case();
  const PtdfMatrix p = build_ptdf(c);
  ASSERT_EQ(p.entries.rows(), 3);
  ASSERT_EQ(p.entries.cols(), 3);
  // Slack column is zero; line 2-3 row against slack 1.
  EXPECT_NEAR(p.entries.col(0).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(p.entries(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(p.entries(1, 2), -0.25, 1e-12);
}

TEST(Ptdf, PaperThreeBusBaseFlows) {
  const CaseData c = paper_3bus_case();
  const PtdfMatrix p = build_ptdf(c);
  Vector inj(3);
  inj << 130.0, -10.0, 30.0 - 150.0;
  const Vector f = p.flows(inj);
  EXPECT_NEAR(f(0), 35.0, 1e-9);
  EXPECT_NEAR(f(1), 25.0, 1e-9);
  EXPECT_NEAR(f(2), 95.0, 1e-9);
}

TEST(Ptdf, MatchesLaplacianOracle) {
  const CaseData c = synthetic_6bus_24h_case();
  const PtdfMatrix p = build_ptdf(c);
  Vector inj(6);
  inj << 120.0, 40.0, -15.0, -70.0, -45.0, -30.0;
  EXPECT_LT((p.flows(inj) - dc_flow_oracle(c, inj)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ptdf, FlowsIndependentOfSlack) {
  const CaseData c = synthetic_6bus_24h_case();
  Vector inj(6);
  inj << 10.0, 80.0, -25.0, -30.0, -20.0, -15.0;
  const Vector base = build_ptdf(c).flows(inj);
  for (const auto& b : c.buses) {
    EXPECT_LT((build_ptdf(c, b.id).flows(inj) - base).cwiseAbs().maxCoeff(), 1e-10) << "slack " << b.id;
  }
}

TEST(Ptdf, TwoBusCarriesFullTransfer) {
  const CaseData c = make_case(2, {{1, 2, 0.3, 100.0}}, {{"G", 1, 50.0, 0.0, 10.0, 0.5}}, {{2, 20.0}});
  const PtdfMatrix p = build_ptdf(c);
  Vector inj(2);
  inj << 20.0, -20.0;
  EXPECT_NEAR(p.flows(inj)(0), 20.0, 1e-12);
}

TEST(Ptdf, ParallelLinesSplitByAdmittance) {
  const CaseData c = make_case(2, {{1, 2, 1.0, 100.0}, {2, 1, 3.0, 100.0}}, {{"G", 1, 50.0, 0.0, 10.0, 0.5}}, {{2, 40.0}});
  Vector inj(2);
  inj << 40.0, -40.0;
  const Vector f = build_ptdf(c).flows(inj);
  EXPECT_NEAR(f(0), 30.0, 1e-12);
  EXPECT_NEAR(f(1), -10.0, 1e-12);
}

TEST(Ptdf, UnknownSlackOverrideThrows) {
  EXPECT_THROW(build_ptdf(paper_3bus_case(), 42), CaseValidationError);
}

TEST(CaseData, LoadMatrixAndIncidence) {
  const CaseData c = paper_3bus_case();
  const LoadMatrix d = c.load_matrix();
  EXPECT_EQ(d.rows(), 3);
  EXPECT_EQ(d.cols(), 1);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(1, 0), 10.0);
  EXPECT_EQ(d(2, 0), 150.0);
  const Matrix inc = c.generator_incidence();
  EXPECT_EQ(inc(0, 0), 1.0);
  EXPECT_EQ(inc(2, 1), 1.0);
  EXPECT_EQ(inc.sum(), 2.0);
  EXPECT_THROW(c.bus_index(9), CaseValidationError);
}

namespace {

CaseData three_bus_raw() {
  CaseData c;
  c.name = "raw";
  c.slack_bus = 1;
  c.buses = {{1}, {2}, {3}};
  c.lines = {{1, 2, 1.0, 50.0}, {2, 3, 1.0, 50.0}};
  c.generators = {{"G", 1, 100.0, 0.0, 10.0, 0.5}};
  c.loads = {{3, {30.0}}};
  return c;
}

void expect_invalid(const CaseData& c, const std::string& fragment) {
  try {
    validate_case(c);
    FAIL() << "expected validation failure containing \"" << fragment << "\"";
  } catch (const CaseValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Validation, AcceptsBaseline) { EXPECT_NO_THROW(validate_case(three_bus_raw())); }

TEST(Validation, ZeroReactance) {
  CaseData c = three_bus_raw();
  c.lines[0].reactance = 0.0;
  expect_invalid(c, "reactance must be positive");
}

TEST(Validation, InfeasibleCapacity) {
  CaseData c = three_bus_raw();
  c.loads[0].mw = {150.0};
  expect_invalid(c, "infeasible capacity");
}

TEST(Validation, Disconnected) {
  CaseData c = three_bus_raw();
  c.lines.pop_back();
  expect_invalid(c, "not connected");
}

TEST(Validation, MissingSlack) {
  CaseData c = three_bus_raw();
  c.slack_bus = 7;
  expect_invalid(c, "slack bus");
}

TEST(Validation, DuplicateBus) {
  CaseData c = three_bus_raw();
  c.buses.push_back({2});
  expect_invalid(c, "duplicate bus");
}

TEST(Validation, NegativeLoad) {
  CaseData c = three_bus_raw();
  c.loads[0].mw = {-1.0};
  expect_invalid(c, "nonnegative");
}

TEST(Validation, ProfileLengthMismatch) {
  CaseData c = three_bus_raw();
  c.periods = 2;
  expect_invalid(c, "entries");
}

TEST(Validation, SelfLoop) {
  CaseData c = three_bus_raw();
  c.lines[0].to_bus = 1;
  expect_invalid(c, "endpoints must differ");
}

TEST(Validation, NonzeroPmin) {
  CaseData c = three_bus_raw();
  c.generators[0].pmin_mw = 5.0;
  expect_invalid(c, "pmin");
}

TEST(Validation, UnknownGeneratorBus) {
  CaseData c = three_bus_raw();
  c.generators[0].bus = 8;
  expect_invalid(c, "unknown bus");
}

TEST(BuiltinCases, LookupByName) {
  EXPECT_TRUE(is_builtin_case("paper-3bus"));
  EXPECT_TRUE(is_builtin_case("synthetic-6bus-24h"));
  EXPECT_FALSE(is_builtin_case("ieee-14"));
  EXPECT_EQ(builtin_case("synthetic-6bus-24h").periods, 24);
  EXPECT_THROW(builtin_case("ieee-14"), CaseValidationError);
}
