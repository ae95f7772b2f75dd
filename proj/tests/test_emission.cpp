#include <gtest/gtest.h>

#include "support/test_support.hpp"

using namespace carbon;
using carbon::testing::make_case;

namespace {

struct Solved {
  CaseData c;
  PtdfMatrix ptdf;
  LoadMatrix loads;
  ClearingProblem prob;
  ClearingSolution sol;
  EmissionVector k;
};

Solved run(const CaseData& c) {
  Solved r{c, build_ptdf(c), c.load_matrix(), {}, {}, EmissionVector::from_case(c)};
  r.prob = assemble_clearing_lp(c, r.ptdf, r.loads);
  r.sol = solve_clearing(r.prob);
  return r;
}

/// Radial chain 1-2-3: cheap coal at 1, gas at 2, peaker at 3. Along the
/// load ray line 2-3 (flow 100 sigma) congests at sigma = 0.5; afterwards
/// line 1-2 carries 100 sigma + 50 and congests at sigma = 0.75.
CaseData two_breakpoint_chain() {
  return make_case(3, {{1, 2, 0.1, 125.0}, {2, 3, 0.1, 50.0}},
                   {{"coal", 1, 500.0, 0.0, 10.0, 1.0}, {"gas", 2, 500.0, 0.0, 20.0, 0.4},
                    {"peaker", 3, 500.0, 0.0, 40.0, 0.7}},
                   {{2, 100.0}, {3, 100.0}}, "chain");
}

}  // namespace

TEST(TotalEmission, PaperValues) {
  const EmissionVector k = EmissionVector::from_case(paper_3bus_case());
  Vector x(2);
  x << 130.0, 30.0;
  EXPECT_NEAR(total_emission(k, x), 50.0, 1e-12);
  x << 131.0, 30.0;
  EXPECT_NEAR(total_emission(k, x), 50.2, 1e-12);
  EXPECT_EQ(total_emission(k, Vector(Vector::Zero(2))), 0.0);
  EXPECT_THROW(total_emission(k, Vector(Vector::Zero(3))), NumericalError);
}

TEST(Lmce, PaperValuesAndDecomposition) {
  const Solved r = run(paper_3bus_case());
  const LmceResult l = decompose_lmce(r.k, r.prob, r.sol);
  const double expected[3] = {0.2, -1.0, 0.8};
  const double network[3] = {0.0, -1.2, 0.6};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(l.value(0, i), expected[i], 1e-9);
    EXPECT_NEAR(l.energy_part(0, i), 0.2, 1e-9);
    EXPECT_NEAR(l.network_part(0, i), network[i], 1e-9);
    EXPECT_LE(std::abs(l.energy_part(0, i) + l.network_part(0, i) - l.value(0, i)), 1e-12);
  }
}

TEST(Lmce, ZeroEmissionFactorsGiveZero) {
  const Solved r = run(paper_3bus_case());
  const LmceResult l = decompose_lmce(EmissionVector{Vector::Zero(2)}, r.prob, r.sol);
  EXPECT_EQ(l.value.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lmce, SixBusUniformWhenUncongested) {
  const Solved r = run(synthetic_6bus_24h_case());
  const LmceResult l = decompose_lmce(r.k, r.prob, r.sol);
  for (int hour : {1, 2, 3, 4, 5, 6, 7, 24}) {
    const Eigen::Index t = hour - 1;
    EXPECT_LT(l.network_part.row(t).cwiseAbs().maxCoeff(), 1e-9) << hour;
    EXPECT_LT(l.value.row(t).maxCoeff() - l.value.row(t).minCoeff(), 1e-9) << hour;
    EXPECT_NEAR(l.value(t, 0), 0.95, 1e-9) << hour;
  }
  for (int hour = 8; hour <= 23; ++hour) {
    const Eigen::Index t = hour - 1;
    EXPECT_LT(l.energy_part.row(t).maxCoeff() - l.energy_part.row(t).minCoeff(), 1e-9) << hour;
    EXPECT_GT(l.value.row(t).maxCoeff() - l.value.row(t).minCoeff(), 1e-3) << hour;
  }
}

TEST(Lmce, ProbeMatchesClearing) {
  const Solved r = run(paper_3bus_case());
  const LmceProbe probe(r.c, r.ptdf);
  const Vector v = probe.lmce(r.loads.col(0));
  EXPECT_NEAR(v(1), -1.0, 1e-9);
  EXPECT_NEAR(probe.clear(r.loads.col(0)).x(0), 130.0, 1e-9);
}

TEST(Breakpoints, PaperSingleInterior) {
  const Solved r = run(paper_3bus_case());
  const auto y = find_breakpoints(r.c, r.ptdf, Vector(r.loads.col(0)), 0);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y.front(), 0.0);
  EXPECT_EQ(y.back(), 1.0);
  EXPECT_NEAR(y[1], 10.0 / 13.0, 1e-9);
}

TEST(Breakpoints, NoneWhenNeverCongested) {
  const CaseData c = make_case(2, {{1, 2, 0.1, 500.0}}, {{"A", 1, 100.0, 0.0, 10.0, 0.6}, {"B", 2, 100.0, 0.0, 30.0, 0.2}},
                               {{2, 80.0}});
  const auto y = find_breakpoints(c, build_ptdf(c), Vector(c.load_matrix().col(0)), 0);
  EXPECT_EQ(y, (std::vector<double>{0.0, 1.0}));
}

TEST(Breakpoints, TwoLinesCongestAtDifferentSigma) {
  const CaseData c = two_breakpoint_chain();
  const auto y = find_breakpoints(c, build_ptdf(c), Vector(c.load_matrix().col(0)), 0);
  ASSERT_EQ(y.size(), 4u);
  EXPECT_NEAR(y[1], 0.5, 1e-9);
  EXPECT_NEAR(y[2], 0.75, 1e-9);
}

TEST(Breakpoints, SafetyCap) {
  const CaseData c = two_breakpoint_chain();
  LaceOptions opt;
  opt.max_breakpoints = 1;
  try {
    find_breakpoints(c, build_ptdf(c), Vector(c.load_matrix().col(0)), 0, opt);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("excessive degeneracy"), std::string::npos);
  }
}

TEST(Breakpoints, OptionErrors) {
  const CaseData c = paper_3bus_case();
  LaceOptions opt;
  opt.seed_points = 0;
  EXPECT_THROW(find_breakpoints(c, build_ptdf(c), Vector(c.load_matrix().col(0)), 0, opt), CaseValidationError);
}

TEST(Lace, PaperValues) {
  const Solved r = run(paper_3bus_case());
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  EXPECT_NEAR(l.value(0, 1), -1.0 / 13.0, 1e-9);
  EXPECT_NEAR(l.value(0, 2), 0.2 * 10.0 / 13.0 + 0.8 * 3.0 / 13.0, 1e-9);
  EXPECT_NEAR(l.allocation(0, 1), -10.0 / 13.0, 1e-8);
  EXPECT_NEAR(l.allocation(0, 2), 150.0 * (4.4 / 13.0), 1e-7);
  // Bus 1 has no load: allocation 0, value is the weighted LMCE.
  EXPECT_EQ(l.allocation(0, 0), 0.0);
  EXPECT_NEAR(l.value(0, 0), 0.2, 1e-9);
  ASSERT_EQ(l.segment_lmce.size(), 1u);
  EXPECT_EQ(l.segment_lmce[0].rows(), 2);
}

TEST(Lace, WeightedSumOfSegments) {
  const Solved r = run(two_breakpoint_chain());
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  const auto& y = l.breakpoints[0];
  Vector sum = Vector::Zero(3);
  for (std::size_t m = 0; m + 1 < y.size(); ++m) {
    sum += (y[m + 1] - y[m]) * l.segment_lmce[0].row(static_cast<Eigen::Index>(m)).transpose();
  }
  EXPECT_LT((sum - l.value.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-10);
  // Closed form: bus 2 follows coal until sigma 0.75 then gas; bus 3 follows
  // coal until 0.5 then the peaker.
  EXPECT_NEAR(l.value(0, 1), 0.75 * 1.0 + 0.25 * 0.4, 1e-9);
  EXPECT_NEAR(l.value(0, 2), 0.5 * 1.0 + 0.5 * 0.7, 1e-9);
}

TEST(Lace, SingleSegmentEqualsLmce) {
  const CaseData c = make_case(2, {{1, 2, 0.1, 500.0}}, {{"A", 1, 100.0, 0.0, 10.0, 0.6}, {"B", 2, 100.0, 0.0, 30.0, 0.2}},
                               {{2, 80.0}});
  const Solved r = run(c);
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  const LmceResult m = decompose_lmce(r.k, r.prob, r.sol);
  EXPECT_LT((l.value - m.value).cwiseAbs().maxCoeff(), 1e-12);
  const LaceResult one = compute_lace_riemann(r.c, r.ptdf, r.loads, 1);
  EXPECT_LT((one.value - l.value).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lace, PiecewiseConstantInsideSegments) {
  const Solved r = run(two_breakpoint_chain());
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  const LmceProbe probe(r.c, r.ptdf);
  const auto& y = l.breakpoints[0];
  for (std::size_t m = 0; m + 1 < y.size(); ++m) {
    const double a = y[m];
    const double w = y[m + 1] - a;
    const Vector v1 = probe.lmce((a + 0.25 * w) * r.loads.col(0));
    const Vector v2 = probe.lmce((a + 0.5 * w) * r.loads.col(0));
    const Vector v3 = probe.lmce((a + 0.75 * w) * r.loads.col(0));
    EXPECT_LT((v1 - v2).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((v3 - v2).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Lace, RiemannAgreesWithinMidpointBound) {
  for (const CaseData& c : {paper_3bus_case(), two_breakpoint_chain()}) {
    const Solved r = run(c);
    const LaceResult exact = compute_lace(r.c, r.ptdf, r.loads);
    const int n = 2000;
    const LaceResult approx = compute_lace_riemann(r.c, r.ptdf, r.loads, n);
    const double interior = static_cast<double>(exact.breakpoints[0].size() - 2);
    const double max_lmce = exact.segment_lmce[0].cwiseAbs().maxCoeff();
    EXPECT_LE((exact.value - approx.value).cwiseAbs().maxCoeff(), 2.0 * interior / n * max_lmce + 1e-12)
        << c.name;
  }
}

TEST(Lace, RiemannPaperBusTwo) {
  const Solved r = run(paper_3bus_case());
  const LaceResult l = compute_lace_riemann(r.c, r.ptdf, r.loads, 13000);
  EXPECT_NEAR(l.value(0, 1), -0.07692, 1e-4);
  EXPECT_TRUE(l.breakpoints.empty());
  EXPECT_THROW(compute_lace_riemann(r.c, r.ptdf, r.loads, 0), CaseValidationError);
}

TEST(Lace, ExplicitBreakpointValidation) {
  const Solved r = run(paper_3bus_case());
  EXPECT_THROW(compute_lace(r.c, r.ptdf, r.loads, {{0.0, 0.5}}), CaseValidationError);
  EXPECT_THROW(compute_lace(r.c, r.ptdf, r.loads, {{0.0, 0.6, 0.5, 1.0}}), CaseValidationError);
  EXPECT_THROW(compute_lace(r.c, r.ptdf, r.loads, std::vector<std::vector<double>>{}), CaseValidationError);
}

TEST(Conservation, PaperAndSixBus) {
  for (const CaseData& c : {paper_3bus_case(), synthetic_6bus_24h_case(), two_breakpoint_chain()}) {
    const Solved r = run(c);
    const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
    const ConservationReport rep = verify_conservation(l, r.loads, total_emission(r.k, r.sol.dispatch));
    EXPECT_LE(rep.relative_gap, 1e-9) << c.name;
  }
}

TEST(Conservation, ZeroLoads) {
  CaseData c = paper_3bus_case();
  c.loads.clear();
  const Solved r = run(c);
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  EXPECT_EQ(l.allocation.cwiseAbs().maxCoeff(), 0.0);
  const ConservationReport rep = verify_conservation(l, r.loads, total_emission(r.k, r.sol.dispatch));
  EXPECT_EQ(rep.allocated, 0.0);
  EXPECT_EQ(rep.actual, 0.0);
  EXPECT_EQ(rep.relative_gap, 0.0);
}

TEST(Scaling, DoublingEmissionFactorsIsExact) {
  CaseData c = synthetic_6bus_24h_case();
  CaseData c2 = c;
  for (auto& g : c2.generators) g.emission_t_per_mwh *= 2.0;
  const Solved a = run(c);
  const Solved b = run(c2);
  const LmceResult la = decompose_lmce(a.k, a.prob, a.sol);
  const LmceResult lb = decompose_lmce(b.k, b.prob, b.sol);
  EXPECT_EQ(lb.value, Matrix(2.0 * la.value));
  const LaceResult xa = compute_lace(a.c, a.ptdf, a.loads);
  const LaceResult xb = compute_lace(b.c, b.ptdf, b.loads);
  EXPECT_EQ(xb.value, Matrix(2.0 * xa.value));
  EXPECT_EQ(xb.allocation, Matrix(2.0 * xa.allocation));
}

TEST(Breakpoints, CapacityLimitRefinedExactly) {
  // Cheap unit behind no constraint runs out at 60 MW of 100 MW load:
  // the binding set changes at sigma = 0.6 exactly.
  const CaseData c = make_case(2, {{1, 2, 0.1, 500.0}}, {{"A", 1, 60.0, 0.0, 10.0, 0.9}, {"B", 2, 100.0, 0.0, 30.0, 0.1}},
                               {{2, 100.0}});
  const auto y = find_breakpoints(c, build_ptdf(c), Vector(c.load_matrix().col(0)), 0);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_NEAR(y[1], 0.6, 1e-12);
  const Solved r = run(c);
  const LaceResult l = compute_lace(r.c, r.ptdf, r.loads);
  EXPECT_NEAR(l.allocation(0, 1), 60.0 * 0.9 + 40.0 * 0.1, 1e-10);
}
