#include <gtest/gtest.h>

#include "smoothsdp/maxcut.hpp"
#include "smoothsdp/staircase.hpp"
#include "test_helpers.hpp"

using namespace smoothsdp;
using namespace testing_oracles;

TEST(ParseGset, Triangle) {
  Graph g = parse_gset("3 3\n1 2 1\n1 3 1\n2 3 1\n");
  EXPECT_EQ(g.n, 3);
  ASSERT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.edges[0].i, 0);
  EXPECT_EQ(g.edges[0].j, 1);
  EXPECT_DOUBLE_EQ(g.edges[0].w, 1.0);
}

TEST(ParseGset, NegativeWeight) {
  Graph g = parse_gset("2 1\n1 2 -1\n");
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_DOUBLE_EQ(g.edges[0].w, -1.0);
}

TEST(ParseGset, ErrorsCarryLineNumbers) {
  try {
    parse_gset("2 1\n1 3 1\n");
    FAIL() << "expected out-of-range error";
  } catch (const GsetParseError& e) {
    EXPECT_EQ(e.line, 2);
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
  EXPECT_THROW(parse_gset("2 1\n1 x 1\n"), GsetParseError);
  EXPECT_THROW(parse_gset("2 2\n1 2 1\n"), GsetParseError);          // too few edges
  EXPECT_THROW(parse_gset("2 1\n1 2 1\n1 2 1\n"), GsetParseError);   // extra rows
  EXPECT_THROW(parse_gset("2 1\n1 1 1\n"), GsetParseError);          // self-loop
  EXPECT_THROW(parse_gset("", 0), GsetParseError);
}

TEST(ParseGset, DuplicateEdgesSummedWithWarning) {
  std::vector<std::string> warnings;
  Graph g = parse_gset("2 2\n1 2 1\n2 1 2\n", &warnings);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_DOUBLE_EQ(g.edges[0].w, 3.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(BuildProblem, SingleEdgeLaplacian) {
  Graph g;
  g.n = 2;
  g.edges.push_back({0, 1, 1.0});
  MaxCutProblem mc = build_problem(g);
  Matrix expected(2, 2);  // C = -L/4 with L = [[1,-1],[-1,1]]
  expected << -0.25, 0.25, 0.25, -0.25;
  EXPECT_EQ((mc.sdp.c().to_dense() - expected).norm(), 0.0);
  EXPECT_EQ(mc.sdp.kind(), ConstraintKind::FixedDiagonal);
}

TEST(BuildProblem, TriangleDegreesAndOffsetIdentity) {
  MaxCutProblem mc = build_problem(complete_graph(3));
  Vector diag = mc.sdp.c().diagonal();
  EXPECT_EQ(diag[0], -0.5);  // deg 2 -> -2/4, exactly representable
  // 1/4 <L, YY^T> + <C, YY^T> = 0: the two bookkeeping routes agree;
  // rebuild <L,X>/4 straight from the edge list: sum w (x_ii + x_jj - 2 x_ij)/4
  FactorPoint y = random_point(mc.sdp.manifold(2), 3);
  Matrix x = y.y * y.y.transpose();
  double quarter_l = 0.0;
  for (const auto& e : mc.graph.edges)
    quarter_l += e.w * (x(e.i, e.i) + x(e.j, e.j) - 2.0 * x(e.i, e.j)) / 4.0;
  EXPECT_NEAR(quarter_l + cost(mc.sdp, y), 0.0, 1e-13);
  EXPECT_NEAR(mc.relaxation_value(y.y), quarter_l, 1e-13);
}

TEST(BruteForce, SmallOracles) {
  Graph single;
  single.n = 2;
  single.edges.push_back({0, 1, 1.0});
  EXPECT_DOUBLE_EQ(brute_force_maxcut(single).first, 1.0);
  EXPECT_DOUBLE_EQ(brute_force_maxcut(complete_graph(3)).first, 2.0);
  EXPECT_DOUBLE_EQ(brute_force_maxcut(cycle_graph(5)).first, 4.0);
  Graph big;
  big.n = 25;
  EXPECT_THROW(brute_force_maxcut(big), std::invalid_argument);
}

TEST(CutBound, TriangleBoundsTheTrueOptimum) {
  MaxCutProblem mc = build_problem(complete_graph(3));
  StaircaseResult r = staircase_run(mc.sdp);
  ASSERT_EQ(r.report.status, StaircaseStatus::Certified);
  double bound = cut_bound(mc, r.y.y, r.certificate);
  EXPECT_GE(bound, 2.0);                 // brute-force optimum
  EXPECT_NEAR(bound, 2.25, 1e-6);        // triangle relaxation value 9/4
}

TEST(CutBound, EvenCycleIsTight) {
  MaxCutProblem mc = build_problem(cycle_graph(4));
  StaircaseResult r = staircase_run(mc.sdp);
  ASSERT_EQ(r.report.status, StaircaseStatus::Certified);
  EXPECT_NEAR(cut_bound(mc, r.y.y, r.certificate), 4.0, 1e-6);
}

TEST(CutBound, PsdCaseEqualsRelaxationValue) {
  MaxCutProblem mc = build_problem(complete_graph(3));
  StaircaseResult r = staircase_run(mc.sdp);
  ASSERT_GE(r.certificate.lambda_min_s.lo, -1e-9);
  double bound = cut_bound(mc, r.y.y, r.certificate);
  if (r.certificate.lambda_min_s.lo >= 0)
    EXPECT_EQ(bound, mc.relaxation_value(r.y.y));
}

TEST(GwRound, RankOneSignVectorRoundsToItself) {
  MaxCutProblem mc = build_problem(cycle_graph(6));
  Matrix y(6, 1);
  y << 1, -1, 1, -1, 1, -1;
  CutResult res = gw_round(mc, y, 32, 5);
  EXPECT_DOUBLE_EQ(res.cut_value, 6.0);  // every sample reproduces +-Y's cut
  std::vector<int> expected = {1, -1, 1, -1, 1, -1};
  EXPECT_EQ(res.assignment, expected);
}

TEST(GwRound, RecoversOptimaOnSmallGraphs) {
  {
    MaxCutProblem mc = build_problem(complete_graph(3));
    StaircaseResult r = staircase_run(mc.sdp);
    CutResult res = gw_round(mc, r.y.y, 1000, 0);
    EXPECT_DOUBLE_EQ(res.cut_value, 2.0);
  }
  {
    MaxCutProblem mc = build_problem(cycle_graph(6));
    StaircaseResult r = staircase_run(mc.sdp);
    CutResult res = gw_round(mc, r.y.y, 1000, 0);
    EXPECT_DOUBLE_EQ(res.cut_value, 6.0);
  }
}

TEST(GwRound, DeterministicPerSeedAndBoundedByCertificate) {
  MaxCutProblem mc = build_problem(random_graph(10, 0.4, 99));
  StaircaseResult r = staircase_run(mc.sdp);
  double bound = cut_bound(mc, r.y.y, r.certificate);
  CutResult a = gw_round(mc, r.y.y, 200, 7, bound);
  CutResult b = gw_round(mc, r.y.y, 200, 7, bound);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.cut_value, b.cut_value);
  EXPECT_LE(a.cut_value, a.certified_upper_bound + 1e-9 * mc.graph.n);
  EXPECT_EQ(a.assignment[0], 1);
}

TEST(Soundness, BruteForceNeverExceedsCutBound) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    int n = 6 + static_cast<int>(seed);  // 6..13
    MaxCutProblem mc = build_problem(random_graph(n, 0.45, 500 + seed));
    StaircaseConfig cfg;
    cfg.seed = seed;
    StaircaseResult r = staircase_run(mc.sdp, cfg);
    double opt = brute_force_maxcut(mc.graph).first;
    double bound = cut_bound(mc, r.y.y, r.certificate);
    EXPECT_LE(opt, bound + 1e-9 * n) << "seed " << seed;
  }
}

TEST(Rounding, MeetsGwRatioOnUnitGraphs) {
  std::vector<Graph> graphs = {complete_graph(3), cycle_graph(5), cycle_graph(6),
                               random_graph(9, 0.4, 31), random_graph(12, 0.3, 32)};
  for (const Graph& g : graphs) {
    MaxCutProblem mc = build_problem(g);
    StaircaseResult r = staircase_run(mc.sdp);
    double opt = brute_force_maxcut(mc.graph).first;
    CutResult res = gw_round(mc, r.y.y, 1000, 0);
    EXPECT_GE(res.cut_value, 0.878 * opt) << "n=" << g.n;
  }
}
