#include <gtest/gtest.h>

#include "smoothsdp/maxcut.hpp"
#include "smoothsdp/staircase.hpp"
#include "test_helpers.hpp"

using namespace smoothsdp;
using namespace testing_oracles;

TEST(Lift, PreservesGramCostGradientAndMultipliers) {
  SmoothSDP p = SmoothSDP::fixed_diagonal(random_dense_sym(7, 11));
  FactorPoint y = random_point(p.manifold(3), 1);
  FactorPoint lifted = lift(y);
  EXPECT_EQ(lifted.manifold.p, 4);
  EXPECT_EQ((lifted.y * lifted.y.transpose() - y.y * y.y.transpose()).norm(), 0.0);
  EXPECT_LE(feasibility_residual(lifted), 1e-12);
  double f = cost(p, y), f_lifted = cost(p, lifted);
  EXPECT_NEAR(f, f_lifted, 1e-14 * std::max(1.0, std::abs(f)));
  double g = riemannian_gradient(p, y).norm();
  double g_lifted = riemannian_gradient(p, lifted).norm();
  EXPECT_NEAR(g, g_lifted, 1e-14 * std::max(1.0, g));
  Vector mu = multipliers(p, y.y).as_vector();
  Vector mu_lifted = multipliers(p, lifted.y).as_vector();
  EXPECT_EQ((mu - mu_lifted).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EscapeDirection, NoEscapeWhenSIsPsd) {
  SmoothSDP p = SmoothSDP::fixed_diagonal(SparseSymMatrix::identity(5));
  FactorPoint lifted = lift(random_point(p.manifold(2), 2));
  EXPECT_THROW(escape_direction(p, lifted), std::runtime_error);
}

TEST(EscapeDirection, RequiresZeroLastColumn) {
  SmoothSDP p = SmoothSDP::fixed_diagonal(random_dense_sym(5, 21));
  FactorPoint y = random_point(p.manifold(2), 3);
  EXPECT_THROW(escape_direction(p, y), std::invalid_argument);
}

TEST(EscapeDirection, DiagonalSCase) {
  // fixed trace, C = diag(1, 2), Y = e_2: S = diag(-1, 0), u = e_1,
  // quadratic form <Ydot, Hess[Ydot]> = 2 u^T S u = -2
  SparseSymMatrix c(2);
  c.add(0, 0, 1.0);
  c.add(1, 1, 2.0);
  c.freeze();
  SmoothSDP p = SmoothSDP::fixed_trace(std::move(c));
  Matrix y(2, 1);
  y << 0.0, 1.0;
  FactorPoint lifted = lift(FactorPoint{p.manifold(1), y});
  TangentVector dir = escape_direction(p, lifted);
  EXPECT_EQ(dir.z.rows(), 2);
  EXPECT_EQ(dir.z.cols(), 2);
  EXPECT_LE(dir.z.col(0).norm(), 1e-12);           // only the new column is used
  EXPECT_NEAR(std::abs(dir.z(0, 1)), 1.0, 1e-9);   // u = +-e_1
  EXPECT_NEAR(std::abs(dir.z(1, 1)), 0.0, 1e-9);
  DualMatrix s = dual_matrix(p, lifted.y);
  double qform = (dir.z.array() * riemannian_hessian_apply(s, lifted, dir).z.array()).sum();
  EXPECT_NEAR(qform, -2.0, 1e-8);
}

TEST(EscapeDirection, EvenCycleSaddleSatisfiesLemmaIdentity) {
  // find a p=2 suboptimal second-order point of the C_8 relaxation, then the
  // escape direction's curvature matches 2 lambda_min(S)
  MaxCutProblem mc = build_problem(cycle_graph(8));
  bool found = false;
  for (std::uint64_t seed = 0; seed < 20 && !found; ++seed) {
    StaircaseConfig cfg;
    cfg.p_start = 2;
    cfg.p_max = 2;
    cfg.seed = seed;
    StaircaseResult r = staircase_run(mc.sdp, cfg);
    if (r.report.status != StaircaseStatus::Uncertified) continue;
    found = true;
    FactorPoint lifted = lift(r.y);
    TangentVector dir = escape_direction(mc.sdp, lifted);
    DualMatrix s = dual_matrix(mc.sdp, lifted.y);
    double qform = (dir.z.array() * riemannian_hessian_apply(s, lifted, dir).z.array()).sum();
    double scale = mc.sdp.c().gershgorin_spectral_bound();
    EXPECT_LE(qform, 2.0 * r.certificate.lambda_min_s.hi + 1e-8 * scale);
    EXPECT_LT(qform, 0.0);
  }
  EXPECT_TRUE(found) << "no p=2 run stalled; spurious optima expected on C_8";
}

TEST(StaircaseRun, IdentityCostCertifiesAtFirstRank) {
  const int n = 9;
  SmoothSDP p = SmoothSDP::fixed_diagonal(SparseSymMatrix::identity(n));
  StaircaseResult r = staircase_run(p);
  EXPECT_EQ(r.report.status, StaircaseStatus::Certified);
  EXPECT_EQ(r.report.levels.size(), 1u);
  EXPECT_EQ(r.report.levels[0].p, 2);
  EXPECT_EQ(r.report.levels[0].iterations, 0);
  EXPECT_LE(r.certificate.gap_bound, 1e-10 * n);
}

TEST(StaircaseRun, EvenCycleCertifiesByRankThree) {
  MaxCutProblem mc = build_problem(cycle_graph(8));
  int stalled_at_two = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    StaircaseConfig only2;
    only2.p_start = 2;
    only2.p_max = 2;
    only2.seed = seed;
    if (staircase_run(mc.sdp, only2).report.status == StaircaseStatus::Uncertified)
      ++stalled_at_two;

    StaircaseConfig upto3;
    upto3.p_start = 2;
    upto3.p_max = 3;
    upto3.seed = seed;
    StaircaseResult r = staircase_run(mc.sdp, upto3);
    EXPECT_EQ(r.report.status, StaircaseStatus::Certified) << "seed " << seed;
    EXPECT_NEAR(cut_bound(mc, r.y.y, r.certificate), 8.0, 1e-6 * 8) << "seed " << seed;
  }
  EXPECT_GE(stalled_at_two, 1);  // spurious rank-2 optima exist on C_8
}

TEST(StaircaseRun, RandomCostCertifiesWithinTheoreticalRank) {
  const int n = 30;
  const int p_bound = static_cast<int>(std::ceil(std::sqrt(2.0 * n)));  // 8
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SmoothSDP p = SmoothSDP::fixed_diagonal(random_dense_sym(n, 5000 + seed));
    StaircaseConfig cfg;
    cfg.seed = seed;
    StaircaseResult r = staircase_run(p, cfg);
    EXPECT_EQ(r.report.status, StaircaseStatus::Certified) << "seed " << seed;
    EXPECT_LE(r.report.levels.back().p, p_bound) << "seed " << seed;
  }
}

TEST(StaircaseRun, CostMonotoneAcrossLevelsUpToPerturbation) {
  MaxCutProblem mc = build_problem(cycle_graph(12));
  StaircaseConfig cfg;
  cfg.p_start = 2;
  cfg.p_max = 4;
  cfg.p_schedule = {2, 3, 4};
  cfg.cert_tol = -1e-300;  // force all levels to run
  cfg.seed = 7;
  StaircaseResult r = staircase_run(mc.sdp, cfg);
  double slack =
      10.0 * cfg.perturb_sigma * mc.sdp.c().frobenius_norm() * std::sqrt(mc.sdp.max_trace());
  for (std::size_t k = 1; k < r.report.levels.size(); ++k)
    EXPECT_LE(r.report.levels[k].f, r.report.levels[k - 1].f + slack);
}

TEST(StaircaseRun, CertifiedBoundCoversFullRankReference) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    int n = 8 + 2 * static_cast<int>(seed % 2);  // 8 or 10
    SmoothSDP p = SmoothSDP::fixed_diagonal(random_sparse_sym(n, 0.5, 6000 + seed));
    StaircaseConfig cfg;
    cfg.seed = seed;
    StaircaseResult r = staircase_run(p, cfg);
    ASSERT_EQ(r.report.status, StaircaseStatus::Certified);

    RtrResult ref = rtr_solve(p, random_point(p.manifold(n + 1), 999 + seed));
    ASSERT_EQ(ref.status, RtrStatus::Converged);
    double f_star_proxy = ref.f;
    double scale = p.c().frobenius_norm() + 1.0;
    EXPECT_LE(2.0 * (r.certificate.f - f_star_proxy),
              r.certificate.gap_bound + 1e-8 * scale)
        << "seed " << seed;
    EXPECT_GE(r.certificate.f, f_star_proxy - 1e-8 * scale) << "seed " << seed;
  }
}

TEST(StaircaseRun, FullRankLevelReturnsUnconditionally) {
  // schedule ending at p = n+1 returns corollary3 when the threshold is
  // unreachable, with the bound still computed
  SmoothSDP p = SmoothSDP::fixed_diagonal(random_dense_sym(6, 7000));
  StaircaseConfig cfg;
  cfg.p_start = 7;  // = n+1 directly
  cfg.p_max = 7;
  cfg.cert_tol = 0.5;  // impossible: lambda_min(S) <= 0 at critical points
  StaircaseResult r = staircase_run(p, cfg);
  EXPECT_EQ(r.report.status, StaircaseStatus::Corollary3);
  EXPECT_TRUE(std::isfinite(r.certificate.gap_bound));
  EXPECT_LE(r.certificate.gap_bound, 1e-6 * 6);

  // same impossible threshold exhausting below n+1: uncertified
  StaircaseConfig low = cfg;
  low.p_start = 2;
  low.p_max = 3;
  StaircaseResult ru = staircase_run(p, low);
  EXPECT_EQ(ru.report.status, StaircaseStatus::Uncertified);
  EXPECT_TRUE(std::isfinite(ru.certificate.gap_bound));
}

TEST(StaircaseRun, ScheduleValidation) {
  SmoothSDP p = SmoothSDP::fixed_diagonal(SparseSymMatrix::identity(5));
  StaircaseConfig cfg;
  cfg.p_schedule = {3, 2};
  EXPECT_THROW(staircase_run(p, cfg), std::invalid_argument);
  cfg.p_schedule = {2, 99};
  EXPECT_THROW(staircase_run(p, cfg), std::invalid_argument);
}

TEST(StaircaseRun, StiefelBlocksRespectRankFloor) {
  // p must never drop below d for the product of Stiefel manifolds
  SmoothSDP p = SmoothSDP::fixed_diagonal_blocks(random_dense_sym(6, 8000), 2, 3);
  StaircaseConfig cfg;
  cfg.p_start = 1;  // below d; must be clamped up
  StaircaseResult r = staircase_run(p, cfg);
  EXPECT_GE(r.report.levels.front().p, 2);
  EXPECT_EQ(r.report.status, StaircaseStatus::Certified);
}
