#include <polyreg/conditions.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace polyreg;

namespace {

const GridDomain dom = GridDomain::unit(2, 4);

std::shared_ptr<const Regularizer> dirichlet(int N, double mass)
{
  return std::make_shared<Regularizer>(std::make_shared<DirichletIntegrand>(MinorsShape(N, 2), 2.0, mass),
                                       FunctionSpaceConfig(N, 2.0, 2), dom);
}

std::shared_ptr<const Regularizer> elastic(double p = 4.0)
{
  return std::make_shared<Regularizer>(std::make_shared<ElasticIntegrand>(MinorsShape(2, 2), ElasticIntegrand::Params{}),
                                       FunctionSpaceConfig(2, p, 2), dom);
}

GridField smooth_scalar(double amplitude)
{
  return GridField::sample(dom, 1, [amplitude](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd v(1);
    v << amplitude * (0.5 + x(0) * x(0) - 0.5 * x(1));
    return v;
  });
}

GridField stretched_map(double s)
{
  return GridField::sample(dom, 2, [s](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::Vector2d v;
    v << s * x(0) + 0.05 * std::sin(M_PI * x(1)), s * x(1) + 0.05 * std::sin(M_PI * x(0));
    return v;
  });
}

SourceConditionParams params_for(const Scenario& scn, double beta1, double beta2, double rho_margin = 100.0)
{
  const double R = eval_R(*scn.reg, scn.udag);
  return SourceConditionParams::make(beta1, beta2, 1.0, R + rho_margin, R);
}

NeighbourhoodSampling sampling(std::size_t count, double t_min, double t_max, std::uint64_t seed = 1)
{
  NeighbourhoodSampling s;
  s.count = count;
  s.t_min = t_min;
  s.t_max = t_max;
  s.seed = seed;
  return s;
}

GrowthReport passing_growth()
{
  GrowthReport g;
  g.passed = true;
  return g;
}

} // namespace

TEST(SourceConditionParams, ConstraintsAreChecked)
{
  EXPECT_NO_THROW(SourceConditionParams::make(0.0, 1.0, 1.0, 2.0, 1.0));
  EXPECT_THROW(SourceConditionParams::make(1.0, 1.0, 1.0, 2.0, 1.0), Error);
  EXPECT_THROW(SourceConditionParams::make(-0.1, 1.0, 1.0, 2.0, 1.0), Error);
  EXPECT_THROW(SourceConditionParams::make(0.5, 0.0, 1.0, 2.0, 1.0), Error);
  EXPECT_THROW(SourceConditionParams::make(0.5, 1.0, 0.0, 2.0, 1.0), Error);
  EXPECT_THROW(SourceConditionParams::make(0.5, 1.0, 2.0, 2.0, 1.0), Error);
  EXPECT_THROW(SourceConditionParams::make(0.5, 1.0, 1.0, 1.0, 1.0), Error);
}

TEST(Scenario, ExactSolutionAndSubgradient)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  EXPECT_TRUE(scn.has_subgradient());
  EXPECT_LE(data_norm(scn.op->apply(scn.udag) - scn.vdag), 1e-12);
}

TEST(Scenario, BarrierOutsideDomainRecordsSubgradientError)
{
  const auto bar = std::make_shared<Regularizer>(
    std::make_shared<BarrierIntegrand>(MinorsShape(2, 2), ElasticIntegrand::Params{}, 1.0), FunctionSpaceConfig(2, 4.0, 2),
    dom);
  const auto scn = make_scenario(std::make_shared<IdentitySampling>(dom, 2), bar, GridField(dom, 2));
  EXPECT_FALSE(scn.has_subgradient());
  EXPECT_FALSE(scn.subgradient_error.empty());
}

TEST(Minimality, InjectiveOperatorPassesTrivially)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto rep = check_minimality(scn);
  EXPECT_EQ(rep.null_dim, 0);
  EXPECT_TRUE(rep.passed);
}

TEST(Minimality, ZeroOperatorWithNonMinimalSolutionFails)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto rep = check_minimality(scn);
  EXPECT_EQ(rep.null_dim, static_cast<Eigen::Index>(dom.node_count()));
  EXPECT_GT(rep.feasible, 0u);
  EXPECT_FALSE(rep.passed);
}

TEST(Minimality, ZeroOperatorAtGlobalMinimizerPasses)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), GridField(dom, 1));
  EXPECT_TRUE(check_minimality(scn).passed);
}

TEST(Neighbourhood, ZeroRadiusGivesCopies)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto nb = sample_neighbourhood(scn, params_for(scn, 0.0, 1.0), sampling(10, 0.0, 0.0));
  ASSERT_EQ(nb.fields.size(), 10u);
  EXPECT_EQ(nb.acceptance_rate(), 1.0);
  for (const auto& u : nb.fields) EXPECT_EQ(u.values(), scn.udag.values());
}

TEST(Neighbourhood, FixedSeedIsReproducible)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1.0);
  const auto a = sample_neighbourhood(scn, p, sampling(50, 1e-3, 1.0, 9));
  const auto b = sample_neighbourhood(scn, p, sampling(50, 1e-3, 1.0, 9));
  ASSERT_EQ(a.fields.size(), b.fields.size());
  for (std::size_t k = 0; k < a.fields.size(); ++k) {
    EXPECT_EQ(std::memcmp(a.fields[k].values().data(), b.fields[k].values().data(),
                          sizeof(double) * static_cast<std::size_t>(a.fields[k].values().size())),
              0);
    EXPECT_EQ(a.radii[k], b.radii[k]);
  }
}

TEST(Neighbourhood, SamplesRespectTheLevelSet)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1.0, 0.5);
  const auto nb = sample_neighbourhood(scn, p, sampling(200, 1e-3, 10.0));
  EXPECT_LT(nb.acceptance_rate(), 1.0);
  for (const auto& u : nb.fields) EXPECT_LE(tikhonov_value(*scn.op, *scn.reg, p.tikhonov(), u, scn.vdag), p.rho);
}

TEST(Neighbourhood, ImpossibleLevelSetIsReported)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1.0, 1e-9);
  auto cfg = sampling(5, 100.0, 1000.0);
  cfg.max_attempts_per_sample = 4;
  try {
    sample_neighbourhood(scn, p, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::neighbourhood_empty);
  }
}

TEST(VariationalInequality, MarginVanishesAtExactSolution)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 2, 0.2), elastic(), stretched_map(1.2));
  const auto rep = check_variational_inequality(scn, params_for(scn, 0.5, 1.0), {scn.udag});
  ASSERT_EQ(rep.evaluated, 1u);
  EXPECT_EQ(rep.margins[0], 0.0);
}

TEST(VariationalInequality, IdentityConvexPassesWithComputedBeta2)
{
  const auto scn = make_scenario(std::make_shared<IdentitySampling>(dom, 1), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto range = range_condition_solve(scn);
  ASSERT_TRUE(range.in_range);
  const auto p = params_for(scn, 0.0, range.bound_constant);
  const auto nb = sample_neighbourhood(scn, p, sampling(500, 1e-3, 1.0));
  const auto rep = check_variational_inequality(scn, p, nb.fields);
  EXPECT_EQ(rep.evaluated, 500u);
  EXPECT_TRUE(rep.passed) << rep.worst_margin;
}

TEST(VariationalInequality, ConstantOperatorFailsWithWitness)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1e-6);
  const auto nb = sample_neighbourhood(scn, p, sampling(200, 1e-3, 1.0));
  const auto rep = check_variational_inequality(scn, p, nb.fields);
  EXPECT_FALSE(rep.passed);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_EQ(rep.margins[*rep.witness], rep.worst_margin);
  EXPECT_LT(rep.worst_margin, -margin_tolerance);
}

TEST(VariationalInequality, InfiniteRegularizerSamplesAreSkipped)
{
  const auto bar = std::make_shared<Regularizer>(
    std::make_shared<BarrierIntegrand>(MinorsShape(2, 2), ElasticIntegrand::Params{}, 1.0), FunctionSpaceConfig(2, 4.0, 2),
    dom);
  const auto scn = make_scenario(std::make_shared<IdentitySampling>(dom, 2), bar, stretched_map(1.0));
  const auto p = params_for(scn, 0.0, 1.0);
  const GridField collapsed(dom, 2);
  const auto rep = check_variational_inequality(scn, p, {scn.udag, collapsed});
  EXPECT_EQ(rep.evaluated, 1u);
  EXPECT_EQ(rep.skipped, 1u);
  EXPECT_TRUE(std::isnan(rep.margins[1]));
}

TEST(Differentiated, ZeroDirectionGivesZero)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 2, 0.2), elastic(), stretched_map(1.2));
  const auto rep = differentiate_inequality(scn, params_for(scn, 0.5, 1.0), {GridField(dom, 2)});
  EXPECT_EQ(rep.worst_value, 0.0);
  EXPECT_TRUE(rep.passed);
}

TEST(Differentiated, FollowsFromPassingInequality)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 2, 0.2), elastic(), stretched_map(1.2));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.5, range.bound_constant);
  const auto nb = sample_neighbourhood(scn, p, sampling(300, 1e-3, 1.0));
  ASSERT_TRUE(check_variational_inequality(scn, p, nb.fields).passed);
  const auto rep = differentiate_inequality(scn, p, random_directions(scn, 200, 3));
  EXPECT_TRUE(rep.passed) << rep.worst_value;
  EXPECT_TRUE(rep.corollary_passed) << rep.worst_corollary_slack;
}

TEST(Differentiated, TooSmallBeta2IsCaught)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto rep = differentiate_inequality(scn, params_for(scn, 0.0, 1e-6), random_directions(scn, 50, 4));
  EXPECT_FALSE(rep.passed);
  EXPECT_FALSE(rep.corollary_passed);
}

TEST(RangeCondition, IdentityIsSurjective)
{
  std::mt19937_64 rng(5);
  const auto scn = make_scenario(std::make_shared<IdentitySampling>(dom, 2), elastic(), stretched_map(1.1));
  const auto r = range_condition_solve(scn);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_FALSE(r.ridge_used);
  // Any target, not only w'(u†).
  DualElement t(dom, 2);
  std::normal_distribution<double> normal;
  for (auto& x : t.node_part()) x = normal(rng);
  for (auto& x : t.grad_part()) x = normal(rng);
  EXPECT_LE(range_condition_solve(*scn.op, scn.udag, t).residual, 1e-10);
}

TEST(RangeCondition, ResidualIsTheDualNorm)
{
  // residual = ‖K'^# ω* − target‖ measured by dual_norm.
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.3, 2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto r = range_condition_solve(scn);
  DualElement diff = scn.op->derivative_adjoint_apply(scn.udag, r.omega_star);
  const DualElement target = gateaux_w(scn.w, scn.udag);
  const double direct = std::sqrt([&] {
    const Eigen::VectorXd a = collapse(diff), b = collapse(target);
    const auto& w = dom.node_weights();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += w(i) * (a(i) - b(i)) * (a(i) - b(i));
    return s;
  }());
  EXPECT_NEAR(r.residual, direct, 1e-10 * (1.0 + direct));
  EXPECT_GT(r.residual, 0.0);
  EXPECT_FALSE(r.in_range);
  EXPECT_NEAR(r.target_norm, dual_norm(target), 1e-12 * r.target_norm);
}

TEST(RangeCondition, ZeroOperatorHasEmptyRange)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto r = range_condition_solve(scn);
  EXPECT_TRUE(r.ridge_used);
  EXPECT_FALSE(r.in_range);
  EXPECT_NEAR(r.residual, r.target_norm, 1e-12 * r.target_norm);
  EXPECT_GT(r.target_norm, 0.0);
}

TEST(Nonlinearity, LinearOperatorAndLinearW)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto range = range_condition_solve(scn);
  const auto nb = sample_neighbourhood(scn, params_for(scn, 0.0, 1.0), sampling(200, 1e-3, 1.0));
  for (double beta1 : {0.0, 0.5, 0.99}) {
    const auto rep = check_nonlinearity_condition(scn, range.omega_star, beta1, nb.fields);
    EXPECT_TRUE(rep.passed) << beta1;
    EXPECT_LE(rep.max_operator_term, 1e-12);
    EXPECT_LE(std::abs(rep.max_w_term), 1e-12);
  }
}

TEST(Nonlinearity, LinearOperatorDerivativeIgnoresBasePoint)
{
  std::mt19937_64 rng(6);
  const LinearSmoothing K(dom, 1, 0.2);
  const GridField h = random_smooth_field(dom, 1, rng);
  const DataVector a = K.derivative_apply(random_smooth_field(dom, 1, rng), h);
  const DataVector b = K.derivative_apply(random_smooth_field(dom, 1, rng), h);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
}

TEST(Nonlinearity, ExactSolutionGivesZeroTerms)
{
  const auto scn = make_scenario(std::make_shared<SmoothedCubic>(dom, 1, 0.2), dirichlet(1, 1.0), smooth_scalar(0.5));
  const auto range = range_condition_solve(scn);
  const auto rep = check_nonlinearity_condition(scn, range.omega_star, 0.0, {scn.udag});
  EXPECT_EQ(rep.rows[0].operator_term, 0.0);
  EXPECT_EQ(rep.rows[0].bregman, 0.0);
  EXPECT_TRUE(rep.passed);
}

TEST(Nonlinearity, ThresholdIsStableUnderShrinkingRadius)
{
  // Taylor remainder and Bregman distance both scale like radius², so the
  // β₁ threshold settles to a constant as the radius shrinks.
  const auto scn = make_scenario(std::make_shared<SmoothedCubic>(dom, 1, 0.2), dirichlet(1, 1.0), smooth_scalar(0.5));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.9, range.bound_constant, 1e4);
  const auto sweep = nonlinearity_radius_sweep(scn, p, range.omega_star, 0.9, {0.1, 0.01, 0.001}, sampling(300, 0, 0));
  ASSERT_EQ(sweep.rows.size(), 3u);
  const double t0 = sweep.rows[0].report.beta1_threshold;
  for (const auto& row : sweep.rows) {
    EXPECT_GT(row.report.beta1_threshold, 0.0);
    EXPECT_NEAR(row.report.beta1_threshold, t0, 0.05 * t0);
  }
}

TEST(Nonlinearity, SweepChoosesLargestPassingRadius)
{
  const auto scn = make_scenario(std::make_shared<SmoothedCubic>(dom, 1, 0.2), dirichlet(1, 1.0), smooth_scalar(0.5));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.9, range.bound_constant, 1e4);
  const auto sweep =
    nonlinearity_radius_sweep(scn, p, range.omega_star, 0.9, {30.0, 10.0, 3.0, 1.0, 0.3}, sampling(1000, 0, 0));
  ASSERT_TRUE(sweep.chosen_radius.has_value());
  EXPECT_EQ(*sweep.chosen_radius, 3.0);
  EXPECT_FALSE(sweep.rows[0].report.passed);
  EXPECT_GT(sweep.rows[0].report.beta1_threshold, 0.9);
}

TEST(Rancon, PolyconvexReferenceHolds)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 2, 0.2), elastic(), stretched_map(1.2));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.5, range.bound_constant, 1e4);
  const auto nb = sample_neighbourhood(scn, p, sampling(500, 1e-3, 1.0));
  GrowthSampling gs;
  gs.samples = 20000;
  const auto growth = check_growth(*scn.reg, GrowthCertificate::constant(dom, 2.0, 0.0, 20.0, 4.0), gs);
  const auto rep =
    verify_theorem_rancon(scn, p, growth, check_minimality(scn), nb.fields, random_directions(scn, 200, 2));
  EXPECT_EQ(rep.verdict, Verdict::holds) << rep.stage;
  EXPECT_LE(rep.coincidence, coincidence_tolerance);
  EXPECT_LE(rep.range.residual, range_tolerance * (1.0 + rep.range.target_norm));
}

TEST(Rancon, GrowthFailureGatesTheTheorem)
{
  // The elastic integrand declared on W^{1,2}: the quartic term violates
  // the growth bound with p = 2.
  const auto reg = elastic(2.0);
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 2, 0.2), reg, stretched_map(1.2));
  const auto growth = check_growth(*reg, GrowthCertificate::constant(dom, 2.0, 0.0, 20.0, 2.0));
  EXPECT_FALSE(growth.passed);
  const auto p = params_for(scn, 0.5, 100.0, 1e4);
  const auto rep = verify_theorem_rancon(scn, p, growth, check_minimality(scn), {scn.udag}, {});
  EXPECT_EQ(rep.verdict, Verdict::hypotheses_not_met);
  EXPECT_EQ(rep.stage, "growth condition");
  EXPECT_EQ(rep.vi.evaluated, 0u);
}

TEST(Rancon, ConvexCaseHolds)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.0), smooth_scalar(1.0));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.0, range.bound_constant);
  const auto nb = sample_neighbourhood(scn, p, sampling(500, 1e-3, 1.0));
  const auto growth = check_growth(*scn.reg, GrowthCertificate::constant(dom, 0.0, 0.0, 2.0, 2.0));
  const auto rep =
    verify_theorem_rancon(scn, p, growth, check_minimality(scn), nb.fields, random_directions(scn, 200, 2));
  EXPECT_EQ(rep.verdict, Verdict::holds) << rep.stage;
  EXPECT_TRUE(scn.w.is_linear());
}

TEST(Rancon, ZeroOperatorClaimsNothing)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1.0);
  const auto nb = sample_neighbourhood(scn, p, sampling(300, 1e-3, 1.0));
  const auto rep = verify_theorem_rancon(scn, p, passing_growth(), check_minimality(scn), nb.fields, {});
  EXPECT_EQ(rep.verdict, Verdict::hypotheses_not_met);
  EXPECT_NE(rep.verdict, Verdict::violated);
  // Even with the minimality gate bypassed the inequality fails first.
  MinimalityReport bypass;
  const auto rep2 = verify_theorem_rancon(scn, p, passing_growth(), bypass, nb.fields, {});
  EXPECT_EQ(rep2.verdict, Verdict::hypotheses_not_met);
  EXPECT_EQ(rep2.stage, "variational inequality");
}

TEST(Rancon, WrongSubgradientViolatesCoincidence)
{
  const auto reg = dirichlet(1, 0.5);
  const GridField udag = smooth_scalar(1.0);
  const WPolyFunctional w = 2.0 * subgradient_from_integrand(*reg, udag);
  const auto scn = make_scenario(std::make_shared<IdentitySampling>(dom, 1), reg, udag, w);
  const auto rep = verify_theorem_rancon(scn, params_for(scn, 0.0, 10.0), passing_growth(), check_minimality(scn),
                                         {udag}, {});
  EXPECT_EQ(rep.verdict, Verdict::violated);
  EXPECT_EQ(rep.stage, "derivative coincidence");
}

TEST(Converse, LinearConvexHoldsWithBeta1Zero)
{
  const auto scn = make_scenario(std::make_shared<LinearSmoothing>(dom, 1, 0.2), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto p = params_for(scn, 0.0, 1.0);
  const auto nb = sample_neighbourhood(scn, p, sampling(1000, 1e-3, 1.0));
  const auto rep = verify_theorem_converse(scn, 0.0, p, nb.fields);
  EXPECT_EQ(rep.verdict, Verdict::holds) << rep.stage;
  ASSERT_TRUE(rep.derived.has_value());
  EXPECT_EQ(rep.derived->beta2, rep.range.bound_constant);
  EXPECT_GE(rep.vi.worst_margin, -margin_tolerance);
}

TEST(Converse, ComposedOperatorAtChosenRadius)
{
  const auto scn = make_scenario(std::make_shared<SmoothedCubic>(dom, 1, 0.2), dirichlet(1, 1.0), smooth_scalar(0.5));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.9, range.bound_constant, 1e4);
  const auto nb = sample_neighbourhood(scn, p, sampling(1000, 0.03, 3.0));
  const auto rep = verify_theorem_converse(scn, 0.9, p, nb.fields);
  EXPECT_EQ(rep.verdict, Verdict::holds) << rep.stage;
}

TEST(Converse, LargeRadiusMeansHypothesesNotMet)
{
  const auto scn = make_scenario(std::make_shared<SmoothedCubic>(dom, 1, 0.2), dirichlet(1, 1.0), smooth_scalar(0.5));
  const auto range = range_condition_solve(scn);
  const auto p = params_for(scn, 0.9, range.bound_constant, 1e4);
  const auto nb = sample_neighbourhood(scn, p, sampling(1000, 0.3, 30.0));
  const auto rep = verify_theorem_converse(scn, 0.9, p, nb.fields);
  EXPECT_EQ(rep.verdict, Verdict::hypotheses_not_met);
  EXPECT_EQ(rep.stage, "nonlinearity condition");
  EXPECT_FALSE(rep.derived.has_value());
}

TEST(Converse, ZeroOperatorFailsRangeHypothesis)
{
  const auto scn = make_scenario(std::make_shared<ZeroOperator>(dom, 1, 5), dirichlet(1, 0.5), smooth_scalar(1.0));
  const auto rep = verify_theorem_converse(scn, 0.0, params_for(scn, 0.0, 1.0), {scn.udag});
  EXPECT_EQ(rep.verdict, Verdict::hypotheses_not_met);
  EXPECT_EQ(rep.stage, "range condition");
}

TEST(Verdict, ExitCodes)
{
  EXPECT_EQ(exit_code(Verdict::holds), 0);
  EXPECT_EQ(exit_code(Verdict::violated), 1);
  EXPECT_EQ(exit_code(Verdict::hypotheses_not_met), 2);
}

// Random 6×4 map: in-range functionals have a bounded ratio, functionals
// with a component on the null space of A do not.
TEST(DualAdjointRange, BothDirections)
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd B(6, 3);
  for (auto& x : B.reshaped()) x = normal(rng);
  Eigen::MatrixXd C(3, 4);
  for (auto& x : C.reshaped()) x = normal(rng);
  const Eigen::MatrixXd A = B * C; // rank 3, one-dimensional null space
  Eigen::VectorXd z(6);
  for (auto& x : z) x = normal(rng);
  const Eigen::VectorXd in_range = A.transpose() * z;
  const auto good = dual_adjoint_range_check(A, in_range, 10000, 3);
  EXPECT_LE(good.residual, 1e-10 * (1.0 + in_range.norm()));
  EXPECT_TRUE(std::isfinite(good.bound_constant));
  const auto good_half = dual_adjoint_range_check(A, in_range, 5000, 3);
  EXPECT_LE(good.bound_constant, 1.01 * good_half.bound_constant + 1e-12);
  EXPECT_LE(good.bound_constant, z.norm() * (1.0 + 1e-12));

  const Eigen::VectorXd n = null_direction(A);
  EXPECT_LE((A * n).norm(), 1e-12);
  const Eigen::VectorXd out = in_range + n;
  const auto bad = dual_adjoint_range_check(A, out, 10000, 3);
  EXPECT_GE(bad.residual, 0.1);
  EXPECT_GT(bound_ratio(A, out, n), 1e6);
}
