#include <polyreg/field.hpp>
#include <polyreg/random.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace polyreg;

namespace {

GridField affine(const GridDomain& dom, const Eigen::MatrixXd& B, const Eigen::VectorXd& c)
{
  return GridField::sample(dom, static_cast<int>(B.rows()), [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return B * x + c;
  });
}

} // namespace

TEST(GridDomain, Invariants)
{
  EXPECT_THROW(GridDomain({0.0}, {1.0}, {1}), Error);
  EXPECT_THROW(GridDomain({0.0}, {0.0}, {4}), Error);
  EXPECT_THROW(GridDomain({0.0, 0.0}, {1.0}, {4, 4}), Error);
  const GridDomain dom({0.0, -1.0}, {2.0, 1.0}, {4, 8});
  EXPECT_DOUBLE_EQ(dom.cell_volume(), 0.5 * 0.25);
  EXPECT_EQ(dom.node_count(), 5u * 9u);
  EXPECT_EQ(dom.cell_count(), 32u);
  EXPECT_NEAR(dom.node_weights().sum(), 4.0, 1e-14);
  EXPECT_DOUBLE_EQ(dom.volume(), 4.0);
}

TEST(GridDomain, NodeOrderingHasFirstAxisFastest)
{
  const GridDomain dom = GridDomain::unit(2, 3);
  EXPECT_EQ(dom.node_stride(0), 1u);
  EXPECT_EQ(dom.node_stride(1), 4u);
  const Eigen::VectorXd x = dom.node_position(5);
  EXPECT_DOUBLE_EQ(x(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(x(1), 1.0 / 3.0);
  EXPECT_EQ(dom.corner_node(4), 5u);
}

TEST(FunctionSpaceConfig, ExponentRules)
{
  EXPECT_THROW(FunctionSpaceConfig(2, 1.5, 2), Error);
  EXPECT_NO_THROW(FunctionSpaceConfig(2, 2.0, 2));
  EXPECT_NO_THROW(FunctionSpaceConfig(1, 1.0, 3));
  const FunctionSpaceConfig s(2, 4.0, 2);
  EXPECT_DOUBLE_EQ(1.0 / s.p + 1.0 / s.p_star(), 1.0);
  EXPECT_TRUE(std::isinf(FunctionSpaceConfig(1, 1.0, 2).p_star()));
}

TEST(GridField, RejectsNonFiniteValues)
{
  const GridDomain dom = GridDomain::unit(2, 2);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(9);
  v(3) = std::nan("");
  EXPECT_THROW(GridField(dom, 1, v), Error);
  EXPECT_THROW(GridField(dom, 1, Eigen::VectorXd::Zero(8)), Error);
}

TEST(Gradient, ConstantGivesZero)
{
  const GridDomain dom = GridDomain::unit(2, 5);
  const GridField u = GridField::sample(dom, 2, [](const Eigen::VectorXd&) { return Eigen::Vector2d(3.0, -1.0); });
  EXPECT_TRUE(gradient(u).values().isZero(0.0));
}

TEST(Gradient, ExactForAffineFields)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int n = 1; n <= 3; ++n)
    for (int N = 1; N <= 3; ++N) {
      const GridDomain dom = GridDomain::unit(n, 4);
      Eigen::MatrixXd B(N, n);
      for (auto& x : B.reshaped()) x = normal(rng);
      Eigen::VectorXd c(N);
      for (auto& x : c) x = normal(rng);
      const MatrixField g = gradient(affine(dom, B, c));
      for (std::size_t k = 0; k < dom.cell_count(); ++k) EXPECT_LE((g.cell(k) - B).norm(), 1e-12);
    }
}

TEST(Gradient, FirstOrderAccurateForSmoothFields)
{
  const GridDomain dom = GridDomain::unit(2, 64);
  const GridField u = GridField::sample(dom, 2, [](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(std::sin(x(0)), std::cos(x(1)));
  });
  const MatrixField g = gradient(u);
  double worst = 0.0;
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const Eigen::VectorXd x = dom.cell_corner(c);
    Eigen::Matrix2d J;
    J << std::cos(x(0)), 0.0, 0.0, -std::sin(x(1));
    worst = std::max(worst, (g.cell(c) - J).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Gradient, IsLinear)
{
  std::mt19937_64 rng(2);
  const GridDomain dom = GridDomain::unit(2, 6);
  const GridField u = random_smooth_field(dom, 2, rng);
  const GridField v = random_smooth_field(dom, 2, rng);
  const double a = 0.75;
  const Eigen::VectorXd lhs = gradient(u + a * v).values();
  const Eigen::VectorXd rhs = gradient(u).values() + a * gradient(v).values();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradientTranspose, IsAdjointOfGradient)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const GridDomain dom({0.0, 0.0}, {2.0, 1.0}, {3, 5});
  for (int N = 1; N <= 2; ++N) {
    Eigen::VectorXd uv(static_cast<Eigen::Index>(dom.node_count()) * N);
    for (auto& x : uv) x = normal(rng);
    Eigen::VectorXd m(static_cast<Eigen::Index>(dom.cell_count()) * N * 2);
    for (auto& x : m) x = normal(rng);
    const GridField u(dom, N, uv);
    const double lhs = gradient(u).values().dot(m);
    const double rhs = uv.dot(gradient_transpose(dom, N, m));
    EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1));
  }
}

TEST(Integrate, Examples)
{
  const GridDomain dom = GridDomain::unit(2, 8);
  EXPECT_DOUBLE_EQ(integrate(CellField::constant(dom, 1.0)), 1.0);
  EXPECT_EQ(integrate(CellField::constant(dom, 0.0)), 0.0);
  const GridDomain fine = GridDomain::unit(2, 32);
  const double I = integrate(CellField::sample(fine, [](const Eigen::VectorXd& x) { return x(0); }));
  EXPECT_NEAR(I, 0.5, 1.0 / 64.0);
}

TEST(Integrate, RejectsNonFiniteCells)
{
  const GridDomain dom = GridDomain::unit(1, 4);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  v(2) = std::numeric_limits<double>::infinity();
  try {
    integrate(CellField(dom, v));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(Integrate, NonnegativeFieldGivesNonnegativeIntegral)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const GridDomain dom = GridDomain::unit(3, 3);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dom.cell_count()));
  for (auto& x : v) x = uni(rng);
  EXPECT_GE(integrate(CellField(dom, v)), 0.0);
}

TEST(Norms, Examples)
{
  const GridDomain dom = GridDomain::unit(2, 5);
  EXPECT_EQ(lp_norm(GridField(dom, 2), 3.0), 0.0);
  EXPECT_EQ(sobolev_norm(GridField(dom, 2), 2.0), 0.0);
  const GridField c = GridField::sample(dom, 1, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, -2.5); });
  for (double p : {1.0, 2.0, 3.5, 7.0}) {
    EXPECT_NEAR(lp_norm(c, p), 2.5, 1e-13);
    EXPECT_NEAR(sobolev_norm(c, p), 2.5, 1e-13);
  }
  Eigen::MatrixXd B(2, 2);
  B << 1.0, 2.0, -0.5, 3.0;
  const MatrixField g = gradient(affine(dom, B, Eigen::Vector2d::Zero()));
  for (double p : {1.0, 2.0, 4.0}) EXPECT_NEAR(lp_norm(g, p), B.norm(), 1e-12);
  EXPECT_NEAR(lp_norm(g, std::numeric_limits<double>::infinity()), B.norm(), 1e-12);
}

TEST(Norms, HolderForMinorsPairing)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const GridDomain dom = GridDomain::unit(3, 3);
  const MinorsShape shape(3, 3);
  const double p = 4.0;
  for (int rep = 0; rep < 20; ++rep) {
    const GridField u = random_smooth_field(dom, 3, rng);
    const MinorsField xi = minors_of(gradient(u), shape, 2);
    Eigen::VectorXd vs(xi.values().size());
    for (auto& x : vs) x = normal(rng);
    const MinorsField dual(dom, shape, 2, 3, vs);
    double bound = 0.0;
    for (int s = 2; s <= 3; ++s)
      bound += lp_norm(dual, s, FunctionSpaceConfig::conjugate_exponent(p / s)) * lp_norm(xi, s, p / s);
    EXPECT_LE(std::abs(pairing(dual, xi)), bound * (1 + 1e-12));
  }
}

TEST(Pairing, Examples)
{
  const GridDomain dom = GridDomain::unit(2, 4);
  std::mt19937_64 rng(6);
  const GridField u = random_smooth_field(dom, 1, rng);
  EXPECT_EQ(pairing(DualElement(dom, 1), u), 0.0);

  DualElement one(dom, 1);
  one.node_part().setOnes();
  const GridField ones = GridField::sample(dom, 1, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); });
  EXPECT_NEAR(pairing(one, ones), 1.0, 1e-14);
}

TEST(Pairing, Bilinear)
{
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  const GridDomain dom = GridDomain::unit(2, 5);
  DualElement d(dom, 2);
  for (auto& x : d.node_part()) x = normal(rng);
  for (auto& x : d.grad_part()) x = normal(rng);
  const GridField u = random_smooth_field(dom, 2, rng);
  const GridField v = random_smooth_field(dom, 2, rng);
  const double a = -1.7;
  EXPECT_NEAR(pairing(a * d, u), a * pairing(d, u), 1e-12 * (1 + std::abs(pairing(d, u))));
  EXPECT_NEAR(pairing(d, u + a * v), pairing(d, u) + a * pairing(d, v), 1e-12 * (1 + std::abs(pairing(d, u))));
}

TEST(Collapse, ReproducesPairingAndNorm)
{
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  const GridDomain dom({0.0, 0.0}, {1.0, 2.0}, {3, 4});
  DualElement d(dom, 2);
  for (auto& x : d.node_part()) x = normal(rng);
  for (auto& x : d.grad_part()) x = normal(rng);
  const Eigen::VectorXd g = collapse(d);
  const DualElement node_only(dom, 2, g, Eigen::VectorXd::Zero(d.grad_part().size()));
  for (int rep = 0; rep < 5; ++rep) {
    const GridField u = random_smooth_field(dom, 2, rng);
    EXPECT_NEAR(pairing(d, u), pairing(node_only, u), 1e-12 * (1 + std::abs(pairing(d, u))));
  }
  // The dual norm is the operator norm against the weighted node L² norm.
  const auto& w = dom.node_weights();
  Eigen::VectorXd best(g.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) best.segment(2 * i, 2) = g.segment(2 * i, 2);
  const GridField u(dom, 2, best);
  EXPECT_NEAR(pairing(d, u) / lp_norm(u, 2.0), dual_norm(d), 1e-12 * dual_norm(d));
}
