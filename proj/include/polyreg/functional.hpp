#ifndef POLYREG_FUNCTIONAL_HPP
#define POLYREG_FUNCTIONAL_HPP

#include <polyreg/error.hpp>
#include <polyreg/field.hpp>
#include <polyreg/minors.hpp>
#include <polyreg/summation.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>

namespace polyreg {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Derivative of F(x, u, ξ) split as (F'_u, F'_ξ) with F'_ξ = (F'_ξ₁, F'_ξ₂).
struct IntegrandDerivative
{
  Eigen::VectorXd du;
  Eigen::VectorXd dxi;
};

/**
 * Integrand F(x, u, ξ) of a polyconvex regularizer, with ξ = T(A) ∈ R^τ.
 *
 * Implementations must be convex in (u, ξ), nonnegative, and stateless.
 * value() returns +∞ outside the effective domain; derivative() is only
 * called where value() is finite.
 */
class Integrand
{
public:
  explicit Integrand(MinorsShape shape) : shape_(std::move(shape)) {}
  virtual ~Integrand() = default;

  virtual std::string name() const = 0;
  virtual double value(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) const = 0;
  virtual IntegrandDerivative derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& xi) const = 0;

  const MinorsShape& shape() const { return shape_; }
  int components() const { return shape_.rows(); }
  int spatial_dim() const { return shape_.cols(); }

private:
  MinorsShape shape_;
};

using IntegrandPtr = std::shared_ptr<const Integrand>;

/// F ≡ 0
class ZeroIntegrand final : public Integrand
{
public:
  using Integrand::Integrand;
  std::string name() const override { return "zero"; }
  double value(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) const override { return 0.0; }
  IntegrandDerivative derivative(const Eigen::VectorXd&, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& xi) const override
  {
    return {Eigen::VectorXd::Zero(u.size()), Eigen::VectorXd::Zero(xi.size())};
  }
};

/// F = |ξ₁|^p + μ|u|²; convex, so ℛ is a classical convex regularizer.
class DirichletIntegrand final : public Integrand
{
public:
  DirichletIntegrand(MinorsShape shape, double exponent, double mass = 0.0)
    : Integrand(std::move(shape)), p_(exponent), mass_(mass)
  {
    require(p_ >= 1.0, ErrorKind::invalid_argument, "Dirichlet exponent must be at least 1");
    require(mass_ >= 0.0, ErrorKind::invalid_argument, "mass coefficient must be nonnegative");
  }

  std::string name() const override { return "dirichlet"; }

  double value(const Eigen::VectorXd&, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) const override
  {
    const double g = xi.head(shape().entries()).norm();
    return std::pow(g, p_) + mass_ * u.squaredNorm();
  }

  IntegrandDerivative derivative(const Eigen::VectorXd&, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& xi) const override
  {
    IntegrandDerivative d{2.0 * mass_ * u, Eigen::VectorXd::Zero(xi.size())};
    const auto xi1 = xi.head(shape().entries());
    const double g = xi1.norm();
    if (g > 0.0) d.dxi.head(shape().entries()) = p_ * std::pow(g, p_ - 2.0) * xi1;
    return d;
  }

private:
  double p_;
  double mass_;
};

/**
 * Polyconvex, non-convex "elastic" integrand for square gradients:
 *
 *   F = k|ξ₁|^q + γ(det − t)² + μ|u|²
 *
 * where det is the top-order minor (the last entry of ξ). For N = n = 2
 * this is F = |ξ₁|⁴ + (ξ₂ − 1)² at the default parameters.
 */
class ElasticIntegrand : public Integrand
{
public:
  struct Params
  {
    double stiffness = 1.0;
    double exponent = 4.0;
    double gamma = 1.0;
    double target = 1.0;
    double mass = 0.0;
  };

  ElasticIntegrand(MinorsShape shape, Params params) : Integrand(std::move(shape)), prm_(params)
  {
    require(this->shape().rows() == this->shape().cols() && this->shape().max_order() >= 2,
            ErrorKind::invalid_argument, "elastic integrand needs square gradients with N = n >= 2");
    require(prm_.stiffness >= 0.0 && prm_.gamma >= 0.0 && prm_.mass >= 0.0, ErrorKind::invalid_argument,
            "elastic integrand coefficients must be nonnegative");
    require(prm_.exponent >= 1.0, ErrorKind::invalid_argument, "elastic exponent must be at least 1");
  }

  std::string name() const override { return "elastic"; }
  const Params& params() const { return prm_; }

  double value(const Eigen::VectorXd&, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) const override
  {
    const double g = xi.head(shape().entries()).norm();
    const double det = xi(xi.size() - 1);
    return prm_.stiffness * std::pow(g, prm_.exponent) + prm_.gamma * (det - prm_.target) * (det - prm_.target) +
           prm_.mass * u.squaredNorm();
  }

  IntegrandDerivative derivative(const Eigen::VectorXd&, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& xi) const override
  {
    IntegrandDerivative d{2.0 * prm_.mass * u, Eigen::VectorXd::Zero(xi.size())};
    const auto xi1 = xi.head(shape().entries());
    const double g = xi1.norm();
    if (g > 0.0 && prm_.stiffness != 0.0)
      d.dxi.head(shape().entries()) = prm_.stiffness * prm_.exponent * std::pow(g, prm_.exponent - 2.0) * xi1;
    const double det = xi(xi.size() - 1);
    d.dxi(xi.size() - 1) = 2.0 * prm_.gamma * (det - prm_.target);
    return d;
  }

private:
  Params prm_;
};

/// Elastic integrand plus β(det − 1 − log det), and +∞ where det ≤ 0.
/// The affine part of the barrier keeps F nonnegative without changing
/// its convexity.
class BarrierIntegrand final : public Integrand
{
public:
  BarrierIntegrand(MinorsShape shape, ElasticIntegrand::Params params, double barrier)
    : Integrand(shape), elastic_(shape, params), barrier_(barrier)
  {
    require(barrier_ > 0.0, ErrorKind::invalid_argument, "barrier weight must be positive");
  }

  std::string name() const override { return "barrier"; }

  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) const override
  {
    const double det = xi(xi.size() - 1);
    if (!(det > 0.0)) return infinity;
    return elastic_.value(x, u, xi) + barrier_ * (det - 1.0 - std::log(det));
  }

  IntegrandDerivative derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& xi) const override
  {
    auto d = elastic_.derivative(x, u, xi);
    const double det = xi(xi.size() - 1);
    d.dxi(xi.size() - 1) += barrier_ * (1.0 - 1.0 / det);
    return d;
  }

private:
  ElasticIntegrand elastic_;
  double barrier_;
};

/// Wraps an integrand and adds a constant to every derivative entry. Used to
/// check that the finite-difference suites catch a wrong derivative.
class BiasedIntegrand final : public Integrand
{
public:
  BiasedIntegrand(IntegrandPtr inner, double bias) : Integrand(inner->shape()), inner_(std::move(inner)), bias_(bias) {}

  std::string name() const override { return inner_->name() + "+bias"; }
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) const override
  {
    return inner_->value(x, u, xi);
  }
  IntegrandDerivative derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& xi) const override
  {
    auto d = inner_->derivative(x, u, xi);
    d.du.array() += bias_;
    d.dxi.array() += bias_;
    return d;
  }

private:
  IntegrandPtr inner_;
  double bias_;
};

/// ℛ(u) = ∫ F(x, u(x), T(∇u(x))) dx on a grid.
class Regularizer
{
public:
  Regularizer(IntegrandPtr integrand, FunctionSpaceConfig space, GridDomain domain)
    : integrand_(std::move(integrand)), space_(space), domain_(std::move(domain))
  {
    require(integrand_ != nullptr, ErrorKind::invalid_argument, "regularizer needs an integrand");
    require(integrand_->components() == space_.N && integrand_->spatial_dim() == domain_.dim(),
            ErrorKind::shape_mismatch, "integrand shape does not match the function space");
  }

  const Integrand& integrand() const { return *integrand_; }
  const IntegrandPtr& integrand_ptr() const { return integrand_; }
  const FunctionSpaceConfig& space() const { return space_; }
  const GridDomain& domain() const { return domain_; }
  const MinorsShape& shape() const { return integrand_->shape(); }

  void check_field(const GridField& u) const
  {
    detail::require_same_domain(u.domain(), domain_);
    require(u.components() == space_.N, ErrorKind::shape_mismatch, "field has the wrong number of components");
  }

private:
  IntegrandPtr integrand_;
  FunctionSpaceConfig space_;
  GridDomain domain_;
};

/// Value of ℛ(u); +∞ if any cell is outside the effective domain.
inline double eval_R(const Regularizer& reg, const GridField& u)
{
  reg.check_field(u);
  const auto& dom = u.domain();
  const MatrixField grad = gradient(u);
  CompensatedSum acc;
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const Eigen::VectorXd xi = t_map(reg.shape(), grad.cell(c));
    const double f = reg.integrand().value(dom.cell_corner(c), u.node(dom.corner_node(c)), xi);
    require(!std::isnan(f), ErrorKind::invalid_integrand, "integrand returned NaN");
    if (std::isinf(f)) return infinity;
    acc.add(f);
  }
  return dom.cell_volume() * acc.value();
}

/// Adds T₂'(A)ᵀ v to the N·n vector `grad`. Shared by ℛ' and w' so both
/// routes perform identical floating-point operations.
inline void add_t2_pullback(const MinorsShape& shape, const Eigen::MatrixXd& A, const Eigen::VectorXd& v,
                            Eigen::Ref<Eigen::VectorXd> grad)
{
  if (shape.tau2() == 0) return;
  grad.noalias() += t2_jacobian(shape, A).transpose() * v;
}

/// Composed derivative of f(x,u,A) = F(x,u,T(A)): f'_u = F'_u and
/// f'_A = F'_ξ₁ + T₂'(A)ᵀ F'_ξ₂.
struct ComposedDerivative
{
  Eigen::VectorXd du;
  Eigen::VectorXd dA;
};

inline ComposedDerivative composed_derivative(const Integrand& F, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                              const Eigen::MatrixXd& A)
{
  const auto& shape = F.shape();
  const Eigen::VectorXd xi = t_map(shape, A);
  const auto d = F.derivative(x, u, xi);
  ComposedDerivative out{d.du, d.dxi.head(shape.entries())};
  add_t2_pullback(shape, A, d.dxi.tail(shape.tau2()), out.dA);
  return out;
}

/// Gâteaux derivative ℛ'(u) in split form.
inline DualElement gateaux_R(const Regularizer& reg, const GridField& u)
{
  reg.check_field(u);
  const auto& dom = u.domain();
  const auto& shape = reg.shape();
  const int N = u.components();
  const int Nn = shape.entries();
  const MatrixField grad = gradient(u);
  DualElement d(dom, N);
  const auto& w = dom.node_weights();
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const Eigen::MatrixXd A = grad.cell(c);
    const Eigen::VectorXd xi = t_map(shape, A);
    const Eigen::VectorXd x = dom.cell_corner(c);
    const std::size_t node = dom.corner_node(c);
    const Eigen::VectorXd uc = u.node(node);
    const double f = reg.integrand().value(x, uc, xi);
    require(!std::isnan(f), ErrorKind::invalid_integrand, "integrand returned NaN");
    require(std::isfinite(f), ErrorKind::not_in_domain, "ℛ is infinite at cell " + std::to_string(c));
    const auto der = reg.integrand().derivative(x, uc, xi);
    d.node_part().segment(static_cast<Eigen::Index>(node) * N, N) =
      (dom.cell_volume() / w(static_cast<Eigen::Index>(node))) * der.du;
    auto gseg = d.grad_part().segment(static_cast<Eigen::Index>(c) * Nn, Nn);
    gseg = der.dxi.head(Nn);
    add_t2_pullback(shape, A, der.dxi.tail(shape.tau2()), gseg);
  }
  return d;
}

/// Bound |f'_{u,A}| ≤ a(x) + b|u|^{p-1} + c|A|^{p-1}.
struct GrowthCertificate
{
  CellField a;
  double b = 0.0;
  double c = 0.0;
  double p = 2.0;

  static GrowthCertificate constant(const GridDomain& dom, double a, double b, double c, double p)
  {
    require(a >= 0.0 && b >= 0.0 && c >= 0.0, ErrorKind::invalid_argument, "growth constants must be nonnegative");
    require(p >= 1.0, ErrorKind::invalid_argument, "growth exponent must be at least 1");
    return {CellField::constant(dom, a), b, c, p};
  }
};

struct GrowthSampling
{
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double min_magnitude = 1e-3;
  double max_magnitude = 1e3;
};

struct GrowthReport
{
  std::size_t sampled = 0;
  std::size_t evaluated = 0;
  double max_ratio = 0.0;
  Eigen::VectorXd worst_u;
  Eigen::MatrixXd worst_A;
  bool passed = false;
};

/// Samples (cell, u, A) with magnitudes log-uniform over the configured
/// range and reports the largest ratio |f'_{u,A}| / bound. Passes iff the
/// ratio never exceeds 1 (up to 1e-12 rounding slack).
inline GrowthReport check_growth(const Regularizer& reg, const GrowthCertificate& cert, const GrowthSampling& cfg = {})
{
  const auto& dom = reg.domain();
  const auto& shape = reg.shape();
  require(cert.a.domain() == dom, ErrorKind::shape_mismatch, "certificate lives on another grid");
  require((cert.a.values().array() >= 0.0).all() && std::isfinite(lp_norm(cert.a, FunctionSpaceConfig::conjugate_exponent(cert.p))),
          ErrorKind::invalid_argument, "certificate a must be nonnegative with finite L^{p*} norm");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(std::log10(cfg.min_magnitude), std::log10(cfg.max_magnitude));
  std::uniform_int_distribution<std::size_t> cell_pick(0, dom.cell_count() - 1);

  GrowthReport rep;
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    ++rep.sampled;
    const std::size_t c = cell_pick(rng);
    Eigen::VectorXd u(shape.rows());
    for (auto& v : u) v = normal(rng);
    u *= std::pow(10.0, uniform(rng)) / std::max(u.norm(), 1e-300);
    Eigen::MatrixXd A(shape.rows(), shape.cols());
    for (auto& v : A.reshaped()) v = normal(rng);
    A *= std::pow(10.0, uniform(rng)) / std::max(A.norm(), 1e-300);

    const Eigen::VectorXd x = dom.cell_corner(c);
    const double f = reg.integrand().value(x, u, t_map(shape, A));
    if (!std::isfinite(f)) continue;
    ++rep.evaluated;
    const auto d = composed_derivative(reg.integrand(), x, u, A);
    const double lhs = std::sqrt(d.du.squaredNorm() + d.dA.squaredNorm());
    const double bound = cert.a[c] + cert.b * std::pow(u.norm(), cert.p - 1.0) + cert.c * std::pow(A.norm(), cert.p - 1.0);
    const double ratio = (bound > 0.0) ? lhs / bound : (lhs > 0.0 ? infinity : 0.0);
    if (ratio > rep.max_ratio || rep.worst_u.size() == 0) {
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      rep.worst_u = u;
      rep.worst_A = A;
    }
  }
  rep.passed = rep.evaluated > 0 && rep.max_ratio <= 1.0 + 1e-12;
  return rep;
}

} // namespace polyreg

#endif
