#ifndef POLYREG_CHECKS_HPP
#define POLYREG_CHECKS_HPP

// Randomised derivative and identity checks shared by the command-line tool
// and the acceptance suite. Every check is reproducible from its seed.

#include <polyreg/conditions.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace polyreg {

struct CheckRow
{
  std::string suite;
  std::string label;
  std::size_t index = 0;
  double analytic = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CheckSuite
{
  std::string name;
  std::vector<CheckRow> rows;

  bool passed() const
  {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
  }
  double worst_error() const
  {
    double e = 0.0;
    for (const auto& r : rows) e = std::max(e, r.error);
    return e;
  }
  void add(std::string label, std::size_t index, double analytic, double reference, double error, double tol)
  {
    rows.push_back({name, std::move(label), index, analytic, reference, error, tol, error <= tol});
  }
};

/// Error of a derivative value against a finite difference, relative to
/// max(1, |reference|).
inline double scaled_error(double analytic, double reference)
{
  return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

// ---------------------------------------------------------------------------
// Minors

/// Central-difference Jacobian of adj_s at A.
inline Eigen::MatrixXd adj_jacobian_fd(const MinorsShape& shape, const Eigen::MatrixXd& A, int s, double h)
{
  const int N = shape.rows(), n = shape.cols();
  Eigen::MatrixXd J(shape.sigma(s), N * n);
  Eigen::MatrixXd B = A;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = B(i, j);
      B(i, j) = a + h;
      const Eigen::VectorXd plus = adj(shape, B, s);
      B(i, j) = a - h;
      const Eigen::VectorXd minus = adj(shape, B, s);
      B(i, j) = a;
      J.col(i * n + j) = (plus - minus) / (2.0 * h);
    }
  return J;
}

/**
 * Compares adj_jacobian with central differences on `matrices` random
 * matrices per shape N, n ∈ {1..4}. One row per (shape, order) with the
 * worst Frobenius-relative error; order 1 must be the identity exactly.
 */
inline CheckSuite check_minors_jacobians(std::size_t matrices, std::uint64_t seed, double tol = 1e-6,
                                         double step = 1e-6)
{
  CheckSuite suite{"minors-jacobian", {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int N = 1; N <= max_minor_order; ++N)
    for (int n = 1; n <= max_minor_order; ++n) {
      const MinorsShape shape(N, n);
      std::vector<double> worst(static_cast<std::size_t>(shape.max_order()) + 1, 0.0);
      for (std::size_t k = 0; k < matrices; ++k) {
        Eigen::MatrixXd A(N, n);
        for (auto& x : A.reshaped()) x = normal(rng);
        for (int s = 1; s <= shape.max_order(); ++s) {
          const Eigen::MatrixXd J = adj_jacobian(shape, A, s);
          double err;
          if (s == 1) {
            err = J == Eigen::MatrixXd::Identity(N * n, N * n) ? 0.0 : infinity;
          } else {
            const Eigen::MatrixXd Jfd = adj_jacobian_fd(shape, A, s, step);
            err = (J - Jfd).norm() / std::max(J.norm(), 1e-300);
          }
          worst[static_cast<std::size_t>(s)] = std::max(worst[static_cast<std::size_t>(s)], err);
        }
      }
      for (int s = 1; s <= shape.max_order(); ++s) {
        const std::string label = std::to_string(N) + "x" + std::to_string(n) + " s=" + std::to_string(s);
        suite.add(label, matrices, 0.0, 0.0, worst[static_cast<std::size_t>(s)], s == 1 ? 0.0 : tol);
      }
    }
  return suite;
}

// ---------------------------------------------------------------------------
// Regularizer and W_poly derivatives

/// Field sampling used by the derivative checks: smooth random fields with
/// the given amplitude around offset·x (offset applies when N = n).
struct FieldSampling
{
  double amplitude = 1.0;
  double offset = 0.0;
};

inline double central_difference_R(const Regularizer& reg, const GridField& u, const GridField& h, double t)
{
  return (eval_R(reg, GridField::axpy(u, t, h)) - eval_R(reg, GridField::axpy(u, -t, h))) / (2.0 * t);
}

inline double central_difference_w(const WPolyFunctional& w, const GridField& u, const GridField& h, double t)
{
  return (eval_w(w, GridField::axpy(u, t, h)) - eval_w(w, GridField::axpy(u, -t, h))) / (2.0 * t);
}

/// ⟨ℛ'(u), h⟩ against central differences of ℛ on `pairs` random (u, h).
/// `analytic` may differ from `reg` to test a corrupted derivative.
inline CheckSuite check_regularizer_derivative(const Regularizer& reg, const Regularizer& analytic, std::size_t pairs,
                                               std::uint64_t seed, FieldSampling fs, double tol = 1e-5,
                                               double step = 1e-5)
{
  CheckSuite suite{"gateaux-R", {}};
  std::mt19937_64 rng(seed);
  const auto& dom = reg.domain();
  const int N = reg.space().N;
  for (std::size_t k = 0; k < pairs; ++k) {
    const GridField u = random_smooth_field(dom, N, rng, fs.amplitude, fs.offset);
    const GridField h = random_smooth_field(dom, N, rng, fs.amplitude);
    const double a = pairing(gateaux_R(analytic, u), h);
    const double fd = central_difference_R(reg, u, h, step);
    suite.add(analytic.integrand().name(), k, a, fd, scaled_error(a, fd), tol);
  }
  return suite;
}

inline CheckSuite check_regularizer_derivative(const Regularizer& reg, std::size_t pairs, std::uint64_t seed,
                                               FieldSampling fs, double tol = 1e-5)
{
  return check_regularizer_derivative(reg, reg, pairs, seed, fs, tol);
}

/// Random W_poly functional with Gaussian u* and v* on `dom`.
inline WPolyFunctional random_wpoly(const GridDomain& dom, const MinorsShape& shape, std::mt19937_64& rng)
{
  std::normal_distribution<double> normal;
  DualElement us(dom, shape.rows());
  for (auto& x : us.node_part()) x = normal(rng);
  for (auto& x : us.grad_part()) x = normal(rng);
  if (shape.max_order() < 2) return WPolyFunctional::linear(std::move(us));
  Eigen::VectorXd v(static_cast<Eigen::Index>(dom.cell_count()) * shape.tau2());
  for (auto& x : v) x = normal(rng);
  return WPolyFunctional(std::move(us), MinorsField(dom, shape, 2, shape.max_order(), std::move(v)));
}

/// ⟨w'(u), h⟩ against central differences of w for random w, u, h.
inline CheckSuite check_wpoly_derivative(const GridDomain& dom, int N, std::size_t pairs, std::uint64_t seed,
                                         double tol = 1e-6, double step = 1e-5)
{
  CheckSuite suite{"gateaux-w", {}};
  std::mt19937_64 rng(seed);
  const MinorsShape shape(N, dom.dim());
  for (std::size_t k = 0; k < pairs; ++k) {
    const WPolyFunctional w = random_wpoly(dom, shape, rng);
    const GridField u = random_smooth_field(dom, N, rng);
    const GridField h = random_smooth_field(dom, N, rng);
    const double a = pairing(gateaux_w(w, u), h);
    const double fd = central_difference_w(w, u, h, step);
    suite.add("random w", k, a, fd, scaled_error(a, fd), tol);
  }
  return suite;
}

/// With v* = 0, w'(u) must be u* bit for bit.
inline CheckSuite check_wpoly_linear_case(const GridDomain& dom, int N, std::size_t count, std::uint64_t seed)
{
  CheckSuite suite{"gateaux-w-linear", {}};
  std::mt19937_64 rng(seed);
  const MinorsShape shape(N, dom.dim());
  for (std::size_t k = 0; k < count; ++k) {
    const WPolyFunctional w = WPolyFunctional::linear(random_wpoly(dom, shape, rng).ustar());
    const DualElement d = gateaux_w(w, random_smooth_field(dom, N, rng));
    std::size_t mismatches = 0;
    auto cmp = [&mismatches](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a(i)) != std::bit_cast<std::uint64_t>(b(i))) ++mismatches;
    };
    cmp(d.node_part(), w.ustar().node_part());
    cmp(d.grad_part(), w.ustar().grad_part());
    suite.add("bitwise u*", k, 0.0, 0.0, static_cast<double>(mismatches), 0.0);
  }
  return suite;
}

struct BiasDetection
{
  double bias = 0.0;
  std::size_t pairs = 0;
  std::size_t caught = 0;
  bool detected() const { return caught > 0; }
};

/// Runs the regularizer derivative check with a derivative shifted by
/// `bias` in every entry and counts the pairs that fail.
inline BiasDetection check_bias_detection(const Regularizer& reg, double bias, std::size_t pairs, std::uint64_t seed,
                                          FieldSampling fs, double tol = 1e-5)
{
  const Regularizer bad(std::make_shared<BiasedIntegrand>(reg.integrand_ptr(), bias), reg.space(), reg.domain());
  const CheckSuite s = check_regularizer_derivative(reg, bad, pairs, seed, fs, tol);
  BiasDetection d{bias, pairs, 0};
  for (const auto& r : s.rows)
    if (!r.passed) ++d.caught;
  return d;
}

// ---------------------------------------------------------------------------
// Subgradient property, Bregman distance and derivative coincidence

/**
 * For w built from the integrand at v̄: ℛ(v) − ℛ(v̄) − w(v) + w(v̄) ≥ −tol on
 * `count` random v (those with ℛ(v) = +∞ are skipped), plus D(v̄; v̄) = 0.
 */
inline CheckSuite check_subgradient_property(const Regularizer& reg, const GridField& vbar, std::size_t count,
                                             std::uint64_t seed, FieldSampling fs, double tol = 1e-10)
{
  CheckSuite suite{"subgradient", {}};
  const WPolyFunctional w = subgradient_from_integrand(reg, vbar);
  const double self = bregman(reg, w, vbar, vbar).value;
  suite.add("D(v;v)", 0, self, 0.0, std::abs(self), 1e-12);
  std::mt19937_64 rng(seed);
  const int N = reg.space().N;
  double worst = infinity;
  std::size_t evaluated = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const GridField v = random_smooth_field(reg.domain(), N, rng, fs.amplitude, fs.offset);
    if (!std::isfinite(eval_R(reg, v))) continue;
    ++evaluated;
    worst = std::min(worst, bregman(reg, w, v, vbar).value);
  }
  if (evaluated == 0) worst = -infinity;
  suite.add("min D(v;v̄) over " + std::to_string(evaluated) + " fields", evaluated, worst, 0.0, std::max(0.0, -worst),
            tol);
  return suite;
}

/// Cellwise relative difference of ℛ'(u) and w'(u) with w built at u.
inline CheckSuite check_coincidence(const Regularizer& reg, std::size_t count, std::uint64_t seed, FieldSampling fs,
                                    double tol = coincidence_tolerance)
{
  CheckSuite suite{"coincidence", {}};
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const GridField u = random_smooth_field(reg.domain(), reg.space().N, rng, fs.amplitude, fs.offset);
    const double d = relative_difference(gateaux_R(reg, u), gateaux_w(subgradient_from_integrand(reg, u), u));
    suite.add(reg.integrand().name(), k, 0.0, 0.0, d, tol);
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Operators

/// ⟨K'(u)^# ω, h⟩ = ⟨ω, K'(u) h⟩ on random triples, relative 1e-10.
inline CheckSuite check_operator_adjoint(const ForwardOperator& op, std::size_t triples, std::uint64_t seed,
                                         double tol = 1e-10)
{
  CheckSuite suite{"operator-adjoint", {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < triples; ++k) {
    const GridField u = random_smooth_field(op.domain(), op.components(), rng);
    const GridField h = random_smooth_field(op.domain(), op.components(), rng);
    DataVector omega(op.data_dim());
    for (auto& x : omega) x = normal(rng);
    const double lhs = pairing(op.derivative_adjoint_apply(u, omega), h);
    const double rhs = omega.dot(op.derivative_apply(u, h));
    suite.add(op.name(), k, lhs, rhs, std::abs(lhs - rhs) / std::max(1e-300, std::max(std::abs(lhs), std::abs(rhs))),
              tol);
  }
  return suite;
}

/// Difference quotients (K(u + t h) − K(u))/t against K'(u)h for
/// t = 1e-3, 1e-4, 1e-5. The error must shrink by a factor in [5, 20] per
/// decade of t, or stay at rounding level for a linear operator.
inline CheckSuite check_operator_derivative(const ForwardOperator& op, std::size_t pairs, std::uint64_t seed)
{
  CheckSuite suite{"operator-derivative", {}};
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < pairs; ++k) {
    const GridField u = random_smooth_field(op.domain(), op.components(), rng);
    const GridField h = random_smooth_field(op.domain(), op.components(), rng);
    const DataVector Kp = op.derivative_apply(u, h);
    const DataVector K0 = op.apply(u);
    std::vector<double> errs;
    for (double t : {1e-3, 1e-4, 1e-5})
      errs.push_back(data_norm((op.apply(GridField::axpy(u, t, h)) - K0) / t - Kp));
    const double floor = 1e-8 * (1.0 + data_norm(Kp));
    double worst = 0.0;
    double ratio = 0.0;
    if (errs[0] > floor) {
      for (std::size_t i = 1; i < errs.size(); ++i) {
        ratio = errs[i] / errs[i - 1];
        worst = std::max(worst, std::abs(std::log10(ratio) + 1.0));
      }
    }
    suite.add(op.name(), k, ratio, 0.1, worst, std::log10(2.0));
  }
  return suite;
}

} // namespace polyreg

#endif
