#ifndef POLYREG_CONDITIONS_HPP
#define POLYREG_CONDITIONS_HPP

#include <polyreg/error.hpp>
#include <polyreg/field.hpp>
#include <polyreg/functional.hpp>
#include <polyreg/io.hpp>
#include <polyreg/operator.hpp>
#include <polyreg/random.hpp>
#include <polyreg/wpoly.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace polyreg {

inline constexpr double margin_tolerance = 1e-9;
inline constexpr double coincidence_tolerance = 1e-12;
inline constexpr double range_tolerance = 1e-8;
inline constexpr double ridge_epsilon = 1e-12;

/// Constants of the variational source condition, validated on construction.
struct SourceConditionParams
{
  double beta1 = 0.0;
  double beta2 = 1.0;
  double alpha_bar = 1.0;
  double rho = 1.0;
  double q = 2.0;

  static SourceConditionParams make(double beta1, double beta2, double alpha_bar, double rho, double R_udag,
                                    double q = 2.0)
  {
    require(beta1 >= 0.0 && beta1 < 1.0, ErrorKind::invalid_argument, "beta1 must lie in [0, 1)");
    require(beta2 > 0.0 && std::isfinite(beta2), ErrorKind::invalid_argument, "beta2 must be positive");
    require(alpha_bar > 0.0 && std::isfinite(alpha_bar), ErrorKind::invalid_argument, "alpha_bar must be positive");
    require(q >= 1.0, ErrorKind::invalid_argument, "residual exponent must be at least 1");
    require(std::isfinite(R_udag), ErrorKind::invalid_argument, "ℛ(u†) must be finite");
    require(rho > alpha_bar * R_udag, ErrorKind::invalid_argument, "rho must exceed alpha_bar·ℛ(u†)");
    return {beta1, beta2, alpha_bar, rho, q};
  }

  TikhonovParams tikhonov() const { return TikhonovParams(alpha_bar, q); }
};

/**
 * An exact solution u† of K(u) = v† together with a W_poly-subgradient w
 * of ℛ at u†. When the subgradient cannot be built from the integrand,
 * `subgradient_error` holds the reason and `w` is the zero functional.
 */
struct Scenario
{
  OperatorPtr op;
  std::shared_ptr<const Regularizer> reg;
  GridField udag;
  DataVector vdag;
  WPolyFunctional w;
  std::string subgradient_error;

  bool has_subgradient() const { return subgradient_error.empty(); }
};

namespace detail {

inline void validate_scenario(const Scenario& s)
{
  require(s.op != nullptr && s.reg != nullptr, ErrorKind::invalid_argument, "scenario needs an operator and a regularizer");
  s.reg->check_field(s.udag);
  require(s.op->domain() == s.udag.domain() && s.op->components() == s.udag.components(), ErrorKind::shape_mismatch,
          "operator and u† live on different spaces");
  require(s.vdag.size() == s.op->data_dim(), ErrorKind::shape_mismatch, "v† has the wrong length");
  require(data_norm(s.op->apply(s.udag) - s.vdag) <= 1e-12, ErrorKind::invalid_argument, "u† does not solve K(u) = v†");
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> e(std::log(lo), std::log(hi));
  return std::exp(e(rng));
}

} // namespace detail

/// Scenario with v† = K(u†) and w built from the integrand derivative at u†.
inline Scenario make_scenario(OperatorPtr op, std::shared_ptr<const Regularizer> reg, GridField udag)
{
  Scenario s;
  s.op = std::move(op);
  s.reg = std::move(reg);
  require(s.op != nullptr && s.reg != nullptr, ErrorKind::invalid_argument, "scenario needs an operator and a regularizer");
  s.vdag = s.op->apply(udag);
  s.udag = std::move(udag);
  try {
    s.w = subgradient_from_integrand(*s.reg, s.udag);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::not_in_domain && e.kind() != ErrorKind::hypothesis_violated) throw;
    s.subgradient_error = e.what();
    s.w = WPolyFunctional::linear(DualElement(s.udag.domain(), s.udag.components()));
  }
  detail::validate_scenario(s);
  return s;
}

/// Scenario with an explicitly supplied w (not necessarily a subgradient).
inline Scenario make_scenario(OperatorPtr op, std::shared_ptr<const Regularizer> reg, GridField udag, WPolyFunctional w)
{
  Scenario s;
  s.op = std::move(op);
  s.reg = std::move(reg);
  require(s.op != nullptr && s.reg != nullptr, ErrorKind::invalid_argument, "scenario needs an operator and a regularizer");
  s.vdag = s.op->apply(udag);
  s.udag = std::move(udag);
  s.w = std::move(w);
  detail::validate_scenario(s);
  return s;
}

/// Dense matrix of K'(u): column j is K'(u) e_j for the node basis.
inline Eigen::MatrixXd derivative_matrix(const ForwardOperator& op, const GridField& u)
{
  const Eigen::Index cols = u.values().size();
  Eigen::MatrixXd J(op.data_dim(), cols);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    e(j) = 1.0;
    J.col(j) = op.derivative_apply(u, GridField(u.domain(), u.components(), e));
    e(j) = 0.0;
  }
  return J;
}

// ---------------------------------------------------------------------------
// ℛ-minimality spot-check

struct MinimalitySampling
{
  std::size_t samples = 200;
  std::uint64_t seed = 7;
  double t_min = 1e-4;
  double t_max = 1.0;
  double feasibility_tol = 1e-10;
  /// Larger problems skip the dense null-space computation.
  Eigen::Index max_unknowns = 4096;
};

struct MinimalityReport
{
  Eigen::Index null_dim = 0;
  std::size_t sampled = 0;
  std::size_t feasible = 0;
  double worst_gap = infinity;
  bool skipped = false;
  bool passed = true;
  std::string note;
};

/**
 * Heuristic check that u† minimises ℛ among exact solutions: samples
 * u = u† + t z with z in the numerical null space of K'(u†), keeps those
 * with ‖K(u) − v†‖ small, and requires ℛ(u) ≥ ℛ(u†) − 1e-8.
 */
inline MinimalityReport check_minimality(const Scenario& scn, const MinimalitySampling& cfg = {})
{
  MinimalityReport rep;
  const Eigen::Index unknowns = scn.udag.values().size();
  if (unknowns > cfg.max_unknowns) {
    rep.skipped = true;
    rep.note = "skipped: too many unknowns for a dense null-space computation";
    return rep;
  }
  const Eigen::MatrixXd J = derivative_matrix(*scn.op, scn.udag);
  Eigen::MatrixXd basis;
  if (J.rows() == 0 || J.norm() == 0.0) {
    basis = Eigen::MatrixXd::Identity(unknowns, unknowns);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = 1e-10 * sv(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    basis = svd.matrixV().rightCols(unknowns - rank);
  }
  rep.null_dim = basis.cols();
  if (rep.null_dim == 0) {
    rep.note = "K'(u†) is injective; u† is locally the only exact solution";
    return rep;
  }

  const double R0 = eval_R(*scn.reg, scn.udag);
  const double feas = cfg.feasibility_tol * (1.0 + data_norm(scn.vdag));
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    ++rep.sampled;
    Eigen::VectorXd g(rep.null_dim);
    for (auto& x : g) x = normal(rng);
    Eigen::VectorXd z = basis * g;
    GridField dir(scn.udag.domain(), scn.udag.components(), z);
    dir = (1.0 / sobolev_norm(dir, scn.reg->space().p)) * dir;
    const double t = detail::log_uniform(rng, cfg.t_min, cfg.t_max);
    const GridField u = GridField::axpy(scn.udag, t, dir);
    if (data_norm(scn.op->apply(u) - scn.vdag) > feas) continue;
    ++rep.feasible;
    const double R = eval_R(*scn.reg, u);
    rep.worst_gap = std::min(rep.worst_gap, R - R0);
  }
  rep.passed = rep.feasible == 0 || rep.worst_gap >= -1e-8;
  rep.note = std::to_string(rep.feasible) + " of " + std::to_string(rep.sampled) + " null-space samples feasible";
  return rep;
}

// ---------------------------------------------------------------------------
// Neighbourhood sampling

struct NeighbourhoodSampling
{
  std::size_t count = 1000;
  double t_min = 1e-3;
  double t_max = 1.0;
  std::uint64_t seed = 1;
  std::size_t max_attempts_per_sample = 100;
};

struct Neighbourhood
{
  std::vector<GridField> fields;
  std::vector<double> radii;
  std::size_t attempts = 0;

  double acceptance_rate() const
  {
    return attempts == 0 ? 0.0 : static_cast<double>(fields.size()) / static_cast<double>(attempts);
  }
};

/// Unit-W^{1,p} random directions, reproducible from `seed`.
inline std::vector<GridField> random_directions(const Scenario& scn, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<GridField> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(random_direction(scn.udag.domain(), scn.udag.components(), scn.reg->space().p, rng));
  return out;
}

/**
 * Draws u = u† + t d with d a unit-W^{1,p} random direction and t
 * log-uniform in [t_min, t_max], keeping u with 𝒯_ᾱ(u; v†) ≤ ρ.
 * t_max = 0 yields copies of u†.
 */
inline Neighbourhood sample_neighbourhood(const Scenario& scn, const SourceConditionParams& params,
                                          const NeighbourhoodSampling& cfg)
{
  require(cfg.t_max >= 0.0, ErrorKind::invalid_argument, "radius range must be nonnegative");
  require(cfg.t_max == 0.0 || (cfg.t_min > 0.0 && cfg.t_min <= cfg.t_max), ErrorKind::invalid_argument,
          "radius range needs 0 < t_min <= t_max");
  const auto tik = params.tikhonov();
  std::mt19937_64 rng(cfg.seed);
  Neighbourhood nb;
  const std::size_t max_attempts = std::max<std::size_t>(1, cfg.count * cfg.max_attempts_per_sample);
  while (nb.fields.size() < cfg.count && nb.attempts < max_attempts) {
    ++nb.attempts;
    GridField d = random_direction(scn.udag.domain(), scn.udag.components(), scn.reg->space().p, rng);
    const double t = cfg.t_max == 0.0 ? 0.0 : detail::log_uniform(rng, cfg.t_min, cfg.t_max);
    GridField u = GridField::axpy(scn.udag, t, d);
    const double T = tikhonov_value(*scn.op, *scn.reg, tik, u, scn.vdag);
    if (!(T <= params.rho)) continue;
    nb.fields.push_back(std::move(u));
    nb.radii.push_back(t);
  }
  require(!nb.fields.empty() && cfg.count > 0, ErrorKind::neighbourhood_empty,
          "no sample satisfies 𝒯_ᾱ(u; v†) ≤ ρ; rho is too tight for the radius range");
  return nb;
}

// ---------------------------------------------------------------------------
// Variational inequality

struct VariationalInequalityReport
{
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double worst_margin = infinity;
  std::optional<std::size_t> witness;
  /// One entry per sample; NaN where the Bregman distance is undefined.
  std::vector<double> margins;
  bool passed = false;
};

/// margin(u) = β₁ D_w(u; u†) + β₂‖K(u) − v†‖ − (w(u†) − w(u)); passes iff
/// every evaluated margin is ≥ −1e-9.
inline VariationalInequalityReport check_variational_inequality(const Scenario& scn, const SourceConditionParams& params,
                                                                const std::vector<GridField>& samples)
{
  VariationalInequalityReport rep;
  rep.margins.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const GridField& u = samples[k];
    BregmanRecord D;
    try {
      D = bregman(*scn.reg, scn.w, u, scn.udag);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_distance) throw;
      ++rep.skipped;
      continue;
    }
    const double residual = data_norm(scn.op->apply(u) - scn.vdag);
    const double m = params.beta1 * D.value + params.beta2 * residual - (D.w_udag - D.w_u);
    rep.margins[k] = m;
    ++rep.evaluated;
    if (!rep.witness || m < rep.worst_margin) {
      rep.worst_margin = m;
      rep.witness = k;
    }
  }
  rep.passed = rep.evaluated > 0 && rep.worst_margin >= -margin_tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Differentiated inequality

struct DifferentiatedReport
{
  std::size_t directions = 0;
  double worst_value = infinity;
  double worst_corollary_slack = infinity;
  bool passed = false;
  bool corollary_passed = false;
};

/**
 * For each direction û and −û evaluates
 *   β₁⟨ℛ'(u†), û⟩ + (1 − β₁)⟨w'(u†), û⟩ + β₂‖K'(u†)û‖ ≥ −1e-9,
 * and the two-sided bound |⟨ℛ'(u†), û⟩| ≤ β₂‖K'(u†)û‖.
 */
inline DifferentiatedReport differentiate_inequality(const Scenario& scn, const SourceConditionParams& params,
                                                     const std::vector<GridField>& directions)
{
  const DualElement dR = gateaux_R(*scn.reg, scn.udag);
  const DualElement dw = gateaux_w(scn.w, scn.udag);
  DifferentiatedReport rep;
  rep.directions = directions.size();
  for (const auto& h : directions) {
    const double a = pairing(dR, h);
    const double b = pairing(dw, h);
    const double k = data_norm(scn.op->derivative_apply(scn.udag, h));
    const double lin = params.beta1 * a + (1.0 - params.beta1) * b;
    rep.worst_value = std::min({rep.worst_value, lin + params.beta2 * k, -lin + params.beta2 * k});
    rep.worst_corollary_slack = std::min(rep.worst_corollary_slack, params.beta2 * k - std::abs(a));
  }
  if (directions.empty()) rep.worst_value = rep.worst_corollary_slack = 0.0;
  rep.passed = rep.worst_value >= -margin_tolerance;
  rep.corollary_passed = rep.worst_corollary_slack >= -margin_tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Range condition

struct LeastSquaresResult
{
  Eigen::VectorXd solution;
  double residual = 0.0;
  bool ridge_used = false;
};

/// min ‖M x − t‖ via the normal equations MᵀM x = Mᵀt. Falls back to
/// (MᵀM + ε I) with ε = 1e-12·max(1, max diag) when the LDLᵀ factor has a
/// pivot below ε.
inline LeastSquaresResult solve_normal_equations(const Eigen::MatrixXd& M, const Eigen::VectorXd& t)
{
  require(M.rows() == t.size(), ErrorKind::shape_mismatch, "least-squares target has the wrong length");
  LeastSquaresResult res;
  const Eigen::MatrixXd H = M.transpose() * M;
  const Eigen::VectorXd rhs = M.transpose() * t;
  if (H.size() == 0) {
    res.solution = Eigen::VectorXd::Zero(M.cols());
    res.residual = t.norm();
    return res;
  }
  const double scale = std::max(1.0, H.diagonal().maxCoeff());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  const Eigen::VectorXd piv = ldlt.vectorD();
  const bool deficient = ldlt.info() != Eigen::Success || piv.minCoeff() <= ridge_epsilon * scale;
  if (deficient) {
    res.ridge_used = true;
    Eigen::MatrixXd Hr = H;
    Hr.diagonal().array() += ridge_epsilon * scale;
    res.solution = Eigen::LDLT<Eigen::MatrixXd>(Hr).solve(rhs);
  } else {
    res.solution = ldlt.solve(rhs);
  }
  res.residual = (M * res.solution - t).norm();
  return res;
}

struct RangeConditionResult
{
  DataVector omega_star;
  double residual = 0.0;
  double bound_constant = 0.0;
  double target_norm = 0.0;
  bool ridge_used = false;
  bool in_range = false;
};

/// Matrix whose column j is K'(u)^# e_j in node coordinates scaled by
/// √w_i, so that Euclidean norms of its combinations are dual norms.
inline Eigen::MatrixXd adjoint_matrix(const ForwardOperator& op, const GridField& u)
{
  const Eigen::Index m = op.data_dim();
  const auto& w = u.domain().node_weights();
  const int N = u.components();
  Eigen::MatrixXd M(u.values().size(), m);
  DataVector e = DataVector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    e(j) = 1.0;
    M.col(j) = collapse(op.derivative_adjoint_apply(u, e));
    e(j) = 0.0;
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) M.middleRows(i * N, N) *= std::sqrt(w(i));
  return M;
}

/// Least-squares ω with K'(u)^# ω ≈ target in the discrete dual norm.
inline RangeConditionResult range_condition_solve(const ForwardOperator& op, const GridField& u,
                                                  const DualElement& target)
{
  const Eigen::MatrixXd M = adjoint_matrix(op, u);
  Eigen::VectorXd t = collapse(target);
  const auto& w = u.domain().node_weights();
  const int N = u.components();
  for (Eigen::Index i = 0; i < w.size(); ++i) t.segment(i * N, N) *= std::sqrt(w(i));
  const auto ls = solve_normal_equations(M, t);
  RangeConditionResult r;
  r.omega_star = ls.solution;
  r.residual = ls.residual;
  r.bound_constant = data_norm(ls.solution);
  r.target_norm = t.norm();
  r.ridge_used = ls.ridge_used;
  r.in_range = r.residual <= range_tolerance * (1.0 + r.target_norm);
  return r;
}

/// Solves K'(u†)^# ω = w'(u†).
inline RangeConditionResult range_condition_solve(const Scenario& scn)
{
  return range_condition_solve(*scn.op, scn.udag, gateaux_w(scn.w, scn.udag));
}

// ---------------------------------------------------------------------------
// Nonlinearity condition

struct NonlinearitySample
{
  double operator_term = 0.0;
  double w_term = 0.0;
  double bregman = 0.0;
  bool skipped = false;
};

struct NonlinearityReport
{
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double max_excess = -infinity;
  double max_operator_term = 0.0;
  double max_w_term = -infinity;
  /// Smallest β₁ for which every evaluated sample passes.
  double beta1_threshold = 0.0;
  std::vector<NonlinearitySample> rows;
  bool passed = false;
};

/**
 * Per sample u:
 *   ‖ω*‖‖K(u) − v† − K'(u†)(u − u†)‖ + w(u†) − w(u) − ⟨w'(u†), u† − u⟩
 * minus β₁ D_w(u; u†). Passes iff the largest excess is ≤ 1e-9.
 */
inline NonlinearityReport check_nonlinearity_condition(const Scenario& scn, const DataVector& omega_star, double beta1,
                                                       const std::vector<GridField>& samples)
{
  require(beta1 >= 0.0 && beta1 < 1.0, ErrorKind::invalid_argument, "beta1 must lie in [0, 1)");
  const double omega_norm = data_norm(omega_star);
  const DualElement dw = gateaux_w(scn.w, scn.udag);
  const double w0 = eval_w(scn.w, scn.udag);
  NonlinearityReport rep;
  rep.rows.resize(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const GridField& u = samples[k];
    auto& row = rep.rows[k];
    BregmanRecord D;
    try {
      D = bregman(*scn.reg, scn.w, u, scn.udag);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_distance) throw;
      row.skipped = true;
      ++rep.skipped;
      continue;
    }
    const GridField h = u - scn.udag;
    const DataVector taylor = scn.op->apply(u) - scn.vdag - scn.op->derivative_apply(scn.udag, h);
    row.operator_term = omega_norm * data_norm(taylor);
    row.w_term = w0 - D.w_u + pairing(dw, h);
    row.bregman = D.value;
    ++rep.evaluated;
    const double left = row.operator_term + row.w_term;
    rep.max_excess = std::max(rep.max_excess, left - beta1 * row.bregman);
    rep.max_operator_term = std::max(rep.max_operator_term, row.operator_term);
    rep.max_w_term = std::max(rep.max_w_term, row.w_term);
    if (left > margin_tolerance)
      rep.beta1_threshold =
        std::max(rep.beta1_threshold, row.bregman > 0.0 ? (left - margin_tolerance) / row.bregman : infinity);
  }
  if (rep.evaluated == 0) rep.max_excess = rep.max_w_term = 0.0;
  rep.passed = rep.evaluated > 0 && rep.max_excess <= margin_tolerance;
  return rep;
}

struct RadiusSweepRow
{
  double radius = 0.0;
  std::size_t accepted = 0;
  NonlinearityReport report;
};

struct RadiusSweep
{
  std::vector<RadiusSweepRow> rows;
  /// Largest radius at which the check passes with the requested β₁.
  std::optional<double> chosen_radius;
};

/// Runs the nonlinearity check on neighbourhoods with t ∈ [r·ratio, r] for
/// each radius r, keeping the radius order of the input.
inline RadiusSweep nonlinearity_radius_sweep(const Scenario& scn, const SourceConditionParams& params,
                                             const DataVector& omega_star, double beta1,
                                             const std::vector<double>& radii, NeighbourhoodSampling base,
                                             double inner_ratio = 1e-2)
{
  RadiusSweep sweep;
  for (double r : radii) {
    require(r > 0.0, ErrorKind::invalid_argument, "sweep radii must be positive");
    NeighbourhoodSampling cfg = base;
    cfg.t_max = r;
    cfg.t_min = r * inner_ratio;
    RadiusSweepRow row;
    row.radius = r;
    try {
      const auto nb = sample_neighbourhood(scn, params, cfg);
      row.accepted = nb.fields.size();
      row.report = check_nonlinearity_condition(scn, omega_star, beta1, nb.fields);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::neighbourhood_empty) throw;
    }
    if (row.report.passed && (!sweep.chosen_radius || r > *sweep.chosen_radius)) sweep.chosen_radius = r;
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Theorems

enum class Verdict { holds, hypotheses_not_met, violated };

inline const char* to_string(Verdict v)
{
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::hypotheses_not_met: return "hypotheses-not-met";
    case Verdict::violated: return "violated";
  }
  return "unknown";
}

inline int exit_code(Verdict v)
{
  switch (v) {
    case Verdict::holds: return 0;
    case Verdict::hypotheses_not_met: return 2;
    case Verdict::violated: return 1;
  }
  return 1;
}

struct HypothesisCheck
{
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Largest entrywise relative difference between two dual elements in
/// split form; entries that are both zero count as equal.
inline double relative_difference(const DualElement& a, const DualElement& b)
{
  DualElement::check_compatible(a, b);
  double worst = 0.0;
  auto scan = [&worst](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = std::abs(x(i) - y(i));
      if (d == 0.0) continue;
      worst = std::max(worst, d / std::max(std::abs(x(i)), std::abs(y(i))));
    }
  };
  scan(a.node_part(), b.node_part());
  scan(a.grad_part(), b.grad_part());
  return worst;
}

/// Hypotheses of the direct theorem: growth bound, subgradient existence,
/// differentiability at u† and the ℛ-minimality spot-check.
inline std::vector<HypothesisCheck> rancon_hypotheses(const Scenario& scn, const GrowthReport& growth,
                                                      const MinimalityReport& minimality)
{
  std::vector<HypothesisCheck> hs;
  hs.push_back({"growth condition", growth.passed,
                "max ratio " + format_double(growth.max_ratio) + " over " + std::to_string(growth.evaluated) +
                  " samples"});
  hs.push_back({"subgradient existence", scn.has_subgradient(),
                scn.has_subgradient() ? "built from the integrand derivative" : scn.subgradient_error});
  bool diff = true;
  std::string why = "ℛ'(u†) finite";
  try {
    (void)gateaux_R(*scn.reg, scn.udag);
  } catch (const Error& e) {
    diff = false;
    why = e.what();
  }
  hs.push_back({"differentiability", diff, why});
  hs.push_back({"ℛ-minimality spot-check", minimality.passed, minimality.note});
  return hs;
}

struct RanconReport
{
  std::vector<HypothesisCheck> hypotheses;
  double coincidence = 0.0;
  VariationalInequalityReport vi;
  DifferentiatedReport differentiated;
  RangeConditionResult range;
  Verdict verdict = Verdict::hypotheses_not_met;
  std::string stage;
};

/**
 * Discrete form of "variational inequality ⇒ range condition". Checks the
 * hypotheses, the cellwise coincidence ℛ'(u†) = w'(u†), then the
 * inequality on `samples`; only if that passes are the differentiated
 * inequality and the range membership asserted.
 */
inline RanconReport verify_theorem_rancon(const Scenario& scn, const SourceConditionParams& params,
                                          const GrowthReport& growth, const MinimalityReport& minimality,
                                          const std::vector<GridField>& samples,
                                          const std::vector<GridField>& directions)
{
  RanconReport rep;
  rep.hypotheses = rancon_hypotheses(scn, growth, minimality);
  for (const auto& h : rep.hypotheses)
    if (!h.passed) {
      rep.verdict = Verdict::hypotheses_not_met;
      rep.stage = h.name;
      return rep;
    }

  rep.coincidence = relative_difference(gateaux_R(*scn.reg, scn.udag), gateaux_w(scn.w, scn.udag));
  if (!(rep.coincidence <= coincidence_tolerance)) {
    rep.verdict = Verdict::violated;
    rep.stage = "derivative coincidence";
    return rep;
  }

  rep.vi = check_variational_inequality(scn, params, samples);
  if (!rep.vi.passed) {
    rep.verdict = Verdict::hypotheses_not_met;
    rep.stage = "variational inequality";
    return rep;
  }

  rep.differentiated = differentiate_inequality(scn, params, directions);
  if (!rep.differentiated.passed || !rep.differentiated.corollary_passed) {
    rep.verdict = Verdict::violated;
    rep.stage = "differentiated inequality";
    return rep;
  }

  rep.range = range_condition_solve(scn);
  if (!rep.range.in_range) {
    rep.verdict = Verdict::violated;
    rep.stage = "range condition";
    return rep;
  }
  rep.verdict = Verdict::holds;
  rep.stage = "all";
  return rep;
}

struct ConverseReport
{
  std::vector<HypothesisCheck> hypotheses;
  RangeConditionResult range;
  NonlinearityReport nonlinearity;
  std::optional<SourceConditionParams> derived;
  VariationalInequalityReport vi;
  Verdict verdict = Verdict::hypotheses_not_met;
  std::string stage;
};

/**
 * Discrete form of "range condition + nonlinearity bound ⇒ variational
 * inequality with β₂ = ‖ω*‖". ᾱ, ρ and q are taken from `base`.
 */
inline ConverseReport verify_theorem_converse(const Scenario& scn, double beta1, const SourceConditionParams& base,
                                              const std::vector<GridField>& samples)
{
  ConverseReport rep;
  rep.hypotheses.push_back({"subgradient existence", scn.has_subgradient(),
                            scn.has_subgradient() ? "built from the integrand derivative" : scn.subgradient_error});
  if (!scn.has_subgradient()) {
    rep.stage = "subgradient existence";
    return rep;
  }
  rep.range = range_condition_solve(scn);
  rep.hypotheses.push_back({"range condition", rep.range.in_range,
                            "residual " + format_double(rep.range.residual) + ", ‖ω*‖ " +
                              format_double(rep.range.bound_constant)});
  if (!rep.range.in_range) {
    rep.stage = "range condition";
    return rep;
  }
  rep.nonlinearity = check_nonlinearity_condition(scn, rep.range.omega_star, beta1, samples);
  rep.hypotheses.push_back({"nonlinearity condition", rep.nonlinearity.passed,
                            "max excess " + format_double(rep.nonlinearity.max_excess) + ", β₁ threshold " +
                              format_double(rep.nonlinearity.beta1_threshold)});
  if (!rep.nonlinearity.passed) {
    rep.stage = "nonlinearity condition";
    return rep;
  }

  // β₂ must be positive; ω* = 0 means any positive β₂ works.
  const double beta2 = std::max(rep.range.bound_constant, std::numeric_limits<double>::min());
  rep.derived =
    SourceConditionParams::make(beta1, beta2, base.alpha_bar, base.rho, eval_R(*scn.reg, scn.udag), base.q);
  rep.vi = check_variational_inequality(scn, *rep.derived, samples);
  rep.verdict = rep.vi.passed ? Verdict::holds : Verdict::violated;
  rep.stage = rep.vi.passed ? "all" : "variational inequality";
  return rep;
}

// ---------------------------------------------------------------------------
// Dual-adjoint range on plain matrices

/// Unit vector spanning the direction of smallest singular value of A.
inline Eigen::VectorXd null_direction(const Eigen::MatrixXd& A)
{
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  return svd.matrixV().col(A.cols() - 1);
}

/// |⟨u*, u⟩| / ‖A u‖, +∞ when A u = 0 and the numerator is not.
inline double bound_ratio(const Eigen::MatrixXd& A, const Eigen::VectorXd& ustar, const Eigen::VectorXd& u)
{
  const double num = std::abs(ustar.dot(u));
  const double den = (A * u).norm();
  if (den == 0.0) return num == 0.0 ? 0.0 : infinity;
  return num / den;
}

struct DualAdjointRangeReport
{
  /// Least-squares preimage z with Aᵀz ≈ u*.
  Eigen::VectorXd preimage;
  double residual = 0.0;
  bool ridge_used = false;
  /// Sampled sup of |⟨u*, u⟩| / ‖A u‖.
  double bound_constant = 0.0;
  std::size_t samples = 0;
};

/// Decides u* ∈ ran Aᵀ by least squares and estimates the constant C in
/// |⟨u*, u⟩| ≤ C‖A u‖ from random u.
inline DualAdjointRangeReport dual_adjoint_range_check(const Eigen::MatrixXd& A, const Eigen::VectorXd& ustar,
                                                       std::size_t samples, std::uint64_t seed)
{
  require(ustar.size() == A.cols(), ErrorKind::shape_mismatch, "u* must act on the domain of A");
  DualAdjointRangeReport rep;
  const auto ls = solve_normal_equations(A.transpose(), ustar);
  rep.preimage = ls.solution;
  rep.residual = ls.residual;
  rep.ridge_used = ls.ridge_used;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(A.cols());
  for (std::size_t k = 0; k < samples; ++k) {
    for (auto& x : u) x = normal(rng);
    rep.bound_constant = std::max(rep.bound_constant, bound_ratio(A, ustar, u));
  }
  rep.samples = samples;
  return rep;
}

} // namespace polyreg

#endif
