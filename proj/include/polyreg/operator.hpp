#ifndef POLYREG_OPERATOR_HPP
#define POLYREG_OPERATOR_HPP

#include <polyreg/error.hpp>
#include <polyreg/field.hpp>
#include <polyreg/functional.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace polyreg {

/// Finite-dimensional data in V = R^m with the Euclidean norm.
using DataVector = Eigen::VectorXd;

inline double data_norm(const DataVector& v) { return v.norm(); }

/**
 * Forward operator K: U → V with Gâteaux derivative K'(u) and its
 * dual-adjoint K'(u)^#, characterised by
 *   ⟨K'(u)^# ω, h⟩ = ω·(K'(u) h)   for all ω ∈ V, h ∈ U.
 */
class ForwardOperator
{
public:
  ForwardOperator(GridDomain domain, int components) : domain_(std::move(domain)), N_(components) {}
  virtual ~ForwardOperator() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index data_dim() const = 0;
  virtual DataVector apply(const GridField& u) const = 0;
  virtual DataVector derivative_apply(const GridField& u, const GridField& h) const = 0;
  virtual DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const = 0;

  const GridDomain& domain() const { return domain_; }
  int components() const { return N_; }

protected:
  void check_field(const GridField& u) const
  {
    detail::require_same_domain(u.domain(), domain_);
    require(u.components() == N_, ErrorKind::shape_mismatch, "field has the wrong number of components");
  }
  void check_data(const DataVector& v) const
  {
    require(v.size() == data_dim(), ErrorKind::shape_mismatch, "data vector has the wrong length");
  }

  // Dual element acting as h ↦ Σ_i g_i·h_i on node values.
  DualElement node_functional(const Eigen::VectorXd& g) const
  {
    DualElement d(domain_, N_);
    const auto& w = domain_.node_weights();
    for (Eigen::Index i = 0; i < w.size(); ++i) d.node_part().segment(i * N_, N_) = g.segment(i * N_, N_) / w(i);
    return d;
  }

private:
  GridDomain domain_;
  int N_;
};

using OperatorPtr = std::shared_ptr<const ForwardOperator>;

/// K ≡ 0 into R^m.
class ZeroOperator final : public ForwardOperator
{
public:
  ZeroOperator(GridDomain domain, int components, Eigen::Index data_dim)
    : ForwardOperator(std::move(domain), components), m_(data_dim)
  {}
  std::string name() const override { return "zero"; }
  Eigen::Index data_dim() const override { return m_; }
  DataVector apply(const GridField& u) const override
  {
    check_field(u);
    return DataVector::Zero(m_);
  }
  DataVector derivative_apply(const GridField& u, const GridField& h) const override
  {
    check_field(u);
    check_field(h);
    return DataVector::Zero(m_);
  }
  DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const override
  {
    check_field(u);
    check_data(omega);
    return DualElement(domain(), components());
  }

private:
  Eigen::Index m_;
};

/// Observes every node value; data layout is node-major, component-minor.
class IdentitySampling final : public ForwardOperator
{
public:
  using ForwardOperator::ForwardOperator;
  std::string name() const override { return "identity"; }
  Eigen::Index data_dim() const override { return static_cast<Eigen::Index>(domain().node_count()) * components(); }
  DataVector apply(const GridField& u) const override
  {
    check_field(u);
    return u.values();
  }
  DataVector derivative_apply(const GridField& u, const GridField& h) const override
  {
    check_field(u);
    check_field(h);
    return h.values();
  }
  DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const override
  {
    check_field(u);
    check_data(omega);
    return node_functional(omega);
  }
};

namespace detail {

// Nodes whose grid coordinates are all multiples of `stride`.
inline std::vector<std::size_t> observation_nodes(const GridDomain& dom, int stride)
{
  require(stride >= 1, ErrorKind::invalid_argument, "observation stride must be positive");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dom.node_count(); ++i) {
    bool keep = true;
    for (int a = 0; a < dom.dim(); ++a) keep = keep && dom.node_coordinate(i, a) % stride == 0;
    if (keep) out.push_back(i);
  }
  return out;
}

} // namespace detail

/**
 * Discrete integral operator: each observation is a Gaussian-weighted
 * average of the node values around an observation node,
 *   (Ku)_k = Σ_j S_kj u_j,  S_kj ∝ exp(−|x_k − x_j|² / (2 width²)),
 * with rows of S normalised to sum to one. Components are smoothed
 * independently.
 */
class LinearSmoothing final : public ForwardOperator
{
public:
  LinearSmoothing(GridDomain domain, int components, double width, int stride = 1)
    : ForwardOperator(std::move(domain), components), width_(width)
  {
    require(width_ > 0.0, ErrorKind::invalid_argument, "smoothing width must be positive");
    const auto& dom = this->domain();
    obs_ = detail::observation_nodes(dom, stride);
    const auto nodes = static_cast<Eigen::Index>(dom.node_count());
    S_.resize(static_cast<Eigen::Index>(obs_.size()), nodes);
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      const Eigen::VectorXd xk = dom.node_position(obs_[k]);
      for (Eigen::Index j = 0; j < nodes; ++j) {
        const double d2 = (dom.node_position(static_cast<std::size_t>(j)) - xk).squaredNorm();
        S_(static_cast<Eigen::Index>(k), j) = std::exp(-d2 / (2.0 * width_ * width_));
      }
      S_.row(static_cast<Eigen::Index>(k)) /= S_.row(static_cast<Eigen::Index>(k)).sum();
    }
  }

  std::string name() const override { return "smoothing"; }
  Eigen::Index data_dim() const override { return S_.rows() * components(); }
  const Eigen::MatrixXd& kernel() const { return S_; }

  DataVector apply(const GridField& u) const override
  {
    check_field(u);
    return smooth(u.values());
  }
  DataVector derivative_apply(const GridField& u, const GridField& h) const override
  {
    check_field(u);
    check_field(h);
    return smooth(h.values());
  }
  DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const override
  {
    check_field(u);
    check_data(omega);
    return node_functional(smooth_transpose(omega));
  }

  /// S applied componentwise to node-major values.
  DataVector smooth(const Eigen::VectorXd& node_values) const
  {
    const int N = components();
    const Eigen::Map<const Eigen::MatrixXd> U(node_values.data(), N, S_.cols());
    Eigen::MatrixXd out = U * S_.transpose();
    return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
  }

  Eigen::VectorXd smooth_transpose(const DataVector& omega) const
  {
    const int N = components();
    const Eigen::Map<const Eigen::MatrixXd> W(omega.data(), N, S_.rows());
    Eigen::MatrixXd out = W * S_;
    return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
  }

private:
  double width_;
  std::vector<std::size_t> obs_;
  Eigen::MatrixXd S_;
};

/// (Ku)(x_k) = u(x_k) + u(x_k)³ componentwise at the observation nodes.
class PointwiseCubic final : public ForwardOperator
{
public:
  PointwiseCubic(GridDomain domain, int components, int stride = 1)
    : ForwardOperator(std::move(domain), components), obs_(detail::observation_nodes(this->domain(), stride))
  {}

  std::string name() const override { return "cubic"; }
  Eigen::Index data_dim() const override { return static_cast<Eigen::Index>(obs_.size()) * components(); }

  DataVector apply(const GridField& u) const override
  {
    check_field(u);
    const int N = components();
    DataVector out(data_dim());
    for (std::size_t k = 0; k < obs_.size(); ++k)
      for (int c = 0; c < N; ++c) {
        const double v = u.at(obs_[k], c);
        out(static_cast<Eigen::Index>(k) * N + c) = v + v * v * v;
      }
    return out;
  }

  DataVector derivative_apply(const GridField& u, const GridField& h) const override
  {
    check_field(u);
    check_field(h);
    const int N = components();
    DataVector out(data_dim());
    for (std::size_t k = 0; k < obs_.size(); ++k)
      for (int c = 0; c < N; ++c) {
        const double v = u.at(obs_[k], c);
        out(static_cast<Eigen::Index>(k) * N + c) = (1.0 + 3.0 * v * v) * h.at(obs_[k], c);
      }
    return out;
  }

  DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const override
  {
    check_field(u);
    check_data(omega);
    const int N = components();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain().node_count()) * N);
    for (std::size_t k = 0; k < obs_.size(); ++k)
      for (int c = 0; c < N; ++c) {
        const double v = u.at(obs_[k], c);
        g(static_cast<Eigen::Index>(obs_[k]) * N + c) = (1.0 + 3.0 * v * v) * omega(static_cast<Eigen::Index>(k) * N + c);
      }
    return node_functional(g);
  }

private:
  std::vector<std::size_t> obs_;
};

/// Smoothing applied after the pointwise cubic on every node:
/// K(u) = S(u + u³), K'(u)h = S((1 + 3u²)h).
class SmoothedCubic final : public ForwardOperator
{
public:
  SmoothedCubic(GridDomain domain, int components, double width, int stride = 1)
    : ForwardOperator(domain, components), smoothing_(domain, components, width, stride)
  {}

  std::string name() const override { return "composed"; }
  Eigen::Index data_dim() const override { return smoothing_.data_dim(); }

  DataVector apply(const GridField& u) const override
  {
    check_field(u);
    const auto& v = u.values();
    return smoothing_.smooth((v.array() + v.array().cube()).matrix());
  }
  DataVector derivative_apply(const GridField& u, const GridField& h) const override
  {
    check_field(u);
    check_field(h);
    return smoothing_.smooth(((1.0 + 3.0 * u.values().array().square()) * h.values().array()).matrix());
  }
  DualElement derivative_adjoint_apply(const GridField& u, const DataVector& omega) const override
  {
    check_field(u);
    check_data(omega);
    const Eigen::VectorXd g =
      ((1.0 + 3.0 * u.values().array().square()) * smoothing_.smooth_transpose(omega).array()).matrix();
    return node_functional(g);
  }

private:
  LinearSmoothing smoothing_;
};

struct TikhonovParams
{
  double alpha = 1.0;
  double q = 2.0;

  TikhonovParams() = default;
  TikhonovParams(double a, double exponent) : alpha(a), q(exponent)
  {
    require(alpha > 0.0, ErrorKind::invalid_argument, "alpha must be positive");
    require(q >= 1.0, ErrorKind::invalid_argument, "residual exponent must be at least 1");
  }
};

/// 𝒯_α(u; v^δ) = ‖K(u) − v^δ‖^q + α ℛ(u)
inline double tikhonov_value(const ForwardOperator& op, const Regularizer& reg, const TikhonovParams& params,
                             const GridField& u, const DataVector& vdelta)
{
  const double R = eval_R(reg, u);
  if (std::isinf(R)) return infinity;
  return std::pow(data_norm(op.apply(u) - vdelta), params.q) + params.alpha * R;
}

enum class SolverMethod { gradient_descent, lbfgs };

struct SolverConfig
{
  SolverMethod method = SolverMethod::gradient_descent;
  std::size_t max_iters = 100000;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  double min_step = 1e-20;
  int lbfgs_memory = 8;
  /// Accepted steps without a strict decrease before giving up.
  std::size_t stagnation_limit = 200;
};

enum class SolverStatus { converged, max_iterations, stalled };

inline const char* to_string(SolverStatus s)
{
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iterations: return "max-iterations";
    case SolverStatus::stalled: return "stalled";
  }
  return "unknown";
}

struct SolverIterate
{
  std::size_t iter;
  double objective;
  double grad_norm;
  double step;
};

struct SolverResult
{
  GridField u;
  SolverStatus status = SolverStatus::max_iterations;
  std::size_t iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::string diagnostic;
};

/// Node-coordinate gradient of 𝒯_α for q = 2:
/// ∂𝒯/∂u_i = w_i · collapse(2 K'(u)^#(K(u) − v) + α ℛ'(u))_i.
inline Eigen::VectorXd tikhonov_gradient(const ForwardOperator& op, const Regularizer& reg, double alpha,
                                         const GridField& u, const DataVector& vdelta)
{
  const DualElement total =
    2.0 * op.derivative_adjoint_apply(u, op.apply(u) - vdelta) + alpha * gateaux_R(reg, u);
  Eigen::VectorXd g = collapse(total);
  const auto& w = u.domain().node_weights();
  const int N = u.components();
  for (Eigen::Index i = 0; i < w.size(); ++i) g.segment(i * N, N) *= w(i);
  return g;
}

/**
 * Minimises 𝒯_α with q = 2 by a descent method with Armijo backtracking.
 * Gradient steps start from the Barzilai-Borwein length sᵀs/sᵀy of the
 * previous step (twice the previous accepted step when that is unusable).
 *
 * Every accepted step decreases the objective. Returns with status
 * `stalled` if backtracking cannot find a decrease or the objective stops
 * decreasing at rounding level; throws invalid_start if
 * the objective is not finite at `init`. An optional callback receives one
 * row per accepted iterate.
 */
inline SolverResult minimize_tikhonov(const ForwardOperator& op, const Regularizer& reg, const TikhonovParams& params,
                                      const DataVector& vdelta, const GridField& init, const SolverConfig& cfg = {},
                                      const std::function<void(const SolverIterate&)>& on_iterate = {})
{
  require(params.q == 2.0, ErrorKind::invalid_argument, "the built-in solver supports q = 2 only");
  SolverResult res;
  res.u = init;
  double J = tikhonov_value(op, reg, params, init, vdelta);
  require(std::isfinite(J), ErrorKind::invalid_start, "Tikhonov functional is not finite at the initial guess");

  Eigen::VectorXd g = tikhonov_gradient(op, reg, params.alpha, res.u, vdelta);
  double step = cfg.initial_step;
  double bb_step = 0.0;
  std::size_t flat_steps = 0;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;
  if (on_iterate) on_iterate({0, J, g.norm(), 0.0});

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    if (g.norm() <= cfg.grad_tol) {
      res.status = SolverStatus::converged;
      res.iterations = it - 1;
      res.objective = J;
      res.grad_norm = g.norm();
      return res;
    }

    Eigen::VectorXd dir = -g;
    bool quasi_newton = false;
    if (cfg.method == SolverMethod::lbfgs && !history.empty()) {
      // two-loop recursion
      Eigen::VectorXd q = g;
      std::vector<double> a(history.size());
      for (std::size_t k = history.size(); k-- > 0;) {
        const auto& [s, y] = history[k];
        a[k] = s.dot(q) / y.dot(s);
        q -= a[k] * y;
      }
      const auto& [s_last, y_last] = history.back();
      q *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t k = 0; k < history.size(); ++k) {
        const auto& [s, y] = history[k];
        q += (a[k] - y.dot(q) / y.dot(s)) * s;
      }
      if (q.dot(g) > 0.0) {
        dir = -q;
        quasi_newton = true;
      } else {
        history.clear();
      }
    }

    const double slope = dir.dot(g);
    double t = quasi_newton ? 1.0 : std::min(2.0 * step, 1e12);
    if (!quasi_newton && bb_step > 0.0) t = bb_step;
    GridField trial = res.u;
    double Jt = infinity;
    while (t >= cfg.min_step) {
      trial = GridField(res.u.domain(), res.u.components(), res.u.values() + t * dir);
      Jt = tikhonov_value(op, reg, params, trial, vdelta);
      if (std::isfinite(Jt) && Jt <= J + cfg.armijo * t * slope) break;
      t *= cfg.shrink;
    }
    if (!(t >= cfg.min_step) || !(Jt <= J)) {
      if (quasi_newton) {
        history.clear();
        --it;
        continue;
      }
      res.status = SolverStatus::stalled;
      res.iterations = it - 1;
      res.objective = J;
      res.grad_norm = g.norm();
      res.diagnostic = "line search failed at iteration " + std::to_string(it);
      return res;
    }

    Eigen::VectorXd g_new = tikhonov_gradient(op, reg, params.alpha, trial, vdelta);
    {
      Eigen::VectorXd s = trial.values() - res.u.values();
      Eigen::VectorXd y = g_new - g;
      const double sy = s.dot(y);
      bb_step = sy > 0.0 ? std::min(s.squaredNorm() / sy, 1e12) : 0.0;
      if (cfg.method == SolverMethod::lbfgs && sy > 1e-14 * s.norm() * y.norm()) {
        history.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(history.size()) > cfg.lbfgs_memory) history.pop_front();
      }
    }
    if (!quasi_newton) step = t;
    flat_steps = Jt < J ? 0 : flat_steps + 1;
    res.u = std::move(trial);
    J = Jt;
    g = std::move(g_new);
    if (on_iterate) on_iterate({it, J, g.norm(), t});
    if (flat_steps >= cfg.stagnation_limit && g.norm() > cfg.grad_tol) {
      res.status = SolverStatus::stalled;
      res.iterations = it;
      res.objective = J;
      res.grad_norm = g.norm();
      res.diagnostic = "objective stagnated at rounding level with gradient norm " + std::to_string(g.norm());
      return res;
    }
  }
  res.status = g.norm() <= cfg.grad_tol ? SolverStatus::converged : SolverStatus::max_iterations;
  res.iterations = cfg.max_iters;
  res.objective = J;
  res.grad_norm = g.norm();
  return res;
}

/// v† + δ·r/‖r‖ with r standard normal from `seed`, so ‖v^δ − v†‖ = δ.
inline DataVector add_noise(const DataVector& vtrue, double delta, std::uint64_t seed)
{
  require(delta >= 0.0, ErrorKind::invalid_argument, "noise level must be nonnegative");
  if (delta == 0.0) return vtrue;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DataVector r(vtrue.size());
  for (auto& v : r) v = normal(rng);
  return vtrue + (delta / r.norm()) * r;
}

} // namespace polyreg

#endif
