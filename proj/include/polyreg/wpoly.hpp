#ifndef POLYREG_WPOLY_HPP
#define POLYREG_WPOLY_HPP

#include <polyreg/error.hpp>
#include <polyreg/field.hpp>
#include <polyreg/functional.hpp>
#include <polyreg/minors.hpp>

#include <cmath>

namespace polyreg {

/**
 * w(u) = ⟨u*, u⟩ + ⟨v*, T₂(∇u)⟩
 *
 * u* is a dual element in split form; v* holds one coefficient per minor of
 * order 2..N∧n on every cell. With v* = 0 the functional is linear and is
 * just u*.
 */
class WPolyFunctional
{
public:
  WPolyFunctional() = default;

  WPolyFunctional(DualElement ustar, MinorsField vstar) : ustar_(std::move(ustar)), vstar_(std::move(vstar))
  {
    detail::require_same_domain(ustar_.domain(), vstar_.domain());
    require(vstar_.s_min() == 2 && vstar_.s_max() == vstar_.shape().max_order(), ErrorKind::shape_mismatch,
            "v* must cover minor orders 2..N∧n");
    require(vstar_.shape().rows() == ustar_.components() && vstar_.shape().cols() == ustar_.domain().dim(),
            ErrorKind::shape_mismatch, "v* shape does not match u*");
  }

  /// w = (u*, 0)
  static WPolyFunctional linear(DualElement ustar)
  {
    const MinorsShape shape(ustar.components(), ustar.domain().dim());
    auto vstar = MinorsField::zero(ustar.domain(), shape, 2, shape.max_order());
    return WPolyFunctional(std::move(ustar), std::move(vstar));
  }

  const DualElement& ustar() const { return ustar_; }
  const MinorsField& vstar() const { return vstar_; }
  const MinorsShape& shape() const { return vstar_.shape(); }
  const GridDomain& domain() const { return ustar_.domain(); }

  bool is_linear() const { return vstar_.is_zero(); }

  friend WPolyFunctional operator+(const WPolyFunctional& a, const WPolyFunctional& b)
  {
    return WPolyFunctional(a.ustar_ + b.ustar_, MinorsField(a.domain(), a.shape(), 2, a.shape().max_order(),
                                                             a.vstar_.values() + b.vstar_.values()));
  }
  friend WPolyFunctional operator*(double s, const WPolyFunctional& a)
  {
    return WPolyFunctional(s * a.ustar_, MinorsField(a.domain(), a.shape(), 2, a.shape().max_order(),
                                                      s * a.vstar_.values()));
  }

private:
  DualElement ustar_;
  MinorsField vstar_;
};

inline double eval_w(const WPolyFunctional& w, const GridField& u)
{
  const double linear = pairing(w.ustar(), u);
  if (w.shape().tau2() == 0) return linear;
  return linear + pairing(w.vstar(), minors_of(gradient(u), w.shape(), 2));
}

/**
 * The W_poly-subgradient of ℛ at v̄ built from the integrand derivative:
 * u* = (F'_u, F'_ξ₁) and v* = F'_ξ₂, evaluated at (x, v̄, T(∇v̄)) per cell.
 *
 * Throws not_in_domain if ℛ(v̄) = +∞ and hypothesis_violated if the
 * derivative has a non-finite L^{p*} or L^{(p/s)*} norm.
 */
inline WPolyFunctional subgradient_from_integrand(const Regularizer& reg, const GridField& vbar)
{
  reg.check_field(vbar);
  const auto& dom = vbar.domain();
  const auto& shape = reg.shape();
  const int N = vbar.components();
  const int Nn = shape.entries();
  const int t2 = shape.tau2();
  const MatrixField grad = gradient(vbar);
  DualElement ustar(dom, N);
  Eigen::VectorXd vstar(static_cast<Eigen::Index>(dom.cell_count()) * t2);
  Eigen::VectorXd du_norms(static_cast<Eigen::Index>(dom.cell_count()));
  const auto& w = dom.node_weights();
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const Eigen::VectorXd xi = t_map(shape, grad.cell(c));
    const Eigen::VectorXd x = dom.cell_corner(c);
    const std::size_t node = dom.corner_node(c);
    const Eigen::VectorXd uc = vbar.node(node);
    const double f = reg.integrand().value(x, uc, xi);
    require(!std::isnan(f), ErrorKind::invalid_integrand, "integrand returned NaN");
    require(std::isfinite(f), ErrorKind::not_in_domain, "ℛ(v̄) is infinite at cell " + std::to_string(c));
    const auto der = reg.integrand().derivative(x, uc, xi);
    du_norms(static_cast<Eigen::Index>(c)) = der.du.norm();
    ustar.node_part().segment(static_cast<Eigen::Index>(node) * N, N) =
      (dom.cell_volume() / w(static_cast<Eigen::Index>(node))) * der.du;
    ustar.grad_part().segment(static_cast<Eigen::Index>(c) * Nn, Nn) = der.dxi.head(Nn);
    vstar.segment(static_cast<Eigen::Index>(c) * t2, t2) = der.dxi.tail(t2);
  }

  MinorsField vfield(dom, shape, 2, shape.max_order(), std::move(vstar));
  const double p = reg.space().p;
  const double pstar = reg.space().p_star();
  bool finite = std::isfinite(lp_norm(CellField(dom, std::move(du_norms)), pstar)) &&
                std::isfinite(lp_norm(MatrixField(dom, N, ustar.grad_part()), pstar));
  for (int s = 2; s <= shape.max_order(); ++s)
    finite = finite && std::isfinite(lp_norm(vfield, s, FunctionSpaceConfig::conjugate_exponent(p / s)));
  require(finite, ErrorKind::hypothesis_violated, "integrand derivative has no finite dual norm at v̄");
  return WPolyFunctional(std::move(ustar), std::move(vfield));
}

/// w'(u) = u* + (T₂'(∇u)ᵀ v*) on the gradient part. Returns u* unchanged
/// when v* vanishes.
inline DualElement gateaux_w(const WPolyFunctional& w, const GridField& u)
{
  detail::require_same_domain(w.domain(), u.domain());
  require(w.ustar().components() == u.components(), ErrorKind::shape_mismatch, "w and u have different N");
  if (w.is_linear()) return w.ustar();
  const auto& dom = u.domain();
  const auto& shape = w.shape();
  const int Nn = shape.entries();
  const int t2 = shape.tau2();
  const MatrixField grad = gradient(u);
  DualElement d = w.ustar();
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    auto gseg = d.grad_part().segment(static_cast<Eigen::Index>(c) * Nn, Nn);
    const Eigen::VectorXd v = w.vstar().values().segment(static_cast<Eigen::Index>(c) * t2, t2);
    add_t2_pullback(shape, grad.cell(c), v, gseg);
  }
  return d;
}

struct BregmanRecord
{
  double value = 0.0;
  double R_u = 0.0;
  double R_udag = 0.0;
  double w_u = 0.0;
  double w_udag = 0.0;
  /// v* = 0, so the value is the classical Bregman distance of u*.
  bool classical = false;
};

/// D_w(u; u†) = ℛ(u) − ℛ(u†) − w(u) + w(u†)
inline BregmanRecord bregman(const Regularizer& reg, const WPolyFunctional& w, const GridField& u, const GridField& udag)
{
  BregmanRecord r;
  r.R_u = eval_R(reg, u);
  r.R_udag = eval_R(reg, udag);
  require(std::isfinite(r.R_u) && std::isfinite(r.R_udag), ErrorKind::undefined_distance,
          "Bregman distance needs finite regularizer values");
  r.w_u = eval_w(w, u);
  r.w_udag = eval_w(w, udag);
  r.value = (r.R_u - r.R_udag) - (r.w_u - r.w_udag);
  r.classical = w.is_linear();
  return r;
}

} // namespace polyreg

#endif
