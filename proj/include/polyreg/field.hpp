#ifndef POLYREG_FIELD_HPP
#define POLYREG_FIELD_HPP

#include <polyreg/error.hpp>
#include <polyreg/minors.hpp>
#include <polyreg/summation.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace polyreg {

/**
 * Uniform grid over an axis-aligned box in R^n.
 *
 * Axis a is split into resolution(a) cells, giving resolution(a)+1 nodes.
 * Nodes and cells are both numbered with axis 0 varying fastest. Each cell
 * is identified with its lower corner node.
 */
class GridDomain
{
public:
  GridDomain() = default;

  GridDomain(std::vector<double> lo, std::vector<double> hi, std::vector<int> resolution)
    : lo_(std::move(lo)), hi_(std::move(hi)), res_(std::move(resolution))
  {
    require(!res_.empty(), ErrorKind::invalid_argument, "grid needs at least one axis");
    require(lo_.size() == res_.size() && hi_.size() == res_.size(), ErrorKind::invalid_argument,
            "bounds and resolution disagree on the dimension");
    const int n = dim();
    node_stride_.assign(n, 1);
    cell_stride_.assign(n, 1);
    for (int a = 0; a < n; ++a) {
      require(res_[a] >= 2, ErrorKind::invalid_argument, "resolution must be at least 2 per axis");
      require(std::isfinite(lo_[a]) && std::isfinite(hi_[a]) && hi_[a] > lo_[a], ErrorKind::invalid_argument,
              "axis bounds must satisfy lo < hi");
      if (a > 0) {
        node_stride_[a] = node_stride_[a - 1] * static_cast<std::size_t>(res_[a - 1] + 1);
        cell_stride_[a] = cell_stride_[a - 1] * static_cast<std::size_t>(res_[a - 1]);
      }
    }
    nodes_ = node_stride_[n - 1] * static_cast<std::size_t>(res_[n - 1] + 1);
    cells_ = cell_stride_[n - 1] * static_cast<std::size_t>(res_[n - 1]);
    cell_volume_ = 1.0;
    for (int a = 0; a < n; ++a) cell_volume_ *= spacing(a);
    node_weights_.resize(static_cast<Eigen::Index>(nodes_));
    for (std::size_t i = 0; i < nodes_; ++i) {
      double w = cell_volume_;
      for (int a = 0; a < n; ++a) {
        const int k = node_coordinate(i, a);
        if (k == 0 || k == res_[a]) w *= 0.5;
      }
      node_weights_(static_cast<Eigen::Index>(i)) = w;
    }
  }

  /// Unit box [0,1]^n with m cells per axis.
  static GridDomain unit(int n, int m)
  {
    return GridDomain(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<int>(n, m));
  }

  int dim() const { return static_cast<int>(res_.size()); }
  int resolution(int axis) const { return res_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double spacing(int axis) const { return (hi_[axis] - lo_[axis]) / res_[axis]; }
  double cell_volume() const { return cell_volume_; }
  std::size_t node_count() const { return nodes_; }
  std::size_t cell_count() const { return cells_; }
  std::size_t node_stride(int axis) const { return node_stride_[axis]; }

  int node_coordinate(std::size_t node, int axis) const
  {
    return static_cast<int>((node / node_stride_[axis]) % static_cast<std::size_t>(res_[axis] + 1));
  }

  int cell_coordinate(std::size_t cell, int axis) const
  {
    return static_cast<int>((cell / cell_stride_[axis]) % static_cast<std::size_t>(res_[axis]));
  }

  std::size_t corner_node(std::size_t cell) const
  {
    std::size_t node = 0;
    for (int a = 0; a < dim(); ++a) node += static_cast<std::size_t>(cell_coordinate(cell, a)) * node_stride_[a];
    return node;
  }

  Eigen::VectorXd node_position(std::size_t node) const
  {
    Eigen::VectorXd x(dim());
    for (int a = 0; a < dim(); ++a) x(a) = lo_[a] + spacing(a) * node_coordinate(node, a);
    return x;
  }

  Eigen::VectorXd cell_corner(std::size_t cell) const { return node_position(corner_node(cell)); }

  Eigen::VectorXd cell_center(std::size_t cell) const
  {
    Eigen::VectorXd x(dim());
    for (int a = 0; a < dim(); ++a) x(a) = lo_[a] + spacing(a) * (cell_coordinate(cell, a) + 0.5);
    return x;
  }

  /// Trapezoidal quadrature weights of the nodes; they sum to the box volume.
  const Eigen::VectorXd& node_weights() const { return node_weights_; }

  double volume() const { return cell_volume_ * static_cast<double>(cells_); }

  friend bool operator==(const GridDomain& a, const GridDomain& b)
  {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.res_ == b.res_;
  }

private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<int> res_;
  std::vector<std::size_t> node_stride_;
  std::vector<std::size_t> cell_stride_;
  std::size_t nodes_ = 0;
  std::size_t cells_ = 0;
  double cell_volume_ = 0.0;
  Eigen::VectorXd node_weights_;
};

/// Target dimension N and Sobolev exponent p of U = W^{1,p}(Ω, R^N).
struct FunctionSpaceConfig
{
  int N = 1;
  double p = 2.0;

  FunctionSpaceConfig() = default;

  FunctionSpaceConfig(int components, double exponent, int spatial_dim) : N(components), p(exponent)
  {
    require(N >= 1, ErrorKind::invalid_argument, "N must be positive");
    require(p >= 1.0, ErrorKind::invalid_argument, "Sobolev exponent must be at least 1");
    require(p >= std::min(N, spatial_dim), ErrorKind::invalid_argument,
            "Sobolev exponent must satisfy p >= N∧n");
  }

  double p_star() const { return conjugate_exponent(p); }

  static double conjugate_exponent(double q)
  {
    if (q == 1.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(q)) return 1.0;
    return q / (q - 1.0);
  }
};

namespace detail {

inline void require_finite(const Eigen::VectorXd& v, const char* what)
{
  require(v.allFinite(), ErrorKind::invalid_input, std::string(what) + " contains non-finite values");
}

inline void require_same_domain(const GridDomain& a, const GridDomain& b)
{
  require(a == b, ErrorKind::shape_mismatch, "fields live on different grids");
}

} // namespace detail

/// Node-sampled vector field u: Ω → R^N.
class GridField
{
public:
  GridField() = default;

  GridField(GridDomain domain, int components)
    : domain_(std::move(domain)), N_(components),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_.node_count()) * components))
  {
    require(N_ >= 1, ErrorKind::invalid_argument, "field needs at least one component");
  }

  GridField(GridDomain domain, int components, Eigen::VectorXd values)
    : domain_(std::move(domain)), N_(components), values_(std::move(values))
  {
    require(N_ >= 1, ErrorKind::invalid_argument, "field needs at least one component");
    require(values_.size() == static_cast<Eigen::Index>(domain_.node_count()) * N_, ErrorKind::shape_mismatch,
            "field value count does not match grid");
    detail::require_finite(values_, "field");
  }

  template <typename Fn>
  static GridField sample(const GridDomain& domain, int components, Fn&& fn)
  {
    Eigen::VectorXd v(static_cast<Eigen::Index>(domain.node_count()) * components);
    for (std::size_t i = 0; i < domain.node_count(); ++i) {
      const Eigen::VectorXd val = fn(domain.node_position(i));
      v.segment(static_cast<Eigen::Index>(i) * components, components) = val;
    }
    return GridField(domain, components, std::move(v));
  }

  const GridDomain& domain() const { return domain_; }
  int components() const { return N_; }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::VectorXd node(std::size_t i) const { return values_.segment(static_cast<Eigen::Index>(i) * N_, N_); }
  double at(std::size_t i, int comp) const { return values_(static_cast<Eigen::Index>(i) * N_ + comp); }

  friend GridField operator+(const GridField& a, const GridField& b)
  {
    check_compatible(a, b);
    return GridField(a.domain_, a.N_, a.values_ + b.values_);
  }
  friend GridField operator-(const GridField& a, const GridField& b)
  {
    check_compatible(a, b);
    return GridField(a.domain_, a.N_, a.values_ - b.values_);
  }
  friend GridField operator*(double s, const GridField& a) { return GridField(a.domain_, a.N_, s * a.values_); }

  /// a + s·b without an intermediate field.
  static GridField axpy(const GridField& a, double s, const GridField& b)
  {
    check_compatible(a, b);
    return GridField(a.domain_, a.N_, a.values_ + s * b.values_);
  }

  static void check_compatible(const GridField& a, const GridField& b)
  {
    detail::require_same_domain(a.domain_, b.domain_);
    require(a.N_ == b.N_, ErrorKind::shape_mismatch, "fields have different component counts");
  }

private:
  GridDomain domain_;
  int N_ = 0;
  Eigen::VectorXd values_;
};

/// One scalar per cell.
class CellField
{
public:
  CellField() = default;
  CellField(GridDomain domain, Eigen::VectorXd values) : domain_(std::move(domain)), values_(std::move(values))
  {
    require(values_.size() == static_cast<Eigen::Index>(domain_.cell_count()), ErrorKind::shape_mismatch,
            "cell field size does not match grid");
  }
  static CellField constant(const GridDomain& domain, double c)
  {
    return CellField(domain, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(domain.cell_count()), c));
  }
  template <typename Fn>
  static CellField sample(const GridDomain& domain, Fn&& fn)
  {
    Eigen::VectorXd v(static_cast<Eigen::Index>(domain.cell_count()));
    for (std::size_t c = 0; c < domain.cell_count(); ++c) v(static_cast<Eigen::Index>(c)) = fn(domain.cell_corner(c));
    return CellField(domain, std::move(v));
  }

  const GridDomain& domain() const { return domain_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t c) const { return values_(static_cast<Eigen::Index>(c)); }

private:
  GridDomain domain_;
  Eigen::VectorXd values_;
};

/// One N x n matrix per cell, stored row-major.
class MatrixField
{
public:
  MatrixField() = default;
  MatrixField(GridDomain domain, int N, Eigen::VectorXd values)
    : domain_(std::move(domain)), N_(N), values_(std::move(values))
  {
    require(values_.size() == static_cast<Eigen::Index>(domain_.cell_count()) * N_ * domain_.dim(),
            ErrorKind::shape_mismatch, "matrix field size does not match grid");
  }

  const GridDomain& domain() const { return domain_; }
  int rows() const { return N_; }
  int cols() const { return domain_.dim(); }
  int block() const { return N_ * domain_.dim(); }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::MatrixXd cell(std::size_t c) const
  {
    return unflatten(values_.segment(static_cast<Eigen::Index>(c) * block(), block()), N_, cols());
  }
  Eigen::VectorXd cell_flat(std::size_t c) const
  {
    return values_.segment(static_cast<Eigen::Index>(c) * block(), block());
  }

private:
  GridDomain domain_;
  int N_ = 0;
  Eigen::VectorXd values_;
};

/**
 * Per-cell minors of orders s_min..s_max, concatenated in increasing order.
 *
 * With (1, N∧n) this holds T(∇u); with (2, N∧n) it holds T₂(∇u), or an
 * element of the dual of S₂ when it carries coefficients v*.
 */
class MinorsField
{
public:
  MinorsField() = default;
  MinorsField(GridDomain domain, MinorsShape shape, int s_min, int s_max, Eigen::VectorXd values)
    : domain_(std::move(domain)), shape_(std::move(shape)), s_min_(s_min), s_max_(s_max), values_(std::move(values))
  {
    require(s_min_ >= 1 && s_min_ <= s_max_ + 1 && s_max_ <= shape_.max_order(), ErrorKind::invalid_argument,
            "invalid minor order range");
    width_ = 0;
    for (int s = s_min_; s <= s_max_; ++s) width_ += shape_.sigma(s);
    require(values_.size() == static_cast<Eigen::Index>(domain_.cell_count()) * width_, ErrorKind::shape_mismatch,
            "minors field size does not match grid and shape");
  }

  static MinorsField zero(const GridDomain& domain, const MinorsShape& shape, int s_min, int s_max)
  {
    int width = 0;
    for (int s = s_min; s <= s_max; ++s) width += shape.sigma(s);
    return MinorsField(domain, shape, s_min, s_max,
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.cell_count()) * width));
  }

  const GridDomain& domain() const { return domain_; }
  const MinorsShape& shape() const { return shape_; }
  int s_min() const { return s_min_; }
  int s_max() const { return s_max_; }
  int width() const { return width_; }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::VectorXd cell(std::size_t c) const
  {
    return values_.segment(static_cast<Eigen::Index>(c) * width_, width_);
  }

  /// Offset of the order-s block inside one cell's vector.
  int block_offset(int s) const
  {
    require(s >= s_min_ && s <= s_max_, ErrorKind::invalid_argument, "order not stored in this minors field");
    int off = 0;
    for (int k = s_min_; k < s; ++k) off += shape_.sigma(k);
    return off;
  }

  bool is_zero() const { return values_.size() == 0 || (values_.array() == 0.0).all(); }

private:
  GridDomain domain_;
  MinorsShape shape_;
  int s_min_ = 1;
  int s_max_ = 0;
  int width_ = 0;
  Eigen::VectorXd values_;
};

/**
 * Element of the discrete dual U* in split form.
 *
 * Acts on u through
 *   Σ_nodes w_i node_i·u_i + |cell| Σ_cells grad_c·∇u_c
 * where w_i are the trapezoidal node weights. Integrands only see the value
 * of u at a cell's lower corner, so their u-part sits on corner nodes,
 * rescaled by |cell|/w_i.
 */
class DualElement
{
public:
  DualElement() = default;

  DualElement(GridDomain domain, int N)
    : domain_(std::move(domain)), N_(N),
      node_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_.node_count()) * N)),
      grad_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_.cell_count()) * N * domain_.dim()))
  {}

  DualElement(GridDomain domain, int N, Eigen::VectorXd node_part, Eigen::VectorXd grad_part)
    : domain_(std::move(domain)), N_(N), node_(std::move(node_part)), grad_(std::move(grad_part))
  {
    require(node_.size() == static_cast<Eigen::Index>(domain_.node_count()) * N_, ErrorKind::shape_mismatch,
            "dual node part size mismatch");
    require(grad_.size() == static_cast<Eigen::Index>(domain_.cell_count()) * N_ * domain_.dim(),
            ErrorKind::shape_mismatch, "dual gradient part size mismatch");
  }

  const GridDomain& domain() const { return domain_; }
  int components() const { return N_; }
  const Eigen::VectorXd& node_part() const { return node_; }
  const Eigen::VectorXd& grad_part() const { return grad_; }
  Eigen::VectorXd& node_part() { return node_; }
  Eigen::VectorXd& grad_part() { return grad_; }

  friend DualElement operator+(const DualElement& a, const DualElement& b)
  {
    check_compatible(a, b);
    return DualElement(a.domain_, a.N_, a.node_ + b.node_, a.grad_ + b.grad_);
  }
  friend DualElement operator-(const DualElement& a, const DualElement& b)
  {
    check_compatible(a, b);
    return DualElement(a.domain_, a.N_, a.node_ - b.node_, a.grad_ - b.grad_);
  }
  friend DualElement operator*(double s, const DualElement& a)
  {
    return DualElement(a.domain_, a.N_, s * a.node_, s * a.grad_);
  }

  static void check_compatible(const DualElement& a, const DualElement& b)
  {
    detail::require_same_domain(a.domain_, b.domain_);
    require(a.N_ == b.N_, ErrorKind::shape_mismatch, "dual elements have different component counts");
  }

private:
  GridDomain domain_;
  int N_ = 0;
  Eigen::VectorXd node_;
  Eigen::VectorXd grad_;
};

/// Per-cell forward-difference Jacobian; column j is the difference along
/// axis j from the cell's lower corner. Exact for affine fields.
inline MatrixField gradient(const GridField& u)
{
  const auto& dom = u.domain();
  const int N = u.components();
  const int n = dom.dim();
  Eigen::VectorXd out(static_cast<Eigen::Index>(dom.cell_count()) * N * n);
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const std::size_t base = dom.corner_node(c);
    for (int j = 0; j < n; ++j) {
      const std::size_t shifted = base + dom.node_stride(j);
      const double h = dom.spacing(j);
      for (int i = 0; i < N; ++i)
        out(static_cast<Eigen::Index>(c) * N * n + i * n + j) = (u.at(shifted, i) - u.at(base, i)) / h;
    }
  }
  return MatrixField(dom, N, std::move(out));
}

/// Transpose of `gradient` with respect to the Euclidean inner products on
/// node values and on cell matrices.
inline Eigen::VectorXd gradient_transpose(const GridDomain& dom, int N, const Eigen::VectorXd& cell_matrices)
{
  const int n = dom.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dom.node_count()) * N);
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const std::size_t base = dom.corner_node(c);
    for (int j = 0; j < n; ++j) {
      const std::size_t shifted = base + dom.node_stride(j);
      const double h = dom.spacing(j);
      for (int i = 0; i < N; ++i) {
        const double g = cell_matrices(static_cast<Eigen::Index>(c) * N * n + i * n + j) / h;
        out(static_cast<Eigen::Index>(shifted) * N + i) += g;
        out(static_cast<Eigen::Index>(base) * N + i) -= g;
      }
    }
  }
  return out;
}

/// T(∇u) (s_min = 1) or T₂(∇u) (s_min = 2) on every cell.
inline MinorsField minors_of(const MatrixField& grad, const MinorsShape& shape, int s_min)
{
  const auto& dom = grad.domain();
  const int s_max = shape.max_order();
  auto result = MinorsField::zero(dom, shape, s_min, s_max);
  Eigen::VectorXd values(result.values().size());
  const int width = result.width();
  for (std::size_t c = 0; c < dom.cell_count(); ++c) {
    const Eigen::MatrixXd A = grad.cell(c);
    int off = 0;
    for (int s = s_min; s <= s_max; ++s) {
      values.segment(static_cast<Eigen::Index>(c) * width + off, shape.sigma(s)) =
        (s == 1) ? flatten(A) : adj(shape, A, s);
      off += shape.sigma(s);
    }
  }
  return MinorsField(dom, shape, s_min, s_max, std::move(values));
}

/// Cell quadrature: |cell|·Σ g.
inline double integrate(const CellField& g)
{
  require(g.values().allFinite(), ErrorKind::invalid_input, "integrand field has non-finite cells");
  const auto& v = g.values();
  return g.domain().cell_volume() * compensated_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

namespace detail {

// (Σ w_k |block_k|^q)^{1/q} over consecutive blocks of `width` entries;
// q = ∞ gives the max block norm.
inline double weighted_block_norm(const Eigen::VectorXd& values, int width, const Eigen::VectorXd& weights, double q)
{
  require(q >= 1.0, ErrorKind::invalid_argument, "norm exponent must be at least 1");
  const Eigen::Index blocks = weights.size();
  if (std::isinf(q)) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < blocks; ++k) m = std::max(m, values.segment(k * width, width).norm());
    return m;
  }
  CompensatedSum acc;
  for (Eigen::Index k = 0; k < blocks; ++k) {
    const double b = values.segment(k * width, width).norm();
    if (b != 0.0) acc.add(weights(k) * std::pow(b, q));
  }
  return std::pow(acc.value(), 1.0 / q);
}

inline Eigen::VectorXd cell_weights(const GridDomain& dom)
{
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dom.cell_count()), dom.cell_volume());
}

} // namespace detail

/// Discrete L^q norm of |u(x)| with trapezoidal node weights.
inline double lp_norm(const GridField& u, double q)
{
  return detail::weighted_block_norm(u.values(), u.components(), u.domain().node_weights(), q);
}

/// Discrete L^q norm of the Frobenius norm of each cell matrix.
inline double lp_norm(const MatrixField& m, double q)
{
  return detail::weighted_block_norm(m.values(), m.block(), detail::cell_weights(m.domain()), q);
}

inline double lp_norm(const CellField& g, double q)
{
  return detail::weighted_block_norm(g.values(), 1, detail::cell_weights(g.domain()), q);
}

/// Discrete L^q norm of the order-s block of a minors field.
inline double lp_norm(const MinorsField& f, int s, double q)
{
  const int off = f.block_offset(s);
  const int sig = f.shape().sigma(s);
  const auto& dom = f.domain();
  Eigen::VectorXd block(static_cast<Eigen::Index>(dom.cell_count()) * sig);
  for (std::size_t c = 0; c < dom.cell_count(); ++c)
    block.segment(static_cast<Eigen::Index>(c) * sig, sig) =
      f.values().segment(static_cast<Eigen::Index>(c) * f.width() + off, sig);
  return detail::weighted_block_norm(block, sig, detail::cell_weights(dom), q);
}

/// (‖u‖_p^p + ‖∇u‖_p^p)^{1/p}
inline double sobolev_norm(const GridField& u, double p)
{
  require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument, "Sobolev exponent must be finite and >= 1");
  const double a = lp_norm(u, p);
  const double b = lp_norm(gradient(u), p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

/// ⟨d, u⟩ for d ∈ U*.
inline double pairing(const DualElement& d, const GridField& u)
{
  detail::require_same_domain(d.domain(), u.domain());
  require(d.components() == u.components(), ErrorKind::shape_mismatch, "dual and primal component counts differ");
  const auto& dom = u.domain();
  const int N = u.components();
  const auto& w = dom.node_weights();
  CompensatedSum acc;
  for (std::size_t i = 0; i < dom.node_count(); ++i)
    for (int k = 0; k < N; ++k) {
      const auto idx = static_cast<Eigen::Index>(i) * N + k;
      acc.add(w(static_cast<Eigen::Index>(i)) * d.node_part()(idx) * u.values()(idx));
    }
  const MatrixField g = gradient(u);
  CompensatedSum cells;
  for (Eigen::Index k = 0; k < g.values().size(); ++k) cells.add(d.grad_part()(k) * g.values()(k));
  return acc.value() + dom.cell_volume() * cells.value();
}

/// ⟨v*, ξ⟩ = |cell| Σ_cells v*·ξ for minors fields over the same orders.
inline double pairing(const MinorsField& dual, const MinorsField& primal)
{
  detail::require_same_domain(dual.domain(), primal.domain());
  require(dual.shape() == primal.shape() && dual.s_min() == primal.s_min() && dual.s_max() == primal.s_max(),
          ErrorKind::shape_mismatch, "minors fields cover different orders");
  const auto& a = dual.values();
  const auto& b = primal.values();
  return dual.domain().cell_volume() *
         compensated_dot(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                         std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

/// Node-coefficient form g of a dual element: ⟨d, u⟩ = Σ_i w_i g_i·u_i.
/// The split form is not unique; this one is.
inline Eigen::VectorXd collapse(const DualElement& d)
{
  const auto& dom = d.domain();
  const int N = d.components();
  Eigen::VectorXd g = gradient_transpose(dom, N, d.grad_part()) * dom.cell_volume();
  const auto& w = dom.node_weights();
  for (std::size_t i = 0; i < dom.node_count(); ++i)
    for (int k = 0; k < N; ++k) {
      const auto idx = static_cast<Eigen::Index>(i) * N + k;
      g(idx) = d.node_part()(idx) + g(idx) / w(static_cast<Eigen::Index>(i));
    }
  return g;
}

/// sqrt(Σ_i w_i |g_i|²) of the collapsed form.
inline double dual_norm(const DualElement& d)
{
  const Eigen::VectorXd g = collapse(d);
  const auto& w = d.domain().node_weights();
  const int N = d.components();
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < w.size(); ++i) acc.add(w(i) * g.segment(i * N, N).squaredNorm());
  return std::sqrt(acc.value());
}

} // namespace polyreg

#endif
