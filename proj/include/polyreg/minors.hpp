#ifndef POLYREG_MINORS_HPP
#define POLYREG_MINORS_HPP

#include <polyreg/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace polyreg {

/// Largest N∧n supported. Submatrix determinants are expanded recursively,
/// which is exact and fast up to 4x4.
inline constexpr int max_minor_order = 4;

inline long binomial(int n, int k)
{
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// A row subset and a column subset of equal size, each strictly increasing.
struct MinorIndex
{
  std::vector<int> rows;
  std::vector<int> cols;

  friend bool operator==(const MinorIndex&, const MinorIndex&) = default;
};

namespace detail {

inline std::vector<std::vector<int>> combinations(int n, int k)
{
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

// Lexicographic rank of an increasing k-subset of {0..n-1}.
inline long combination_rank(const std::vector<int>& c, int n)
{
  const int k = static_cast<int>(c.size());
  long rank = 0;
  int prev = -1;
  for (int i = 0; i < k; ++i) {
    for (int v = prev + 1; v < c[i]; ++v) rank += binomial(n - v - 1, k - i - 1);
    prev = c[i];
  }
  return rank;
}

// Determinant of A[rows, cols] by Laplace expansion along the first row.
inline double submatrix_det(const Eigen::MatrixXd& A, const int* rows, const int* cols, int s)
{
  switch (s) {
    case 0: return 1.0;
    case 1: return A(rows[0], cols[0]);
    case 2:
      return A(rows[0], cols[0]) * A(rows[1], cols[1]) - A(rows[0], cols[1]) * A(rows[1], cols[0]);
    default: break;
  }
  int sub_cols[max_minor_order];
  double det = 0.0;
  for (int b = 0; b < s; ++b) {
    int k = 0;
    for (int j = 0; j < s; ++j)
      if (j != b) sub_cols[k++] = cols[j];
    const double cof = submatrix_det(A, rows + 1, sub_cols, s - 1);
    det += ((b % 2 == 0) ? 1.0 : -1.0) * A(rows[0], cols[b]) * cof;
  }
  return det;
}

} // namespace detail

/// Dimension bookkeeping for the minors of an N x n matrix, together with
/// the fixed enumeration of s x s submatrices for each order s.
///
/// Order s minors are listed row-subset major, column-subset minor, both
/// subsets in lexicographic order; entries are plain determinants with no
/// cofactor sign. At s = 1 this is the row-major flattening of A.
class MinorsShape
{
public:
  MinorsShape() = default;

  MinorsShape(int N, int n) : N_(N), n_(n)
  {
    require(N >= 1 && n >= 1, ErrorKind::invalid_argument, "matrix dimensions must be positive");
    order_ = std::min(N, n);
    require(order_ <= max_minor_order, ErrorKind::invalid_argument,
            "N∧n = " + std::to_string(order_) + " exceeds the supported limit of 4");
    offsets_.assign(order_ + 2, 0);
    for (int s = 1; s <= order_; ++s) {
      const auto rs = detail::combinations(N, s);
      const auto cs = detail::combinations(n, s);
      std::vector<MinorIndex> list;
      list.reserve(rs.size() * cs.size());
      for (const auto& r : rs)
        for (const auto& c : cs) list.push_back({r, c});
      sigma_.push_back(static_cast<int>(list.size()));
      offsets_[s + 1] = offsets_[s] + static_cast<int>(list.size());
      enumeration_.push_back(std::move(list));
    }
    offsets_[0] = 0;
  }

  int rows() const { return N_; }
  int cols() const { return n_; }
  /// N ∧ n
  int max_order() const { return order_; }
  int entries() const { return N_ * n_; }

  /// σ(s) = C(n,s)·C(N,s)
  int sigma(int s) const
  {
    check_order(s);
    return sigma_[s - 1];
  }
  int tau() const { return offsets_[order_ + 1]; }
  int tau2() const { return tau() - entries(); }

  /// Position of the order-s block inside T(A).
  int offset(int s) const
  {
    check_order(s);
    return offsets_[s];
  }

  const MinorIndex& minor(int s, int k) const
  {
    check_order(s);
    require(k >= 0 && k < sigma_[s - 1], ErrorKind::invalid_argument, "minor index out of range");
    return enumeration_[s - 1][k];
  }

  int index_of(const MinorIndex& m) const
  {
    const int s = static_cast<int>(m.rows.size());
    check_order(s);
    require(m.cols.size() == m.rows.size(), ErrorKind::invalid_argument, "row and column subsets differ in size");
    const long r = detail::combination_rank(m.rows, N_);
    const long c = detail::combination_rank(m.cols, n_);
    return static_cast<int>(r * binomial(n_, s) + c);
  }

  void check_order(int s) const
  {
    require(s >= 1 && s <= order_, ErrorKind::invalid_argument,
            "minor order " + std::to_string(s) + " outside 1.." + std::to_string(order_));
  }

  void check_matrix(const Eigen::MatrixXd& A) const
  {
    require(A.rows() == N_ && A.cols() == n_, ErrorKind::shape_mismatch,
            "matrix is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) + ", expected " +
              std::to_string(N_) + "x" + std::to_string(n_));
  }

  friend bool operator==(const MinorsShape& a, const MinorsShape& b) { return a.N_ == b.N_ && a.n_ == b.n_; }

private:
  int N_ = 0;
  int n_ = 0;
  int order_ = 0;
  std::vector<int> sigma_;
  std::vector<int> offsets_;
  std::vector<std::vector<MinorIndex>> enumeration_;
};

/// Row-major flattening of an N x n matrix.
inline Eigen::VectorXd flatten(const Eigen::MatrixXd& A)
{
  Eigen::VectorXd v(A.size());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) v(i * A.cols() + j) = A(i, j);
  return v;
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int N, int n)
{
  require(v.size() == static_cast<Eigen::Index>(N) * n, ErrorKind::shape_mismatch, "flattened size mismatch");
  Eigen::MatrixXd A(N, n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = v(i * n + j);
  return A;
}

/// All s x s minors of A, in the order fixed by MinorsShape.
inline Eigen::VectorXd adj(const MinorsShape& shape, const Eigen::MatrixXd& A, int s)
{
  shape.check_matrix(A);
  shape.check_order(s);
  Eigen::VectorXd out(shape.sigma(s));
  for (int k = 0; k < shape.sigma(s); ++k) {
    const auto& m = shape.minor(s, k);
    out(k) = detail::submatrix_det(A, m.rows.data(), m.cols.data(), s);
  }
  return out;
}

inline Eigen::VectorXd adj(const Eigen::MatrixXd& A, int s)
{
  return adj(MinorsShape(static_cast<int>(A.rows()), static_cast<int>(A.cols())), A, s);
}

/// T(A) = (A, adj_2 A, ..., adj_{N∧n} A)
inline Eigen::VectorXd t_map(const MinorsShape& shape, const Eigen::MatrixXd& A)
{
  shape.check_matrix(A);
  Eigen::VectorXd out(shape.tau());
  out.head(shape.entries()) = flatten(A);
  for (int s = 2; s <= shape.max_order(); ++s) out.segment(shape.offset(s), shape.sigma(s)) = adj(shape, A, s);
  return out;
}

inline Eigen::VectorXd t_map(const Eigen::MatrixXd& A)
{
  return t_map(MinorsShape(static_cast<int>(A.rows()), static_cast<int>(A.cols())), A);
}

/// T_2(A) = (adj_2 A, ..., adj_{N∧n} A); empty when N∧n = 1.
inline Eigen::VectorXd t2_map(const MinorsShape& shape, const Eigen::MatrixXd& A)
{
  shape.check_matrix(A);
  Eigen::VectorXd out(shape.tau2());
  for (int s = 2; s <= shape.max_order(); ++s)
    out.segment(shape.offset(s) - shape.entries(), shape.sigma(s)) = adj(shape, A, s);
  return out;
}

inline Eigen::VectorXd t2_map(const Eigen::MatrixXd& A)
{
  return t2_map(MinorsShape(static_cast<int>(A.rows()), static_cast<int>(A.cols())), A);
}

/// Exact Jacobian of adj_s with respect to the row-major entries of A.
///
/// The derivative of det A[R, C] with respect to A(R_a, C_b) is the signed
/// complementary minor (-1)^(a+b) det A[R\R_a, C\C_b]; every other entry of
/// A leaves the minor unchanged.
inline Eigen::MatrixXd adj_jacobian(const MinorsShape& shape, const Eigen::MatrixXd& A, int s)
{
  shape.check_matrix(A);
  shape.check_order(s);
  const int n = shape.cols();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(shape.sigma(s), shape.entries());
  int sub_rows[max_minor_order];
  int sub_cols[max_minor_order];
  for (int k = 0; k < shape.sigma(s); ++k) {
    const auto& m = shape.minor(s, k);
    for (int a = 0; a < s; ++a) {
      int kr = 0;
      for (int i = 0; i < s; ++i)
        if (i != a) sub_rows[kr++] = m.rows[i];
      for (int b = 0; b < s; ++b) {
        int kc = 0;
        for (int j = 0; j < s; ++j)
          if (j != b) sub_cols[kc++] = m.cols[j];
        const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
        J(k, m.rows[a] * n + m.cols[b]) = sign * detail::submatrix_det(A, sub_rows, sub_cols, s - 1);
      }
    }
  }
  return J;
}

inline Eigen::MatrixXd adj_jacobian(const Eigen::MatrixXd& A, int s)
{
  return adj_jacobian(MinorsShape(static_cast<int>(A.rows()), static_cast<int>(A.cols())), A, s);
}

/// Vertical stack of adj_jacobian for s = 2..N∧n, a τ₂ x (N·n) matrix.
inline Eigen::MatrixXd t2_jacobian(const MinorsShape& shape, const Eigen::MatrixXd& A)
{
  shape.check_matrix(A);
  Eigen::MatrixXd J(shape.tau2(), shape.entries());
  for (int s = 2; s <= shape.max_order(); ++s)
    J.middleRows(shape.offset(s) - shape.entries(), shape.sigma(s)) = adj_jacobian(shape, A, s);
  return J;
}

inline Eigen::MatrixXd t2_jacobian(const Eigen::MatrixXd& A)
{
  return t2_jacobian(MinorsShape(static_cast<int>(A.rows()), static_cast<int>(A.cols())), A);
}

} // namespace polyreg

#endif
