#ifndef POLYREG_RANDOM_HPP
#define POLYREG_RANDOM_HPP

#include <polyreg/field.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace polyreg {

/// Node values drawn i.i.d. standard normal, scaled to unit W^{1,p} norm.
inline GridField random_direction(const GridDomain& dom, int N, double p, std::mt19937_64& rng)
{
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(static_cast<Eigen::Index>(dom.node_count()) * N);
  for (auto& x : v) x = normal(rng);
  GridField d(dom, N, std::move(v));
  const double norm = sobolev_norm(d, p);
  return (1.0 / norm) * d;
}

/**
 * Smooth random field: an affine map plus a few low-frequency cosine modes
 * per component, with standard-normal coefficients scaled by `amplitude`.
 * The affine part adds `offset` times the identity when N = n, so square
 * gradients stay close to a chosen determinant.
 */
inline GridField random_smooth_field(const GridDomain& dom, int N, std::mt19937_64& rng, double amplitude = 1.0,
                                     double offset = 0.0, int modes = 3)
{
  std::normal_distribution<double> normal;
  const int n = dom.dim();
  Eigen::MatrixXd lin(N, n);
  for (auto& x : lin.reshaped()) x = amplitude * normal(rng);
  if (N == n) lin += offset * Eigen::MatrixXd::Identity(N, n);
  Eigen::VectorXd shift(N);
  for (auto& x : shift) x = amplitude * normal(rng);

  struct Mode
  {
    Eigen::VectorXd freq;
    Eigen::VectorXd coef;
    double phase;
  };
  std::vector<Mode> ms;
  for (int k = 0; k < modes; ++k) {
    Mode m{Eigen::VectorXd(n), Eigen::VectorXd(N), 0.0};
    for (auto& f : m.freq) f = normal(rng);
    for (auto& c : m.coef) c = 0.3 * amplitude * normal(rng);
    m.phase = 2.0 * std::numbers::pi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ms.push_back(std::move(m));
  }
  return GridField::sample(dom, N, [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = lin * x + shift;
    for (const auto& m : ms) y += std::cos(m.freq.dot(x) + m.phase) * m.coef;
    return y;
  });
}

} // namespace polyreg

#endif
