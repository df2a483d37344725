#ifndef POLYREG_SUMMATION_HPP
#define POLYREG_SUMMATION_HPP

#include <cmath>
#include <span>

namespace polyreg {

// Neumaier's variant of Kahan summation. Single-threaded results are
// bit-stable; reordering changes the result only in the last few ulps.
class CompensatedSum
{
public:
  void add(double x)
  {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(double x)
  {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs)
{
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double compensated_dot(std::span<const double> a, std::span<const double> b)
{
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

} // namespace polyreg

#endif
