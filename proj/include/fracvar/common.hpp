#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracvar {

// Thrown when an enumeration or partition grid would exceed its size budget.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when parameters fall outside the regime an operation is defined for
// (e.g. |alpha| <= 1/b where a Hurst exponent is required).
class regime_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Neumaier variant of Kahan summation. Order of add() calls fixes the result.
class compensated_sum {
 public:
  compensated_sum() = default;
  explicit compensated_sum(double init) : sum_(init) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void add(const compensated_sum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  compensated_sum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// |x|^p with 0 mapped to 0 (no NaN at zero increments for fractional p).
inline double abs_pow(double x, double p) {
  const double a = std::fabs(x);
  if (a == 0.0) return p == 0.0 ? 1.0 : 0.0;
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::exp(p * std::log(a));
}

// x^k for integer k >= 0 by repeated squaring (exact sign for odd k).
inline double int_pow(double x, int k) {
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(k);
  while (e != 0) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1u;
  }
  return result;
}

// b^n as an integer, or 0 if it does not fit into 63 bits.
inline std::uint64_t checked_ipow(std::uint64_t b, int n) {
  std::uint64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > (std::uint64_t{1} << 62) / b) return 0;
    r *= b;
  }
  return r;
}

// True if x is within tol of an odd integer; writes that integer to out.
inline bool near_odd_integer(double x, double tol, int& out) {
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) > tol) return false;
  const auto i = static_cast<long long>(r);
  if (i % 2 == 0) return false;
  out = static_cast<int>(i);
  return true;
}

inline bool near_even_integer(double x, double tol, int& out) {
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) > tol) return false;
  const auto i = static_cast<long long>(r);
  if (i % 2 != 0) return false;
  out = static_cast<int>(i);
  return true;
}

}  // namespace fracvar
