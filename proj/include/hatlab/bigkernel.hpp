#pragma once
// Extended-precision potential-kernel octant, shared by the double table
// builder and the small number of solves whose answers underflow doubles.

#include <boost/multiprecision/mpfr.hpp>

#include <vector>

namespace hatlab {

using Big = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                          boost::multiprecision::et_off>;

// a(x, y) for 0 <= y <= x <= R0, index x(x+1)/2 + y, computed after setting
// the dynamic MPFR default precision to `bits`. The caller inherits that
// default for subsequent Big arithmetic.
std::vector<Big> kernel_octant_big(int R0, unsigned bits);

inline Big big_kernel_at(const std::vector<Big>& oct, int64_t x, int64_t y) {
  x = x < 0 ? -x : x;
  y = y < 0 ? -y : y;
  if (x < y) std::swap(x, y);
  return oct[size_t(x) * size_t(x + 1) / 2 + size_t(y)];
}

}  // namespace hatlab
