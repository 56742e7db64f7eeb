#pragma once

// Slow, independent reference computations used only by the tests.

#include "hqcspa/gf2x.hpp"
#include "hqcspa/poly.hpp"

#include <cstddef>
#include <vector>

namespace hqcspa::oracle {

// Limb-by-limb schoolbook product built on the bit-serial oracle.
inline GF2Poly
schoolbook_poly_mul(const GF2Poly& a, const GF2Poly& b)
{
  std::vector<Limb> out(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const WideProduct p = schoolbook_oracle(a.limb(i), b.limb(j));
      out[i + j] ^= p.lo;
      out[i + j + 1] ^= p.hi;
    }
  }
  GF2Poly full(std::move(out), (a.size() + b.size()) * 64);
  return full.resized(a.nbits() + b.nbits());
}

// Bit k goes to bit k mod n, one bit at a time.
inline GF2Poly
fold_per_bit(const GF2Poly& p, std::size_t n)
{
  GF2Poly r(n);
  for (std::size_t k = 0; k < p.nbits(); ++k)
    if (p.bit(k))
      r.flip_bit(k % n);
  return r;
}

// (u * y) mod (x^n - 1) by direct cyclic convolution.
inline GF2Poly
cyclic_convolution(const GF2Poly& u, const GF2Poly& y, std::size_t n)
{
  GF2Poly r(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!u.bit(i))
      continue;
    for (std::size_t j = 0; j < n; ++j)
      if (y.bit(j))
        r.flip_bit((i + j) % n);
  }
  return r;
}

inline int
degree(Limb v)
{
  int d = -1;
  for (int i = 0; i < 64; ++i)
    if ((v >> i) & 1)
      d = i;
  return d;
}

} // namespace hqcspa::oracle
