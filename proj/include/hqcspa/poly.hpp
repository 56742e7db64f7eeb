#pragma once

// Dense GF(2)[x] polynomials, recursive Karatsuba on limb arrays and
// reduction modulo x^n - 1.

#include "hqcspa/gf2x.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace hqcspa {

class GF2Poly
{
public:
  GF2Poly() = default;

  explicit GF2Poly(std::size_t nbits)
    : limbs_((nbits + 63) / 64, 0)
    , nbits_(nbits)
  {
  }

  // Bits at or above nbits must be zero.
  GF2Poly(std::vector<Limb> limbs, std::size_t nbits)
    : limbs_(std::move(limbs))
    , nbits_(nbits)
  {
    if (limbs_.size() != (nbits + 63) / 64)
      throw std::invalid_argument("GF2Poly: limb count does not match bit length");
    if (nbits % 64 != 0 && !limbs_.empty() && (limbs_.back() >> (nbits % 64)) != 0)
      throw std::invalid_argument("GF2Poly: bits set above declared length");
  }

  std::size_t nbits() const { return nbits_; }
  std::size_t size() const { return limbs_.size(); }
  std::span<const Limb> limbs() const { return limbs_; }
  Limb limb(std::size_t i) const { return limbs_.at(i); }

  bool bit(std::size_t i) const { return i < nbits_ && ((limbs_[i / 64] >> (i % 64)) & 1); }

  void set_bit(std::size_t i, bool v = true)
  {
    if (i >= nbits_)
      throw std::out_of_range("GF2Poly::set_bit: index beyond length");
    const Limb m = Limb{ 1 } << (i % 64);
    limbs_[i / 64] = v ? (limbs_[i / 64] | m) : (limbs_[i / 64] & ~m);
  }

  void flip_bit(std::size_t i)
  {
    if (i >= nbits_)
      throw std::out_of_range("GF2Poly::flip_bit: index beyond length");
    limbs_[i / 64] ^= Limb{ 1 } << (i % 64);
  }

  std::size_t popcount() const
  {
    std::size_t c = 0;
    for (Limb l : limbs_)
      c += static_cast<std::size_t>(std::popcount(l));
    return c;
  }

  bool is_zero() const
  {
    return std::all_of(limbs_.begin(), limbs_.end(), [](Limb l) { return l == 0; });
  }

  // Zero-extends, or truncates (dropping high bits).
  GF2Poly resized(std::size_t nbits) const
  {
    GF2Poly r(nbits);
    std::copy_n(limbs_.begin(), std::min(limbs_.size(), r.limbs_.size()), r.limbs_.begin());
    r.clear_tail();
    return r;
  }

  // 64 bits starting at bit `start`; bits past the end read as zero.
  Limb window64(std::size_t start) const
  {
    const std::size_t li = start / 64;
    const unsigned sh = static_cast<unsigned>(start % 64);
    if (li >= limbs_.size())
      return 0;
    Limb w = limbs_[li] >> sh;
    if (sh != 0 && li + 1 < limbs_.size())
      w |= limbs_[li + 1] << (64 - sh);
    return w;
  }

  GF2Poly& operator^=(const GF2Poly& o)
  {
    if (o.nbits_ != nbits_)
      throw std::invalid_argument("GF2Poly: xor of polynomials with different lengths");
    for (std::size_t i = 0; i < limbs_.size(); ++i)
      limbs_[i] ^= o.limbs_[i];
    return *this;
  }

  friend GF2Poly operator^(GF2Poly a, const GF2Poly& b) { return a ^= b; }

  friend bool operator==(const GF2Poly&, const GF2Poly&) = default;

private:
  void clear_tail()
  {
    if (nbits_ % 64 != 0 && !limbs_.empty())
      limbs_.back() &= (Limb{ 1 } << (nbits_ % 64)) - 1;
  }

  std::vector<Limb> limbs_;
  std::size_t nbits_ = 0;
};

// Which base kernel a multi-limb product uses. For Kernel::masked, `inner`
// does the work and masks come from a generator seeded with `mask_seed`.
struct MulSpec
{
  Kernel kernel = Kernel::window;
  Kernel inner = Kernel::window;
  std::uint64_t mask_seed = 0;
};

// One invocation of the base kernel inside karatsuba_mul. `a_limb`/`b_limb`
// give the limb index in the original operand when the base operand is that
// raw limb, or -1 when it is a Karatsuba sum or zero padding.
struct BaseCall
{
  std::size_t index = 0;
  Limb a = 0;
  Limb b = 0;
  std::ptrdiff_t a_limb = -1;
  std::ptrdiff_t b_limb = -1;
};

using BaseCallObserver = std::function<void(const BaseCall&)>;

inline std::uint64_t
splitmix64(std::uint64_t& state)
{
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

struct Operand
{
  std::span<const Limb> limbs;
  std::ptrdiff_t origin; // limb offset in the caller's operand, -1 if derived
  std::size_t raw;       // leading limbs that are original (not padding)
};

struct KaratsubaContext
{
  MulSpec spec;
  std::uint64_t mask_state;
  std::size_t calls = 0;
  const BaseCallObserver* observer = nullptr;

  WideProduct multiply(Limb a, Limb b)
  {
    if (spec.kernel == Kernel::masked)
      return masked_mul(a, b, splitmix64(mask_state), spec.inner);
    return base_multiply(spec.kernel, a, b);
  }
};

inline Operand
high_half(const Operand& x, std::size_t h, std::vector<Limb>& storage)
{
  const std::size_t n = x.limbs.size();
  storage.assign(h, 0);
  std::copy(x.limbs.begin() + static_cast<std::ptrdiff_t>(h), x.limbs.end(), storage.begin());
  return { storage, x.origin >= 0 ? x.origin + static_cast<std::ptrdiff_t>(h) : -1,
           x.raw > h ? std::min(x.raw - h, n - h) : 0 };
}

inline void
karatsuba(std::span<Limb> out, const Operand& a, const Operand& b, KaratsubaContext& ctx)
{
  const std::size_t n = a.limbs.size();

  if (n == 1) {
    const WideProduct p = ctx.multiply(a.limbs[0], b.limbs[0]);
    out[0] = p.lo;
    out[1] = p.hi;
    if (ctx.observer && *ctx.observer) {
      (*ctx.observer)(BaseCall{ ctx.calls, a.limbs[0], b.limbs[0], a.raw ? a.origin : -1, b.raw ? b.origin : -1 });
    }
    ++ctx.calls;
    return;
  }

  // Split at ceil(n/2); an odd-length high half is zero-padded to h limbs.
  const std::size_t h = (n + 1) / 2;
  const Operand a0{ a.limbs.first(h), a.origin, std::min(a.raw, h) };
  const Operand b0{ b.limbs.first(h), b.origin, std::min(b.raw, h) };
  std::vector<Limb> a1_store, b1_store;
  const Operand a1 = high_half(a, h, a1_store);
  const Operand b1 = high_half(b, h, b1_store);

  std::vector<Limb> sa(h), sb(h);
  for (std::size_t i = 0; i < h; ++i) {
    sa[i] = a0.limbs[i] ^ a1.limbs[i];
    sb[i] = b0.limbs[i] ^ b1.limbs[i];
  }

  std::vector<Limb> z0(2 * h), z1(2 * h), z2(2 * h);
  karatsuba(z0, a0, b0, ctx);
  karatsuba(z2, a1, b1, ctx);
  karatsuba(z1, Operand{ sa, -1, 0 }, Operand{ sb, -1, 0 }, ctx);

  std::vector<Limb> full(4 * h, 0);
  for (std::size_t i = 0; i < 2 * h; ++i) {
    full[i] ^= z0[i];
    full[i + h] ^= z1[i] ^ z0[i] ^ z2[i];
    full[i + 2 * h] ^= z2[i];
  }
  std::copy_n(full.begin(), out.size(), out.begin());
}

} // namespace detail

// Full product of two equal-length operands; the result has 2*nbits bits.
inline GF2Poly
karatsuba_mul(const GF2Poly& a, const GF2Poly& b, const MulSpec& spec = {}, const BaseCallObserver& observer = {})
{
  if (a.nbits() == 0 || b.nbits() == 0)
    throw std::invalid_argument("karatsuba_mul: zero-length operand");
  if (a.nbits() != b.nbits())
    throw std::invalid_argument("karatsuba_mul: operands must have equal bit length");

  const std::size_t n = a.size();
  detail::KaratsubaContext ctx{ spec, spec.mask_seed, 0, &observer };
  std::vector<Limb> out(2 * n, 0);
  detail::karatsuba(out, { a.limbs(), 0, n }, { b.limbs(), 0, n }, ctx);

  GF2Poly r(std::move(out), 2 * n * 64);
  return r.resized(2 * a.nbits());
}

// p mod (x^n - 1): bit k is folded onto bit k mod n.
inline GF2Poly
cyclic_reduce(const GF2Poly& p, std::size_t n)
{
  if (n == 0)
    throw std::invalid_argument("cyclic_reduce: n must be positive");
  if (p.nbits() < n)
    throw std::invalid_argument("cyclic_reduce: polynomial shorter than n");

  std::vector<Limb> acc((n + 63) / 64, 0);
  for (std::size_t start = 0; start < p.nbits(); start += n) {
    for (std::size_t d = 0; d < acc.size(); ++d) {
      const std::size_t from = start + 64 * d;
      if (from >= p.nbits())
        break;
      Limb w = p.window64(from);
      // Keep only bits of this chunk: positions < start + n.
      const std::size_t chunk_end = start + n;
      if (from + 64 > chunk_end) {
        const std::size_t keep = chunk_end - from;
        w &= keep >= 64 ? ~Limb{ 0 } : (Limb{ 1 } << keep) - 1;
      }
      acc[d] ^= w;
    }
  }
  return GF2Poly(std::move(acc), n);
}

} // namespace hqcspa
