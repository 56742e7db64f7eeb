#pragma once

// Base-case 64x64 -> 128 bit carry-less multiplication kernels.
//
// window_mul mirrors the reference HQC base multiplier: a 16-entry table of
// multiples of b, scanned in full for every 4-bit window of a so the memory
// access pattern does not depend on a. serial_mul and direct_mul are the two
// replacements that drop the table scan; masked_mul wraps any of them in a
// first-order Boolean mask on a.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hqcspa {

using Limb = std::uint64_t;

struct WideProduct
{
  Limb lo = 0;
  Limb hi = 0;

  friend constexpr bool operator==(const WideProduct&, const WideProduct&) = default;

  constexpr WideProduct operator^(const WideProduct& o) const { return { lo ^ o.lo, hi ^ o.hi }; }
};

enum class Kernel
{
  window, // table scan with arithmetic selection (base_mul)
  serial, // bit-serial masked shift/xor, no table (base_mul2)
  direct, // direct table indexing (base_mul3)
  masked, // Boolean-masked wrapper around one of the above
};

inline std::string_view
kernel_name(Kernel k)
{
  switch (k) {
    case Kernel::window:
      return "win";
    case Kernel::serial:
      return "serial";
    case Kernel::direct:
      return "direct";
    case Kernel::masked:
      return "masked";
  }
  return "?";
}

inline Kernel
parse_kernel(std::string_view name)
{
  if (name == "win" || name == "window" || name == "base_mul")
    return Kernel::window;
  if (name == "serial" || name == "base_mul2")
    return Kernel::serial;
  if (name == "direct" || name == "base_mul3")
    return Kernel::direct;
  if (name == "masked")
    return Kernel::masked;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

using LookupTable = std::array<Limb, 16>;

// u[k] = k * (b with its top four bits cleared).
constexpr LookupTable
build_table(Limb b)
{
  LookupTable u{};
  u[0] = 0;
  u[1] = b & ((Limb{ 1 } << (64 - 4)) - 1);
  u[2] = u[1] << 1;
  u[3] = u[2] ^ u[1];
  u[4] = u[2] << 1;
  u[5] = u[4] ^ u[1];
  u[6] = u[3] << 1;
  u[7] = u[6] ^ u[1];
  u[8] = u[4] << 1;
  u[9] = u[8] ^ u[1];
  u[10] = u[5] << 1;
  u[11] = u[10] ^ u[1];
  u[12] = u[6] << 1;
  u[13] = u[12] ^ u[1];
  u[14] = u[7] << 1;
  u[15] = u[14] ^ u[1];
  return u;
}

namespace detail {

// Adds a * (top four bits of b) into (l, h).
constexpr void
correct_top_bits(Limb a, Limb b, Limb& l, Limb& h)
{
  const Limb m0 = -((b >> 60) & 1);
  const Limb m1 = -((b >> 61) & 1);
  const Limb m2 = -((b >> 62) & 1);
  const Limb m3 = -((b >> 63) & 1);

  l ^= (a << 60) & m0;
  h ^= (a >> 4) & m0;

  l ^= (a << 61) & m1;
  h ^= (a >> 3) & m1;

  l ^= (a << 62) & m2;
  h ^= (a >> 2) & m2;

  l ^= (a << 63) & m3;
  h ^= (a >> 1) & m3;
}

// All-ones when index == selected, zero otherwise, without a branch.
constexpr Limb
select_mask(Limb selected, Limb index)
{
  const Limb diff = selected - index;
  return -(1 - ((diff | -diff) >> 63));
}

} // namespace detail

// Full-table scan for the window selected by `nibble`. Every entry is read.
constexpr Limb
scan_table(const LookupTable& u, Limb nibble)
{
  Limb g = 0;
  for (Limb j = 0; j < 16; ++j) {
    g ^= u[j] & detail::select_mask(nibble, j);
  }
  return g;
}

constexpr WideProduct
window_mul(Limb a, Limb b)
{
  const LookupTable u = build_table(b);

  Limb g = scan_table(u, a & 15);
  Limb l = g;
  Limb h = 0;

  for (unsigned i = 4; i < 64; i += 4) {
    g = scan_table(u, (a >> i) & 15);
    l ^= g << i;
    h ^= g >> (64 - i);
  }

  detail::correct_top_bits(a, b, l, h);
  return { l, h };
}

constexpr WideProduct
serial_mul(Limb a, Limb b)
{
  Limb l = b & -(a & 1);
  Limb h = 0;

  for (unsigned i = 1; i < 64; ++i) {
    const Limb mask = -((a >> i) & 1);
    l ^= (b << i) & mask;
    h ^= (b >> (64 - i)) & mask;
  }
  return { l, h };
}

constexpr WideProduct
direct_mul(Limb a, Limb b)
{
  const LookupTable u = build_table(b);

  Limb l = u[a & 15];
  Limb h = 0;

  for (unsigned i = 4; i < 64; i += 4) {
    const Limb g = u[(a >> i) & 15];
    l ^= g << i;
    h ^= g >> (64 - i);
  }

  detail::correct_top_bits(a, b, l, h);
  return { l, h };
}

// Textbook bit-by-bit product; shares no code with the kernels above.
constexpr WideProduct
schoolbook_oracle(Limb a, Limb b)
{
  std::array<bool, 128> bits{};
  for (unsigned i = 0; i < 64; ++i) {
    if (((a >> i) & 1) == 0)
      continue;
    for (unsigned j = 0; j < 64; ++j) {
      if ((b >> j) & 1)
        bits[i + j] = !bits[i + j];
    }
  }
  WideProduct r;
  for (unsigned k = 0; k < 64; ++k) {
    r.lo |= Limb{ bits[k] } << k;
    r.hi |= Limb{ bits[k + 64] } << k;
  }
  return r;
}

// Runs one of the three unmasked kernels.
inline WideProduct
base_multiply(Kernel k, Limb a, Limb b)
{
  switch (k) {
    case Kernel::window:
      return window_mul(a, b);
    case Kernel::serial:
      return serial_mul(a, b);
    case Kernel::direct:
      return direct_mul(a, b);
    case Kernel::masked:
      break;
  }
  throw std::invalid_argument("base_multiply: kernel must be win, serial or direct");
}

// inner(a ^ mask, b) ^ inner(mask, b) == a * b by distributivity over xor.
inline WideProduct
masked_mul(Limb a, Limb b, Limb mask, Kernel inner)
{
  if (inner == Kernel::masked)
    throw std::invalid_argument("masked_mul: inner kernel cannot itself be masked");
  const WideProduct c = base_multiply(inner, a ^ mask, b);
  const WideProduct unmask = base_multiply(inner, mask, b);
  return c ^ unmask;
}

} // namespace hqcspa
