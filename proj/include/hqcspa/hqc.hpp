#pragma once

// The slice of HQC the attack observes: sparse secret y and the decryption
// product v - u*y over GF(2)[x]/(x^n - 1).

#include "hqcspa/poly.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hqcspa {

struct RingParams
{
  // HQC-128 length; the weight is the HQC-128 r/e weight. Both configurable.
  std::size_t n = 17669;
  std::size_t w = 75;

  void validate() const
  {
    if (n == 0 || w == 0 || w >= n)
      throw std::invalid_argument("RingParams: need 0 < w < n");
  }
};

struct SecretKey
{
  GF2Poly y;
  std::vector<std::size_t> support; // sorted set-bit positions of y

  std::size_t n() const { return y.nbits(); }
  std::size_t w() const { return support.size(); }

  static SecretKey from_support(std::size_t n, std::vector<std::size_t> support)
  {
    std::ranges::sort(support);
    if (std::ranges::adjacent_find(support) != support.end())
      throw std::invalid_argument("SecretKey: duplicate support position");
    GF2Poly y(n);
    for (std::size_t p : support) {
      if (p >= n)
        throw std::invalid_argument("SecretKey: support position out of range");
      y.set_bit(p);
    }
    return { std::move(y), std::move(support) };
  }

  static SecretKey from_poly(GF2Poly y)
  {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < y.nbits(); ++i)
      if (y.bit(i))
        support.push_back(i);
    return { std::move(y), std::move(support) };
  }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

struct Ciphertext
{
  GF2Poly u;
  GF2Poly v;
};

// w distinct positions drawn uniformly without replacement.
inline SecretKey
sample_secret(const RingParams& params, std::uint64_t seed)
{
  params.validate();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> positions(params.n);
  std::iota(positions.begin(), positions.end(), std::size_t{ 0 });
  std::vector<std::size_t> support;
  support.reserve(params.w);
  std::sample(positions.begin(), positions.end(), std::back_inserter(support), params.w, rng);
  return SecretKey::from_support(params.n, std::move(support));
}

inline GF2Poly
random_poly(std::size_t nbits, std::mt19937_64& rng)
{
  std::vector<Limb> limbs((nbits + 63) / 64);
  for (Limb& l : limbs)
    l = rng();
  if (nbits % 64 != 0 && !limbs.empty())
    limbs.back() &= (Limb{ 1 } << (nbits % 64)) - 1;
  return GF2Poly(std::move(limbs), nbits);
}

inline Ciphertext
random_ciphertext(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  GF2Poly u = random_poly(n, rng);
  GF2Poly v = random_poly(n, rng);
  return { std::move(u), std::move(v) };
}

// v - u*y. The key is passed as the first Karatsuba operand so every base
// call receives a key-derived limb as `a`, matching the attacked code.
inline GF2Poly
decrypt_mul(const Ciphertext& ct, const SecretKey& sk, const MulSpec& spec = {},
            const BaseCallObserver& observer = {})
{
  const std::size_t n = sk.n();
  if (ct.u.nbits() != n || ct.v.nbits() != n)
    throw std::invalid_argument("decrypt_mul: ciphertext and key dimensions differ");
  GF2Poly prod = karatsuba_mul(sk.y, ct.u, spec, observer);
  return ct.v ^ cyclic_reduce(prod, n);
}

inline void
to_json(nlohmann::json& j, const SecretKey& sk)
{
  j = nlohmann::json{ { "n", sk.n() }, { "w", sk.w() }, { "support", sk.support } };
}

inline void
from_json(const nlohmann::json& j, SecretKey& sk)
{
  const auto n = j.at("n").get<std::size_t>();
  const auto w = j.at("w").get<std::size_t>();
  sk = SecretKey::from_support(n, j.at("support").get<std::vector<std::size_t>>());
  if (sk.w() != w)
    throw std::invalid_argument("SecretKey json: support size does not match w");
}

} // namespace hqcspa
