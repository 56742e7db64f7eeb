#pragma once

// Wall-clock timing of the base kernels over a pre-generated operand pool.

#include "hqcspa/gf2x.hpp"
#include "hqcspa/poly.hpp"

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hqcspa {

struct BenchResult
{
  Kernel kernel = Kernel::window;
  std::size_t calls = 0;
  double elapsed = 0.0; // seconds, median over repetitions
  double per_call = 0.0; // nanoseconds
  std::uint64_t checksum = 0;
  std::vector<double> repetitions;
};

struct OperandPool
{
  std::vector<Limb> a, b, mask;

  explicit OperandPool(std::uint64_t seed, std::size_t size = 4096)
    : a(size)
    , b(size)
    , mask(size)
  {
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < size; ++i) {
      a[i] = splitmix64(s);
      b[i] = splitmix64(s);
      mask[i] = splitmix64(s);
    }
  }
};

namespace detail {

template<typename Mul>
std::uint64_t
bench_loop(const OperandPool& pool, std::size_t calls, Mul&& mul)
{
  const std::size_t m = pool.a.size() - 1; // pool size is a power of two
  std::uint64_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < calls; ++i) {
    const std::size_t j = i & m;
    const WideProduct p = mul(pool.a[j], pool.b[j], pool.mask[j]);
    lo ^= p.lo;
    hi ^= p.hi;
  }
  return lo ^ (hi << 1 | hi >> 63);
}

} // namespace detail

// Single-threaded; the checksum depends only on the operand stream, not on
// the kernel, so equal checksums across kernels double as a correctness check.
inline BenchResult
run_bench(Kernel kernel, std::size_t calls, std::uint64_t seed, std::size_t repetitions = 5,
          Kernel masked_inner = Kernel::window)
{
  if (calls == 0)
    throw std::invalid_argument("run_bench: calls must be >= 1");
  if (repetitions == 0)
    throw std::invalid_argument("run_bench: repetitions must be >= 1");

  const OperandPool pool(seed);
  BenchResult r;
  r.kernel = kernel;
  r.calls = calls;

  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t sum = 0;
    switch (kernel) {
      case Kernel::window:
        sum = detail::bench_loop(pool, calls, [](Limb a, Limb b, Limb) { return window_mul(a, b); });
        break;
      case Kernel::serial:
        sum = detail::bench_loop(pool, calls, [](Limb a, Limb b, Limb) { return serial_mul(a, b); });
        break;
      case Kernel::direct:
        sum = detail::bench_loop(pool, calls, [](Limb a, Limb b, Limb) { return direct_mul(a, b); });
        break;
      case Kernel::masked:
        sum = detail::bench_loop(pool, calls,
                                 [masked_inner](Limb a, Limb b, Limb m) { return masked_mul(a, b, m, masked_inner); });
        break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.repetitions.push_back(std::chrono::duration<double>(t1 - t0).count());
    r.checksum = sum;
  }

  std::vector<double> sorted = r.repetitions;
  std::sort(sorted.begin(), sorted.end());
  r.elapsed = sorted[sorted.size() / 2];
  r.per_call = r.elapsed * 1e9 / double(calls);
  return r;
}

} // namespace hqcspa
