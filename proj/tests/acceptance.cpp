// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include "hqcspa/hqcspa.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace hqcspa;

namespace {

struct Outcome
{
  bool pass;
  std::string detail;
};

int failures = 0;

void
criterion(int id, const char* title, const std::function<Outcome()>& body)
{
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = { false, std::string("exception: ") + e.what() };
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %d. %s (%.1fs) -- %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

constexpr Kernel kUnmasked[] = { Kernel::window, Kernel::serial, Kernel::direct };

Outcome
kernel_correctness()
{
  std::uint64_t checked = 0;
  std::mt19937_64 rng(101);
  auto agree = [&](Limb a, Limb b) {
    const WideProduct want = schoolbook_oracle(a, b);
    const Limb mask = rng();
    ++checked;
    return window_mul(a, b) == want && serial_mul(a, b) == want && direct_mul(a, b) == want &&
           masked_mul(a, b, mask, Kernel::window) == want && masked_mul(a, b, mask, Kernel::serial) == want &&
           masked_mul(a, b, mask, Kernel::direct) == want;
  };
  for (Limb a = 0; a < 256; ++a)
    for (Limb b = 0; b < 256; ++b)
      if (!agree(a, b))
        return { false, "mismatch at a=" + std::to_string(a) + " b=" + std::to_string(b) };
  for (int i = 0; i < 100000; ++i) {
    const Limb a = rng(), b = rng();
    if (!agree(a, b))
      return { false, "mismatch at a=" + to_hex(a) + " b=" + to_hex(b) };
  }
  return { true, std::to_string(checked) + " pairs bit-exact for all kernels" };
}

Outcome
karatsuba_correctness()
{
  std::mt19937_64 rng(102);
  for (std::size_t n : { 1, 2, 3, 4, 17, 277 }) {
    for (int rep = 0; rep < 3; ++rep) {
      const GF2Poly a = random_poly(64 * n, rng), b = random_poly(64 * n, rng);
      const GF2Poly want = oracle::schoolbook_poly_mul(a, b);
      for (Kernel k : kUnmasked)
        if (karatsuba_mul(a, b, { k }) != want)
          return { false, std::to_string(n) + "-limb product differs (" + std::string(kernel_name(k)) + ")" };
      if (karatsuba_mul(a, b, { Kernel::masked, Kernel::window, rng() }) != want)
        return { false, std::to_string(n) + "-limb masked product differs" };
    }
  }
  return { true, "1,2,3,4,17,277 limbs bit-exact for win/serial/direct/masked" };
}

Outcome
zero_noise_completeness()
{
  std::mt19937_64 rng(103);
  const LeakageParams p;
  std::size_t ok = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const Limb a = rng(), b = rng();
    ok += *recover_limb(simulate_trace(a, b, p, rng())).limb_success;
  }
  return { ok == n, std::to_string(ok) + "/" + std::to_string(n) + " limbs recovered at sigma=0" };
}

EvaluationResult calibrated_run;

Outcome
calibrated_success()
{
  const Calibration cal = calibrate_sigma(10000, 1);
  if (!cal.converged || cal.sigma != kCalibratedSigma)
    return { false, "calibration gave sigma=" + std::to_string(cal.sigma) + ", frozen " +
                      std::to_string(kCalibratedSigma) };

  LeakageParams p;
  p.noise_sigma = kCalibratedSigma;
  calibrated_run = run_evaluation(10000, p, 1);
  char buf[160];
  std::snprintf(buf, sizeof buf, "sigma=%.4f success_rate=%.4f (%zu failures), window-0 error %.4f; published: 0.9969",
                kCalibratedSigma, calibrated_run.success_rate, calibrated_run.failures.size(), cal.first_window_error_rate);
  return { calibrated_run.success_rate >= 0.99 && calibrated_run.success_rate < 1.0, buf };
}

Outcome
failure_localization()
{
  if (calibrated_run.trials == 0)
    return { false, "criterion 4 run missing" };
  for (const auto& f : calibrated_run.failures)
    if (f.windows != std::vector<std::size_t>{ 0 })
      return { false, "trial " + std::to_string(f.trial) + " failed outside window 0" };
  std::string rows;
  for (std::size_t r = 0; r < 16; ++r) {
    const auto off = calibrated_run.cm_first_window.off_diagonal(r);
    if (off == 0)
      continue;
    if (r != 0 && r != 15)
      return { false, "window-0 errors in row " + std::to_string(r) };
    rows += " row" + std::to_string(r) + "=" + std::to_string(off);
  }
  if (!calibrated_run.cm_rest.is_diagonal())
    return { false, "windows 1..15 matrix not diagonal" };
  return { true, "all failures in window 0;" + rows + "; windows 1..15 diagonal" };
}

Outcome
benchmark_ordering()
{
  const std::size_t calls = 10000000;
  const BenchResult w = run_bench(Kernel::window, calls, 104);
  const BenchResult s = run_bench(Kernel::serial, calls, 104);
  const BenchResult d = run_bench(Kernel::direct, calls, 104);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "base_mul %.3fs, base_mul2 %.3fs, base_mul3 %.3fs; ratios %.2fx / %.2fx (published 2.3x / 6.9x)",
                w.elapsed, s.elapsed, d.elapsed, w.elapsed / s.elapsed, w.elapsed / d.elapsed);
  const bool same = w.checksum == s.checksum && s.checksum == d.checksum;
  return { same && d.per_call < s.per_call && s.per_call < w.per_call, buf };
}

Outcome
key_recovery()
{
  const RingParams params{ 17669, 75 };
  const SecretKey sk = sample_secret(params, 105);
  const Ciphertext ct = random_ciphertext(params.n, 106);
  const KeyTraceSet set = capture_key_traces(ct, sk, LeakageParams{}, 107);
  const KeyRecovery rec = recover_key(set.traces, set.mapping, params, {}, &sk);
  std::size_t good = 0;
  for (bool b : *rec.limb_correct)
    good += b;
  return { *rec.exact && rec.y == sk.y,
           std::to_string(good) + "/" + std::to_string(rec.limb_correct->size()) + " limbs from " +
             std::to_string(set.traces.size()) + " raw-limb base calls" };
}

Outcome
masking_round_trip()
{
  std::mt19937_64 rng(108);
  for (int i = 0; i < 10000; ++i) {
    const Limb a = rng(), b = rng(), m = rng();
    const WideProduct want = schoolbook_oracle(a, b);
    for (Kernel k : kUnmasked)
      if (masked_mul(a, b, m, k) != want)
        return { false, "mismatch for " + std::string(kernel_name(k)) };
  }
  return { true, "10000 triples x 3 inner kernels bit-exact" };
}

} // namespace

int
main()
{
  criterion(1, "kernel correctness", kernel_correctness);
  criterion(2, "Karatsuba correctness", karatsuba_correctness);
  criterion(3, "zero-noise attack completeness", zero_noise_completeness);
  criterion(4, "calibrated success rate", calibrated_success);
  criterion(5, "failure localization", failure_localization);
  criterion(6, "benchmark ordering", benchmark_ordering);
  criterion(7, "end-to-end key recovery", key_recovery);
  criterion(8, "masking round trip", masking_round_trip);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
