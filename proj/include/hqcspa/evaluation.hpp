#pragma once

// Repeated single-limb attacks on random operands, aggregated into
// confusion matrices for window 0 and for windows 1..15.

#include "hqcspa/attack.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace hqcspa {

// Noise level at which the default leakage model and attack misread about
// 0.3% of window-0 nibbles over 10^4 trials (seed 1), all of them 0 or 15.
// Found with calibrate_sigma and frozen here.
inline constexpr double kCalibratedSigma = 0.015;

struct ConfusionMatrix
{
  // rows: actual nibble, columns: recovered nibble
  std::array<std::array<std::uint64_t, 16>, 16> counts{};
  // windows that produced no nibble at all, by actual value
  std::array<std::uint64_t, 16> unclassified{};

  void add(Nibble actual, Nibble recovered) { ++counts[actual][recovered]; }
  void add_unclassified(Nibble actual) { ++unclassified[actual]; }

  std::uint64_t row_total(std::size_t r) const
  {
    std::uint64_t s = 0;
    for (auto c : counts[r])
      s += c;
    return s;
  }

  std::uint64_t total() const
  {
    std::uint64_t s = 0;
    for (std::size_t r = 0; r < 16; ++r)
      s += row_total(r) + unclassified[r];
    return s;
  }

  std::uint64_t off_diagonal(std::size_t r) const { return row_total(r) - counts[r][r] + unclassified[r]; }

  bool is_diagonal() const
  {
    for (std::size_t r = 0; r < 16; ++r)
      if (off_diagonal(r) != 0)
        return false;
    return true;
  }

  // Rows sum to 1, or are all zero when nothing was recorded for that row.
  std::array<std::array<double, 16>, 16> normalized() const
  {
    std::array<std::array<double, 16>, 16> m{};
    for (std::size_t r = 0; r < 16; ++r) {
      const auto tot = row_total(r);
      if (tot == 0)
        continue;
      for (std::size_t c = 0; c < 16; ++c)
        m[r][c] = double(counts[r][c]) / double(tot);
    }
    return m;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct TrialFailure
{
  std::size_t trial = 0;
  Limb a = 0;
  Limb b = 0;
  Limb recovered = 0;
  std::vector<std::size_t> windows;
};

struct EvaluationResult
{
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  ConfusionMatrix cm_first_window;
  ConfusionMatrix cm_rest;
  std::vector<TrialFailure> failures;

  double first_window_error_rate() const
  {
    if (trials == 0)
      return 0.0;
    std::uint64_t correct = 0;
    for (std::size_t r = 0; r < 16; ++r)
      correct += cm_first_window.counts[r][r];
    return double(trials - correct) / double(trials);
  }
};

struct TrialInputs
{
  Limb a;
  Limb b;
  std::uint64_t noise_seed;
};

// Operands and noise seed for trial `index`, derived from the master seed
// only, so trials can be generated in any order.
inline TrialInputs
trial_inputs(std::uint64_t master_seed, std::size_t index)
{
  std::uint64_t s = master_seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(index) + 1));
  const Limb a = splitmix64(s);
  const Limb b = splitmix64(s);
  return { a, b, splitmix64(s) };
}

inline EvaluationResult
run_evaluation(std::size_t trials, const LeakageParams& leak, std::uint64_t seed, const AttackConfig& cfg = {})
{
  if (trials == 0)
    throw std::invalid_argument("run_evaluation: trials must be >= 1");
  leak.validate();

  EvaluationResult res;
  res.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    const TrialInputs in = trial_inputs(seed, i);
    const Trace tr = simulate_trace(in.a, in.b, leak, in.noise_seed);
    const RecoveryReport rep = recover_limb(tr, cfg);
    const auto truth = nibbles_of(in.a);

    TrialFailure fail{ i, in.a, in.b, rep.recovered_limb(), {} };
    for (std::size_t k = 0; k < kWindows; ++k) {
      ConfusionMatrix& cm = k == 0 ? res.cm_first_window : res.cm_rest;
      if (rep.classified[k])
        cm.add(truth[k], rep.recovered[k]);
      else
        cm.add_unclassified(truth[k]);
      if (!(*rep.per_window_success)[k])
        fail.windows.push_back(k);
    }
    if (fail.windows.empty())
      ++res.successes;
    else
      res.failures.push_back(std::move(fail));
  }
  res.success_rate = double(res.successes) / double(trials);
  return res;
}

struct Calibration
{
  double sigma = 0.0;
  double first_window_error_rate = 0.0;
  bool converged = false;
  std::size_t steps = 0;
};

// Bisects sigma over [0, 0.15 * select_amp] until the window-0 error rate
// lands in [lo_rate, hi_rate].
inline Calibration
calibrate_sigma(std::size_t trials, std::uint64_t seed, LeakageParams leak = {}, const AttackConfig& cfg = {},
                double lo_rate = 0.002, double hi_rate = 0.005, std::size_t max_steps = 40)
{
  double sigma_lo = 0.0;
  double sigma_hi = 0.15 * leak.select_amp;
  Calibration c;
  for (c.steps = 1; c.steps <= max_steps; ++c.steps) {
    c.sigma = 0.5 * (sigma_lo + sigma_hi);
    leak.noise_sigma = c.sigma;
    c.first_window_error_rate = run_evaluation(trials, leak, seed, cfg).first_window_error_rate();
    if (c.first_window_error_rate < lo_rate)
      sigma_lo = c.sigma;
    else if (c.first_window_error_rate > hi_rate)
      sigma_hi = c.sigma;
    else {
      c.converged = true;
      break;
    }
  }
  return c;
}

} // namespace hqcspa
