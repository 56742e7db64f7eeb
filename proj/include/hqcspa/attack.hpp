#pragma once

// Single-trace SPA on the table-scan loop: crop each 4-bit window, pick
// peaks, and read the selected table index either from the drop after the
// tallest peak or from the side on which secondary peaks sit.

#include "hqcspa/hex.hpp"
#include "hqcspa/hqc.hpp"
#include "hqcspa/leakage.hpp"
#include "hqcspa/peaks.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hqcspa {

using Nibble = std::uint8_t;

struct AttackConfig
{
  // Start of the scan region and per-iteration width. A zero width means
  // "take samples_per_iter from the trace metadata".
  std::size_t scan_offset = 166;
  std::size_t samples_per_iter = 0;

  // Main-peak picking distance as a fraction of the iteration width.
  double main_distance_frac = 0.75;
  // Distance used when picking main and secondary peaks together.
  std::size_t sub_min_distance = 4;
  double min_prominence = 0.15;

  // A drop counts when it exceeds drop_fraction * select_estimate.
  double select_estimate = 0.2;
  double drop_fraction = 0.3;

  double drop_threshold() const { return drop_fraction * select_estimate; }
};

inline void
to_json(nlohmann::json& j, const AttackConfig& c)
{
  j = nlohmann::json{ { "scan_offset", c.scan_offset },
                      { "samples_per_iter", c.samples_per_iter },
                      { "main_distance_frac", c.main_distance_frac },
                      { "sub_min_distance", c.sub_min_distance },
                      { "min_prominence", c.min_prominence },
                      { "select_estimate", c.select_estimate },
                      { "drop_fraction", c.drop_fraction } };
}

inline void
from_json(const nlohmann::json& j, AttackConfig& c)
{
  AttackConfig d;
  c.scan_offset = j.value("scan_offset", d.scan_offset);
  c.samples_per_iter = j.value("samples_per_iter", d.samples_per_iter);
  c.main_distance_frac = j.value("main_distance_frac", d.main_distance_frac);
  c.sub_min_distance = j.value("sub_min_distance", d.sub_min_distance);
  c.min_prominence = j.value("min_prominence", d.min_prominence);
  c.select_estimate = j.value("select_estimate", d.select_estimate);
  c.drop_fraction = j.value("drop_fraction", d.drop_fraction);
}

struct ScanLayout
{
  std::size_t scan_offset = 0;
  std::size_t samples_per_iter = 0;

  std::size_t window_len() const { return kIterationsPerWindow * samples_per_iter; }

  static ScanLayout from(const AttackConfig& cfg, const TraceMeta& meta)
  {
    return { cfg.scan_offset, cfg.samples_per_iter ? cfg.samples_per_iter : meta.samples_per_iter };
  }
};

inline std::span<const float>
crop_window(const Trace& t, std::size_t window_index, const ScanLayout& layout)
{
  if (window_index >= kWindows)
    throw std::out_of_range("crop_window: window index must be in 0..15");
  if (layout.samples_per_iter == 0)
    throw std::invalid_argument("crop_window: zero iteration width");
  const std::size_t start = layout.scan_offset + window_index * layout.window_len();
  if (start + layout.window_len() > t.samples.size())
    throw std::out_of_range("crop_window: window extends past end of trace");
  return std::span<const float>(t.samples).subspan(start, layout.window_len());
}

// Splits peaks at the midpoint of their height range: the upper group are
// main peaks, the lower group secondary peaks.
inline std::pair<PeakSet, PeakSet>
split_main_secondary(const PeakSet& all)
{
  PeakSet mains, subs;
  if (all.empty())
    return { mains, subs };
  const auto [lo, hi] = std::minmax_element(all.heights.begin(), all.heights.end());
  const double mid = 0.5 * (*lo + *hi);
  for (std::size_t i = 0; i < all.size(); ++i) {
    PeakSet& dst = (*hi > *lo && all.heights[i] < mid) ? subs : mains;
    dst.indices.push_back(all.indices[i]);
    dst.heights.push_back(all.heights[i]);
  }
  return { mains, subs };
}

// Index of the peak right before the largest interior drop. A drop right
// after the first peak is not interior: values 0 and 15 are told apart by
// whether the tallest peak comes first or last.
inline std::optional<Nibble>
classify_window_drop(const PeakSet& peaks, double drop_threshold)
{
  if (peaks.size() != kIterationsPerWindow)
    return std::nullopt;
  const auto& h = peaks.heights;

  std::size_t best = 0;
  double best_drop = 0.0;
  for (std::size_t j = 1; j + 1 < h.size(); ++j) {
    const double d = h[j] - h[j + 1];
    if (d > best_drop) {
      best_drop = d;
      best = j;
    }
  }
  if (best_drop > drop_threshold)
    return static_cast<Nibble>(best);

  const auto top = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
  if (top == 0)
    return Nibble{ 0 };
  if (top == h.size() - 1)
    return Nibble{ 15 };
  return std::nullopt;
}

// Index of the first main peak whose secondary peak lies on its right.
inline std::optional<Nibble>
classify_window_secondary(const PeakSet& mains, const PeakSet& subs)
{
  if (mains.size() != kIterationsPerWindow)
    return std::nullopt;

  auto dist = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };

  // Nearest secondary for each main (secondaries belong to their nearest main).
  std::array<std::optional<std::size_t>, kIterationsPerWindow> partner;
  for (std::size_t s : subs.indices) {
    std::size_t owner = 0;
    for (std::size_t m = 1; m < mains.size(); ++m)
      if (dist(mains.indices[m], s) < dist(mains.indices[owner], s))
        owner = m;
    if (!partner[owner] || dist(s, mains.indices[owner]) < dist(*partner[owner], mains.indices[owner]))
      partner[owner] = s;
  }

  for (std::size_t m = 0; m < mains.size(); ++m)
    if (partner[m] && *partner[m] > mains.indices[m])
      return static_cast<Nibble>(m);
  return std::nullopt;
}

enum class WindowMethod
{
  none,
  drop,
  secondary,
};

struct RecoveryReport
{
  std::array<Nibble, kWindows> recovered{};
  std::array<bool, kWindows> classified{};
  std::array<WindowMethod, kWindows> method{};
  std::optional<std::array<Nibble, kWindows>> truth;
  std::optional<std::array<bool, kWindows>> per_window_success;
  std::optional<bool> limb_success;
  AttackConfig config;

  Limb recovered_limb() const
  {
    Limb v = 0;
    for (std::size_t k = 0; k < kWindows; ++k)
      v |= Limb{ recovered[k] } << (4 * k);
    return v;
  }

  bool fully_classified() const
  {
    return std::all_of(classified.begin(), classified.end(), [](bool b) { return b; });
  }
};

inline std::array<Nibble, kWindows>
nibbles_of(Limb v)
{
  std::array<Nibble, kWindows> n{};
  for (std::size_t k = 0; k < kWindows; ++k)
    n[k] = static_cast<Nibble>((v >> (4 * k)) & 15);
  return n;
}

struct WindowPeaks
{
  PeakSet mains; // distance-thinned, one per iteration
  PeakSet all;   // main and secondary peaks together
};

inline WindowPeaks
window_peaks(std::span<const float> seg, std::size_t samples_per_iter, const AttackConfig& cfg)
{
  const auto main_dist =
    std::max<std::size_t>(1, static_cast<std::size_t>(cfg.main_distance_frac * double(samples_per_iter)));
  return { find_peaks(seg, main_dist, cfg.min_prominence),
           find_peaks(seg, std::max<std::size_t>(1, cfg.sub_min_distance), cfg.min_prominence) };
}

// Never throws for a malformed or short trace: windows that cannot be
// cropped or classified are reported as failures.
inline RecoveryReport
recover_limb(const Trace& t, const AttackConfig& cfg = {})
{
  RecoveryReport rep;
  rep.config = cfg;
  const ScanLayout layout = ScanLayout::from(cfg, t.meta);

  for (std::size_t k = 0; k < kWindows; ++k) {
    std::span<const float> seg;
    try {
      seg = crop_window(t, k, layout);
    } catch (const std::exception&) {
      continue;
    }
    const WindowPeaks wp = window_peaks(seg, layout.samples_per_iter, cfg);

    std::optional<Nibble> v;
    WindowMethod how = WindowMethod::none;
    if (k > 0) {
      const auto [mains, subs] = split_main_secondary(wp.all);
      v = classify_window_secondary(mains, subs);
      if (v)
        how = WindowMethod::secondary;
    }
    if (!v) {
      v = classify_window_drop(wp.mains, cfg.drop_threshold());
      if (v)
        how = WindowMethod::drop;
    }
    rep.recovered[k] = v.value_or(0);
    rep.classified[k] = v.has_value();
    rep.method[k] = how;
  }

  if (t.meta.truth) {
    rep.truth = nibbles_of(*t.meta.truth);
    std::array<bool, kWindows> ok{};
    bool all = true;
    for (std::size_t k = 0; k < kWindows; ++k) {
      ok[k] = rep.classified[k] && rep.recovered[k] == (*rep.truth)[k];
      all = all && ok[k];
    }
    rep.per_window_success = ok;
    rep.limb_success = all;
  }
  return rep;
}

inline nlohmann::json
report_to_json(const RecoveryReport& r)
{
  nlohmann::json j;
  j["recovered"] = to_hex(r.recovered_limb());
  j["classified"] = r.classified;
  j["truth"] = nullptr;
  j["per_window_success"] = nullptr;
  j["limb_success"] = nullptr;
  if (r.truth) {
    Limb v = 0;
    for (std::size_t k = 0; k < kWindows; ++k)
      v |= Limb{ (*r.truth)[k] } << (4 * k);
    j["truth"] = to_hex(v);
  }
  if (r.per_window_success)
    j["per_window_success"] = *r.per_window_success;
  if (r.limb_success)
    j["limb_success"] = *r.limb_success;
  nlohmann::json methods = nlohmann::json::array();
  for (WindowMethod m : r.method)
    methods.push_back(m == WindowMethod::drop ? "drop" : m == WindowMethod::secondary ? "secondary" : "none");
  j["method"] = methods;
  j["config"] = r.config;
  return j;
}

// Traces of the base calls whose key operand is a raw limb of y, with the
// limb index each trace belongs to.
struct KeyTraceSet
{
  std::vector<Trace> traces;
  std::vector<std::ptrdiff_t> mapping;
};

inline KeyTraceSet
capture_key_traces(const Ciphertext& ct, const SecretKey& sk, const LeakageParams& leak, std::uint64_t seed,
                   const MulSpec& spec = {})
{
  KeyTraceSet set;
  std::uint64_t state = seed;
  auto observer = [&](const BaseCall& call) {
    if (call.a_limb < 0)
      return;
    set.traces.push_back(simulate_trace(call.a, call.b, leak, splitmix64(state)));
    set.mapping.push_back(call.a_limb);
  };
  decrypt_mul(ct, sk, spec, observer);
  return set;
}

struct KeyRecovery
{
  GF2Poly y;
  std::vector<bool> limb_recovered;
  std::optional<std::vector<bool>> limb_correct;
  std::optional<bool> exact;
  std::vector<RecoveryReport> reports;
};

inline KeyRecovery
recover_key(std::span<const Trace> traces, std::span<const std::ptrdiff_t> mapping, const RingParams& params,
            const AttackConfig& cfg = {}, const SecretKey* truth = nullptr)
{
  params.validate();
  if (traces.size() != mapping.size())
    throw std::invalid_argument("recover_key: one mapping entry per trace required");

  const std::size_t nlimbs = (params.n + 63) / 64;
  std::vector<Limb> limbs(nlimbs, 0);
  KeyRecovery out;
  out.limb_recovered.assign(nlimbs, false);

  for (std::size_t i = 0; i < traces.size(); ++i) {
    RecoveryReport rep = recover_limb(traces[i], cfg);
    const std::ptrdiff_t li = mapping[i];
    if (li >= 0 && static_cast<std::size_t>(li) < nlimbs && rep.fully_classified()) {
      limbs[static_cast<std::size_t>(li)] = rep.recovered_limb();
      out.limb_recovered[static_cast<std::size_t>(li)] = true;
    }
    out.reports.push_back(std::move(rep));
  }
  if (params.n % 64 != 0)
    limbs.back() &= (Limb{ 1 } << (params.n % 64)) - 1;
  out.y = GF2Poly(std::move(limbs), params.n);

  if (truth) {
    if (truth->n() != params.n)
      throw std::invalid_argument("recover_key: truth has a different ring dimension");
    std::vector<bool> ok(nlimbs);
    bool all = true;
    for (std::size_t l = 0; l < nlimbs; ++l) {
      ok[l] = out.limb_recovered[l] && out.y.limb(l) == truth->y.limb(l);
      all = all && ok[l];
    }
    out.limb_correct = std::move(ok);
    out.exact = all;
  }
  return out;
}

} // namespace hqcspa
