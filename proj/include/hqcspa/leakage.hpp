#pragma once

// Synthetic power traces of the table-scan window loop.
//
// Every scan iteration emits one main peak whose height is
//   base_amp + select_amp*[iteration == nibble] + state_amp*HW(g) + noise
// where g is the accumulator after the iteration. In windows 1..15 each main
// peak is accompanied by a smaller secondary peak that sits to its left until
// the selected entry has been accumulated and to its right from then on.
// Window 0 carries no secondary peaks.

#include "hqcspa/gf2x.hpp"
#include "hqcspa/hex.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hqcspa {

inline constexpr std::size_t kWindows = 16;
inline constexpr std::size_t kIterationsPerWindow = 16;

struct LeakageParams
{
  std::size_t samples_per_iter = 28;
  double base_amp = 1.0;
  double select_amp = 0.2;
  double state_amp = 0.002;
  double sub_amp = 0.35;
  double noise_sigma = 0.0;
  std::size_t trace_len = 7500; // capture length used on the real target
  std::size_t scan_offset = 166;

  std::size_t scan_len() const { return kWindows * kIterationsPerWindow * samples_per_iter; }

  void validate() const
  {
    if (samples_per_iter < 2)
      throw std::invalid_argument("LeakageParams: samples_per_iter must be >= 2");
    if (base_amp < 0 || select_amp < 0 || state_amp < 0 || sub_amp < 0)
      throw std::invalid_argument("LeakageParams: amplitudes must be non-negative");
    if (!(noise_sigma >= 0))
      throw std::invalid_argument("LeakageParams: noise_sigma must be non-negative");
    if (trace_len < scan_offset + scan_len())
      throw std::invalid_argument("LeakageParams: trace_len too short for the scan region");
  }
};

struct TraceMeta
{
  std::string kernel = "win";
  std::size_t windows = kWindows;
  std::size_t samples_per_iter = 28;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<Limb> truth;

  friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

struct Trace
{
  std::vector<float> samples;
  TraceMeta meta;

  friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceFormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Where peaks sit inside one iteration's samples.
struct IterationShape
{
  std::size_t main_center;
  std::size_t main_half_width;
  std::size_t sub_offset;
  std::size_t sub_half_width;

  static IterationShape for_width(std::size_t spi)
  {
    return { spi / 2, spi / 9, std::max<std::size_t>(1, spi * 2 / 7), spi / 14 };
  }
};

namespace detail {

inline void
stamp_peak(std::vector<double>& buf, std::size_t center, std::size_t half_width, double amp)
{
  const double span = static_cast<double>(half_width + 1);
  const std::size_t lo = center >= half_width ? center - half_width : 0;
  for (std::size_t s = lo; s <= center + half_width && s < buf.size(); ++s) {
    const double d = s > center ? double(s - center) : double(center - s);
    buf[s] = std::max(buf[s], amp * (1.0 - d / span));
  }
}

} // namespace detail

// Per-iteration main-peak heights (noise free) for one window.
inline std::array<double, kIterationsPerWindow>
iteration_heights(const LookupTable& u, Limb nibble, const LeakageParams& p)
{
  std::array<double, kIterationsPerWindow> h{};
  Limb g = 0;
  for (Limb i = 0; i < kIterationsPerWindow; ++i) {
    g ^= u[i] & detail::select_mask(nibble, i);
    h[i] = p.base_amp + (i == nibble ? p.select_amp : 0.0) + p.state_amp * std::popcount(g);
  }
  return h;
}

// Deterministic in (a, b, params, seed). Noise draws are taken for every
// sample whatever the sigma, so one seed gives the same normalised noise
// pattern at every noise level.
inline Trace
simulate_trace(Limb a, Limb b, const LeakageParams& params, std::uint64_t seed)
{
  params.validate();
  const std::size_t spi = params.samples_per_iter;
  const IterationShape shape = IterationShape::for_width(spi);
  const LookupTable u = build_table(b);

  std::vector<double> clean(params.trace_len, 0.0);
  for (std::size_t k = 0; k < kWindows; ++k) {
    const Limb t = (a >> (4 * k)) & 15;
    const auto heights = iteration_heights(u, t, params);
    for (std::size_t i = 0; i < kIterationsPerWindow; ++i) {
      const std::size_t base = params.scan_offset + (k * kIterationsPerWindow + i) * spi;
      const std::size_t center = base + shape.main_center;
      detail::stamp_peak(clean, center, shape.main_half_width, heights[i]);
      if (k == 0)
        continue;
      const std::size_t sub_center = i < t ? center - shape.sub_offset : center + shape.sub_offset;
      detail::stamp_peak(clean, sub_center, shape.sub_half_width, params.sub_amp);
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Trace tr;
  tr.samples.resize(params.trace_len);
  for (std::size_t s = 0; s < params.trace_len; ++s)
    tr.samples[s] = static_cast<float>(clean[s] + params.noise_sigma * noise(rng));

  tr.meta.kernel = std::string(kernel_name(Kernel::window));
  tr.meta.windows = kWindows;
  tr.meta.samples_per_iter = spi;
  tr.meta.noise_sigma = params.noise_sigma;
  tr.meta.seed = seed;
  tr.meta.truth = a;
  return tr;
}

inline nlohmann::json
meta_to_json(const TraceMeta& m)
{
  nlohmann::json j{ { "kernel", m.kernel },
                    { "windows", m.windows },
                    { "samples_per_iter", m.samples_per_iter },
                    { "noise_sigma", m.noise_sigma },
                    { "seed", m.seed } };
  if (m.truth)
    j["truth"] = to_hex(*m.truth);
  return j;
}

inline TraceMeta
meta_from_json(const nlohmann::json& j)
{
  TraceMeta m;
  m.kernel = j.at("kernel").get<std::string>();
  m.windows = j.at("windows").get<std::size_t>();
  m.samples_per_iter = j.at("samples_per_iter").get<std::size_t>();
  m.noise_sigma = j.at("noise_sigma").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("truth") && !j.at("truth").is_null())
    m.truth = parse_hex(j.at("truth").get<std::string>());
  return m;
}

// "GFT1" | u32 count (LE) | count x f32 (LE) | UTF-8 JSON metadata to EOF
inline void
write_trace(const Trace& t, const std::filesystem::path& path)
{
  if (t.samples.empty())
    throw std::invalid_argument("write_trace: empty sample sequence");
  if (t.samples.size() > 0xFFFFFFFFu)
    throw std::invalid_argument("write_trace: too many samples");

  std::string buf = "GFT1";
  auto put_u32 = [&buf](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put_u32(static_cast<std::uint32_t>(t.samples.size()));
  for (float f : t.samples)
    put_u32(std::bit_cast<std::uint32_t>(f));
  buf += meta_to_json(t.meta).dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("write_trace: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out)
    throw std::runtime_error("write_trace: write failed for " + path.string());
}

inline Trace
read_trace(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("read_trace: cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 8 || buf.compare(0, 4, "GFT1") != 0)
    throw TraceFormatError("read_trace: bad magic in " + path.string());
  auto get_u32 = [&buf](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t{ static_cast<unsigned char>(buf[off + i]) } << (8 * i);
    return v;
  };
  const std::size_t count = get_u32(4);
  const std::size_t payload_end = 8 + 4 * count;
  if (buf.size() < payload_end)
    throw TraceFormatError("read_trace: truncated sample payload in " + path.string());

  Trace t;
  t.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.samples[i] = std::bit_cast<float>(get_u32(8 + 4 * i));

  try {
    t.meta = meta_from_json(nlohmann::json::parse(buf.begin() + static_cast<std::ptrdiff_t>(payload_end), buf.end()));
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError(std::string("read_trace: bad metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw TraceFormatError(std::string("read_trace: bad metadata: ") + e.what());
  }
  return t;
}

} // namespace hqcspa
