#pragma once

// CSV exports for plotting traces and confusion matrices.

#include "hqcspa/attack.hpp"
#include "hqcspa/evaluation.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace hqcspa {

// index,value,peak -- peak is 1 on the main peaks picked in each window.
inline void
export_trace_csv(const Trace& t, const std::filesystem::path& path, const AttackConfig& cfg = {})
{
  const ScanLayout layout = ScanLayout::from(cfg, t.meta);
  std::set<std::size_t> peaks;
  for (std::size_t k = 0; k < kWindows; ++k) {
    std::span<const float> seg;
    try {
      seg = crop_window(t, k, layout);
    } catch (const std::exception&) {
      break;
    }
    const std::size_t base = layout.scan_offset + k * layout.window_len();
    for (std::size_t p : window_peaks(seg, layout.samples_per_iter, cfg).mains.indices)
      peaks.insert(base + p);
  }

  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("export_trace_csv: cannot open " + path.string());
  out << "index,value,peak\n";
  char line[64];
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%d\n", i, double(t.samples[i]), peaks.count(i) ? 1 : 0);
    out << line;
  }
  if (!out)
    throw std::runtime_error("export_trace_csv: write failed for " + path.string());
}

// 16x16 row-normalised matrix, rows = actual value, six decimals.
inline void
export_matrix_csv(const ConfusionMatrix& cm, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("export_matrix_csv: cannot open " + path.string());
  const auto m = cm.normalized();
  char cell[32];
  for (const auto& row : m) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(cell, sizeof cell, "%s%.6f", c ? "," : "", row[c]);
      out << cell;
    }
    out << '\n';
  }
  if (!out)
    throw std::runtime_error("export_matrix_csv: write failed for " + path.string());
}

} // namespace hqcspa
