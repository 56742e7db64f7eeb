#pragma once

// Local-maximum peak picking with prominence and distance filtering, after
// the semantics of scipy.signal.find_peaks.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace hqcspa {

struct PeakSet
{
  std::vector<std::size_t> indices; // strictly increasing
  std::vector<double> heights;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

// Topographic prominence of the peak at `p`: height minus the higher of the
// two lowest points reached before meeting a strictly higher sample (or the
// edge) on each side.
template<typename T>
double
peak_prominence(std::span<const T> x, std::size_t p)
{
  const double h = x[p];
  double left_min = h;
  for (std::size_t i = p; i-- > 0;) {
    if (x[i] > h)
      break;
    left_min = std::min<double>(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = p + 1; i < x.size(); ++i) {
    if (x[i] > h)
      break;
    right_min = std::min<double>(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

template<typename T>
PeakSet
find_peaks(std::span<const T> x, std::size_t min_distance = 1, double min_prominence = 0.0)
{
  if (min_distance < 1)
    throw std::invalid_argument("find_peaks: min_distance must be >= 1");

  // Candidates: strictly above the left neighbour and above the sample
  // after any plateau; a plateau reports its leftmost index.
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (!(x[i] > x[i - 1]))
      continue;
    std::size_t j = i;
    while (j + 1 < x.size() && x[j + 1] == x[i])
      ++j;
    if (j + 1 < x.size() && x[j + 1] < x[i])
      cand.push_back(i);
    i = j;
  }

  std::erase_if(cand, [&](std::size_t p) { return peak_prominence(x, p) < min_prominence; });

  if (min_distance > 1 && cand.size() > 1) {
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return x[cand[l]] > x[cand[r]]; });

    std::vector<bool> keep(cand.size(), true);
    for (std::size_t oi : order) {
      if (!keep[oi])
        continue;
      for (std::size_t k = oi; k-- > 0 && cand[oi] - cand[k] < min_distance;)
        keep[k] = false;
      for (std::size_t k = oi + 1; k < cand.size() && cand[k] - cand[oi] < min_distance; ++k)
        keep[k] = false;
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (keep[i])
        kept.push_back(cand[i]);
    cand = std::move(kept);
  }

  PeakSet ps;
  ps.indices = cand;
  ps.heights.reserve(cand.size());
  for (std::size_t p : cand)
    ps.heights.push_back(static_cast<double>(x[p]));
  return ps;
}

template<typename T>
PeakSet
find_peaks(const std::vector<T>& x, std::size_t min_distance = 1, double min_prominence = 0.0)
{
  return find_peaks(std::span<const T>(x), min_distance, min_prominence);
}

} // namespace hqcspa
