#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hqcspa {

// Fixed-width, lowercase, no prefix.
inline std::string
to_hex(std::uint64_t v)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4)
    s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

// Accepts an optional 0x prefix and up to 16 hex digits.
inline std::uint64_t
parse_hex(std::string_view s)
{
  if (s.starts_with("0x") || s.starts_with("0X"))
    s.remove_prefix(2);
  if (s.empty() || s.size() > 16)
    throw std::invalid_argument("bad hex limb '" + std::string(s) + "'");
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("bad hex limb '" + std::string(s) + "'");
  return v;
}

} // namespace hqcspa
