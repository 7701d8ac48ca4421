#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace ik2 {

// Strict decimal u64: digits only, no sign, no overflow.
inline std::optional<std::uint64_t> parse_u64(const std::string& tok) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    return std::nullopt;
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace ik2
