#pragma once

#include <stdexcept>
#include <string>

namespace ik2 {

// Raised when serialized input fails validation: bad magic, version or mode
// bytes, truncated payload, or bit counts that contradict the level recurrence.
struct format_error : std::runtime_error {
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a query asks a strategy for a pattern shape it does not serve
// (the lazy evaluator rejects fixed-y patterns).
struct unsupported_strategy : std::logic_error {
  explicit unsupported_strategy(const std::string& what) : std::logic_error(what) {}
};

// Raised by text readers on malformed lines; the message names the 1-based
// line number.
struct parse_error : std::runtime_error {
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ik2
