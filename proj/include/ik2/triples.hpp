#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace ik2 {

struct Triple {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t z = 0;
  auto operator<=>(const Triple&) const = default;
};

// (x, z, y) ascending: the order query results are reported in.
inline bool xzy_less(const Triple& a, const Triple& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.z != b.z) return a.z < b.z;
  return a.y < b.y;
}

// One dimension of a pattern: everything, one id, or an inclusive id range.
struct DimConstraint {
  enum class Kind : std::uint8_t { Any, Fixed, Range };

  Kind kind = Kind::Any;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  static DimConstraint any() { return {}; }
  static DimConstraint fixed(std::uint64_t v) { return {Kind::Fixed, v, v}; }
  static DimConstraint range(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("pattern: inverted range");
    return {Kind::Range, lo, hi};
  }

  bool is_any() const { return kind == Kind::Any; }
  bool is_fixed() const { return kind == Kind::Fixed; }

  bool contains(std::uint64_t v) const {
    return kind == Kind::Any || (v >= lo && v <= hi);
  }

  // Inclusive bounds against a dimension of size n; bounded kinds must
  // already lie within the dimension.
  std::pair<std::uint64_t, std::uint64_t> bounds(std::uint64_t n) const {
    if (kind == Kind::Any) return {0, n - 1};
    return {lo, hi};
  }

  // Bounded constraints must name existing ids.
  void validate(std::uint64_t n, const char* what) const {
    if (kind != Kind::Any && hi >= n)
      throw std::invalid_argument(std::string("pattern: ") + what + " id out of bounds");
  }
};

struct TriplePattern {
  DimConstraint x, y, z;
};

}  // namespace ik2
