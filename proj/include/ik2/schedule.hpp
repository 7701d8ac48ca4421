#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ik2 {

// Per-level subdivision arities for a square grid.
//
// A schedule k0..k_{L-1} covers a square of side k0*k1*...*k_{L-1}.  A bit at
// level l spans block_side(l) = side / (k0*...*kl) cells per dimension, so
// bits of the last level are single cells.  Matrices whose sides are not a
// schedule product are padded up to the side; padded cells carry no data.
class LevelSchedule {
 public:
  static constexpr std::uint64_t kMaxSide = std::uint64_t{1} << 31;

  static LevelSchedule from_ks(std::vector<std::uint32_t> ks) {
    if (ks.empty()) throw std::invalid_argument("schedule: no levels");
    std::uint64_t side = 1;
    for (auto k : ks) {
      if (k < 2) throw std::invalid_argument("schedule: every K must be at least 2");
      side *= k;
      if (side > kMaxSide) throw std::invalid_argument("schedule: side too large");
    }
    return LevelSchedule(std::move(ks), side);
  }

  // Smallest uniform-k schedule whose side covers min_side.
  static LevelSchedule uniform(std::uint32_t k, std::uint64_t min_side) {
    return prefix({k}, min_side);
  }

  // Shortest prefix of `front` covering min_side, extended by repeating the
  // last entry when the whole prefix is still too small.
  static LevelSchedule prefix(std::vector<std::uint32_t> front, std::uint64_t min_side) {
    if (front.empty()) throw std::invalid_argument("schedule: no levels");
    if (min_side < 1) throw std::invalid_argument("schedule: empty grid");
    std::vector<std::uint32_t> ks;
    std::uint64_t side = 1;
    for (auto k : front) {
      if (!ks.empty() && side >= min_side) break;
      ks.push_back(k);
      side *= k;  // from_ks re-validates magnitude
      if (side > kMaxSide) break;
    }
    while (side < min_side) {
      ks.push_back(ks.back());
      side *= ks.back();
      if (side > kMaxSide) break;
    }
    return from_ks(std::move(ks));
  }

  // Index default for term matrices: K=4 on the first five levels and K=2
  // below, used only when the matrix is big enough to exercise all five
  // K=4 levels; smaller matrices use uniform K=2.
  static LevelSchedule rdf_default(std::uint64_t min_side) {
    if (min_side >= 1024) return prefix({4, 4, 4, 4, 4, 2}, min_side);
    return uniform(2, min_side);
  }

  // Instant-axis default: K=4 at the root, K=2 below.
  static LevelSchedule temporal_default(std::uint64_t min_side) {
    return prefix({4, 2}, min_side);
  }

  std::size_t levels() const { return ks_.size(); }
  std::uint32_t k(std::size_t l) const { return ks_[l]; }
  std::uint64_t side() const { return side_; }
  const std::vector<std::uint32_t>& ks() const { return ks_; }

  // Cells per dimension spanned by one bit at level l.
  std::uint64_t block_side(std::size_t l) const { return block_side_[l]; }

  // Bits per node below level l-1: k(l)^2.
  std::uint64_t child_count(std::size_t l) const {
    return std::uint64_t{ks_[l]} * ks_[l];
  }

  // Row-major child index of cell (r, c) within its level-l parent block.
  std::uint32_t child_digit(std::size_t l, std::uint64_t r, std::uint64_t c) const {
    const std::uint64_t bs = block_side_[l];
    return static_cast<std::uint32_t>(((r / bs) % ks_[l]) * ks_[l] + (c / bs) % ks_[l]);
  }

  // Mixed-radix path of (r, c) through all levels, root digit most significant.
  std::uint64_t path_key(std::uint64_t r, std::uint64_t c) const {
    std::uint64_t key = 0;
    for (std::size_t l = 0; l < ks_.size(); ++l)
      key = key * child_count(l) + child_digit(l, r, c);
    return key;
  }

  // path_key(r, c) / key_div(l) is the distinct id of (r, c)'s level-l block.
  std::uint64_t key_div(std::size_t l) const { return key_div_[l]; }

  bool operator==(const LevelSchedule& o) const { return ks_ == o.ks_; }

 private:
  LevelSchedule(std::vector<std::uint32_t> ks, std::uint64_t side)
      : ks_(std::move(ks)), side_(side) {
    block_side_.resize(ks_.size());
    key_div_.resize(ks_.size());
    std::uint64_t bs = side_;
    for (std::size_t l = 0; l < ks_.size(); ++l) {
      bs /= ks_[l];
      block_side_[l] = bs;
    }
    std::uint64_t div = 1;
    for (std::size_t l = ks_.size(); l-- > 0;) {
      key_div_[l] = div;
      div *= child_count(l);
    }
  }

  std::vector<std::uint32_t> ks_;
  std::uint64_t side_ = 0;
  std::vector<std::uint64_t> block_side_;
  std::vector<std::uint64_t> key_div_;
};

}  // namespace ik2
