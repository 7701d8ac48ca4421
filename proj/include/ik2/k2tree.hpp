#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "ik2/bitvector.hpp"
#include "ik2/schedule.hpp"
#include "ik2/triples.hpp"

namespace ik2 {

// Quadtree-style representation of a binary relation over a padded square.
//
// T concatenates the internal levels in level order; L holds the last level.
// Positions are numbered in the combined T:L space, so level_begin(levels())
// equals |T| + |L|.  A set bit at position p of level l owns k(l+1)^2 child
// bits starting at child_base(p, l); with a uniform schedule that base equals
// the classical rank1(T, p+1) * K^2.
class K2Tree {
 public:
  using Pair = std::pair<std::uint64_t, std::uint64_t>;

  K2Tree() : sched_(LevelSchedule::uniform(2, 2)) {}

  // Bottom-up build from the pair list: each level's distinct blocks are the
  // quotients of the sorted path keys, and each level's bitmap is a merge
  // scan of consecutive levels.  No dense matrix is materialized.
  static K2Tree build(std::vector<Pair> pairs, std::uint64_t nrows,
                      std::uint64_t ncols, LevelSchedule sched) {
    if (nrows == 0 || ncols == 0) throw std::invalid_argument("k2tree: empty dimensions");
    if (sched.side() < nrows || sched.side() < ncols)
      throw std::invalid_argument("k2tree: schedule side smaller than the matrix");
    for (const auto& [r, c] : pairs)
      if (r >= nrows || c >= ncols) throw std::invalid_argument("k2tree: pair out of bounds");

    std::vector<std::uint64_t> keys(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      keys[i] = sched.path_key(pairs[i].first, pairs[i].second);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    K2Tree tree;
    tree.sched_ = sched;
    tree.nrows_ = nrows;
    tree.ncols_ = ncols;
    tree.npairs_ = keys.size();
    const std::size_t levels = sched.levels();

    // blocks[l]: sorted ids of nonempty level-l blocks.
    std::vector<std::vector<std::uint64_t>> blocks(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      auto& dst = blocks[l];
      const std::uint64_t div = sched.key_div(l);
      dst.reserve(keys.size());
      for (auto key : keys) {
        const std::uint64_t b = key / div;
        if (dst.empty() || dst.back() != b) dst.push_back(b);
      }
    }

    BitBuffer tbits;
    BitBuffer lbits;
    std::vector<std::uint64_t> level_size(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      BitBuffer& out = (l + 1 == levels) ? lbits : tbits;
      const std::size_t before = out.size();
      const std::uint64_t fanout = sched.child_count(l);
      const auto& present = blocks[l];
      std::size_t ptr = 0;
      auto emit_children = [&](std::uint64_t parent) {
        const std::uint64_t base = parent * fanout;
        for (std::uint64_t c = 0; c < fanout; ++c) {
          const bool here = ptr < present.size() && present[ptr] == base + c;
          if (here) ++ptr;
          out.push_back(here);
        }
      };
      if (l == 0) {
        emit_children(0);
      } else {
        for (auto parent : blocks[l - 1]) emit_children(parent);
      }
      level_size[l] = out.size() - before;
    }

    tree.t_ = BitVector(std::move(tbits));
    tree.l_ = BitVector(std::move(lbits));
    tree.index_levels(level_size);
    return tree;
  }

  std::uint64_t nrows() const { return nrows_; }
  std::uint64_t ncols() const { return ncols_; }
  std::uint64_t npairs() const { return npairs_; }
  const LevelSchedule& schedule() const { return sched_; }
  const BitVector& t() const { return t_; }
  const BitVector& l() const { return l_; }
  std::uint64_t total_bits() const { return t_.size() + l_.size(); }
  std::uint64_t total_ones() const { return t_.ones() + l_.ones(); }

  // Start of level l in the combined T:L position space.
  std::uint64_t level_begin(std::size_t l) const { return level_begin_[l]; }

  bool bit(std::uint64_t pos) const {
    return pos < t_.size() ? t_.get(pos) : l_.get(pos - t_.size());
  }

  // First child position of the set bit at pos (an internal level l).
  std::uint64_t child_base(std::uint64_t pos, std::size_t level) const {
    return level_begin_[level + 1] +
           (t_.rank1(pos) - ones_before_[level]) * sched_.child_count(level + 1);
  }

  bool contains(std::uint64_t r, std::uint64_t c) const {
    if (r >= nrows_ || c >= ncols_) throw std::invalid_argument("k2tree: cell out of bounds");
    const std::size_t levels = sched_.levels();
    std::uint64_t pos = sched_.child_digit(0, r, c);
    for (std::size_t l = 0;; ++l) {
      if (l + 1 == levels) return l_.get(pos - t_.size());
      if (!t_.get(pos)) return false;
      pos = child_base(pos, l) + sched_.child_digit(l + 1, r, c);
    }
  }

  // All pairs inside the row/column constraints, sorted (row, col) ascending.
  std::vector<Pair> query(const DimConstraint& rows, const DimConstraint& cols) const {
    rows.validate(nrows_, "row");
    cols.validate(ncols_, "col");
    const auto [rlo, rhi] = rows.bounds(nrows_);
    const auto [clo, chi] = cols.bounds(ncols_);
    std::vector<Pair> out;
    visit(0, 0, 0, 0, rlo, rhi, clo, chi, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void index_levels(const std::vector<std::uint64_t>& level_size) {
    const std::size_t levels = sched_.levels();
    level_begin_.assign(levels + 1, 0);
    ones_before_.assign(levels, 0);
    for (std::size_t l = 0; l < levels; ++l)
      level_begin_[l + 1] = level_begin_[l] + level_size[l];
    for (std::size_t l = 0; l + 1 < levels; ++l)
      ones_before_[l + 1] = t_.rank1(level_begin_[l + 1]);
  }

  void visit(std::size_t level, std::uint64_t base, std::uint64_t r0, std::uint64_t c0,
             std::uint64_t rlo, std::uint64_t rhi, std::uint64_t clo, std::uint64_t chi,
             std::vector<Pair>& out) const {
    const std::uint32_t K = sched_.k(level);
    const std::uint64_t bs = sched_.block_side(level);
    const bool last = level + 1 == sched_.levels();
    for (std::uint32_t i = 0; i < K; ++i) {
      const std::uint64_t r = r0 + i * bs;
      if (r > rhi || r + bs - 1 < rlo) continue;
      for (std::uint32_t j = 0; j < K; ++j) {
        const std::uint64_t c = c0 + j * bs;
        if (c > chi || c + bs - 1 < clo) continue;
        const std::uint64_t pos = base + i * K + j;
        if (last) {
          if (l_.get(pos - t_.size())) out.emplace_back(r, c);
        } else if (t_.get(pos)) {
          visit(level + 1, child_base(pos, level), r, c, rlo, rhi, clo, chi, out);
        }
      }
    }
  }

  LevelSchedule sched_;
  std::uint64_t nrows_ = 0;
  std::uint64_t ncols_ = 0;
  std::uint64_t npairs_ = 0;
  BitVector t_;
  BitVector l_;
  std::vector<std::uint64_t> level_begin_;   // combined T:L coordinates
  std::vector<std::uint64_t> ones_before_;   // ones in T before each level
};

}  // namespace ik2
