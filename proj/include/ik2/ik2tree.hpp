#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "ik2/bitvector.hpp"
#include "ik2/errors.hpp"
#include "ik2/schedule.hpp"
#include "ik2/triples.hpp"

namespace ik2 {

// One node of the interleaved tree: `width` consecutive bits starting at
// `start` in the combined T:L space.  The node describes the block whose
// top-left cell is (origin_row, origin_col); rows index x, columns index z.
struct NodeCursor {
  std::uint64_t start = 0;
  std::uint64_t width = 0;
  std::uint32_t level = 0;
  std::uint64_t origin_row = 0;
  std::uint64_t origin_col = 0;
};

// Interleaved tree over ternary relations (x, y, z): one quadtree shape on
// the (x, z) grid whose nodes hold one bit per active y value instead of one
// bit per block.
//
// Level 0 always holds k0^2 nodes of ysize bits each.  A node with m >= 1
// ones owns k^2 children of m bits each, laid out consecutively; bit j of a
// child refers to the y value of the parent's (j+1)-th set bit.  An all-zero
// node owns no children.  T concatenates the internal levels, L is the last
// level; a leaf node describes a single cell, one bit per surviving y.
class IK2Tree {
 public:
  IK2Tree() : sched_(LevelSchedule::uniform(2, 2)) {}

  static IK2Tree build(const std::vector<Triple>& triples, std::uint64_t nx,
                       std::uint64_t ysize, std::uint64_t nz, LevelSchedule sched,
                       bool l_rank = false) {
    if (nx == 0 || ysize == 0 || nz == 0)
      throw std::invalid_argument("ik2tree: empty dimensions");
    if (sched.side() < nx || sched.side() < nz)
      throw std::invalid_argument("ik2tree: schedule side smaller than the matrix");
    if (ysize > LevelSchedule::kMaxSide)
      throw std::invalid_argument("ik2tree: ysize too large");
    for (const auto& t : triples)
      if (t.x >= nx || t.y >= ysize || t.z >= nz)
        throw std::invalid_argument("ik2tree: triple out of bounds");

    const std::size_t levels = sched.levels();

    // present[l]: sorted distinct (level-l block id, y) pairs, derived bottom
    // up from the triple list; no dense matrix is ever materialized.
    using BlockY = std::pair<std::uint64_t, std::uint64_t>;
    std::vector<std::vector<BlockY>> present(levels);
    {
      auto& leaf = present[levels - 1];
      leaf.reserve(triples.size());
      for (const auto& t : triples) leaf.emplace_back(sched.path_key(t.x, t.z), t.y);
      std::sort(leaf.begin(), leaf.end());
      leaf.erase(std::unique(leaf.begin(), leaf.end()), leaf.end());
    }
    for (std::size_t l = levels - 1; l-- > 0;) {
      const std::uint64_t fanout = sched.child_count(l + 1);
      auto& dst = present[l];
      dst.reserve(present[l + 1].size());
      for (const auto& [block, y] : present[l + 1]) dst.emplace_back(block / fanout, y);
      std::sort(dst.begin(), dst.end());
      dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    }

    IK2Tree tree;
    tree.sched_ = sched;
    tree.nx_ = nx;
    tree.ysize_ = ysize;
    tree.nz_ = nz;
    tree.l_rank_ = l_rank;
    tree.ntriples_ = present[levels - 1].size();

    BitBuffer tbits;
    BitBuffer lbits;
    std::vector<std::uint64_t> level_size(levels);

    {  // level 0: k0^2 nodes of ysize bits, all y values conceptually active
      BitBuffer& out = (levels == 1) ? lbits : tbits;  // a 1-level root is the leaf
      const std::uint64_t fanout = sched.child_count(0);
      std::size_t ptr = 0;
      const auto& p0 = present[0];
      for (std::uint64_t b = 0; b < fanout; ++b)
        for (std::uint64_t y = 0; y < ysize; ++y) {
          const bool here = ptr < p0.size() && p0[ptr] == BlockY{b, y};
          if (here) ++ptr;
          out.push_back(here);
        }
      level_size[0] = fanout * ysize;
    }

    for (std::size_t l = 1; l < levels; ++l) {
      BitBuffer& out = (l + 1 == levels) ? lbits : tbits;
      const std::size_t before = out.size();
      const std::uint64_t fanout = sched.child_count(l);
      const auto& up = present[l - 1];
      const auto& here = present[l];
      std::size_t ptr = 0;
      for (std::size_t g = 0; g < up.size();) {
        // one parent node: the run of (block, y) entries sharing a block
        std::size_t gend = g;
        while (gend < up.size() && up[gend].first == up[g].first) ++gend;
        const std::uint64_t parent = up[g].first;
        for (std::uint64_t c = 0; c < fanout; ++c) {
          const std::uint64_t child = parent * fanout + c;
          for (std::size_t a = g; a < gend; ++a) {
            const bool hit =
                ptr < here.size() && here[ptr] == BlockY{child, up[a].second};
            if (hit) ++ptr;
            out.push_back(hit);
          }
        }
        g = gend;
      }
      level_size[l] = out.size() - before;
    }

    tree.t_ = BitVector(std::move(tbits));
    tree.l_ = BitVector(std::move(lbits));
    tree.index_levels(level_size);
    return tree;
  }

  // Reassembles a tree from serialized parts, re-deriving the level geometry
  // from the bits themselves; any mismatch with the declared sizes is a
  // format error.
  static IK2Tree from_parts(LevelSchedule sched, std::uint64_t nx, std::uint64_t ysize,
                            std::uint64_t nz, bool l_rank, BitVector t, BitVector l) {
    if (nx == 0 || ysize == 0 || nz == 0) throw format_error("index: empty dimensions");
    if (sched.side() < nx || sched.side() < nz)
      throw format_error("index: schedule side smaller than the matrix");
    IK2Tree tree;
    tree.sched_ = sched;
    tree.nx_ = nx;
    tree.ysize_ = ysize;
    tree.nz_ = nz;
    tree.l_rank_ = l_rank;
    tree.t_ = std::move(t);
    tree.l_ = std::move(l);

    const std::size_t levels = sched.levels();
    std::vector<std::uint64_t> level_size(levels);
    std::uint64_t begin = 0;
    std::uint64_t width = sched.child_count(0) * ysize;
    for (std::size_t l = 0; l < levels; ++l) {
      level_size[l] = width;
      if (l + 1 == levels) {
        if (begin != tree.t_.size() || width != tree.l_.size())
          throw format_error("index: bit counts contradict the level recurrence");
      } else {
        if (begin + width > tree.t_.size())
          throw format_error("index: bit counts contradict the level recurrence");
        width = tree.t_.ones_in(begin, begin + width) * sched.child_count(l + 1);
        begin += level_size[l];
      }
    }
    tree.ntriples_ = tree.l_.ones();
    tree.index_levels(level_size);
    return tree;
  }

  std::uint64_t nx() const { return nx_; }
  std::uint64_t ysize() const { return ysize_; }
  std::uint64_t nz() const { return nz_; }
  std::uint64_t ntriples() const { return ntriples_; }
  bool l_rank_enabled() const { return l_rank_; }
  const LevelSchedule& schedule() const { return sched_; }
  const BitVector& t() const { return t_; }
  const BitVector& l() const { return l_; }
  std::uint64_t total_bits() const { return t_.size() + l_.size(); }
  std::uint64_t total_ones() const { return t_.ones() + l_.ones(); }
  std::size_t levels() const { return sched_.levels(); }
  std::uint64_t level_begin(std::size_t l) const { return level_begin_[l]; }

  NodeCursor root_cursor(std::uint32_t i) const {
    const std::uint32_t k0 = sched_.k(0);
    const std::uint64_t bs = sched_.block_side(0);
    return NodeCursor{i * ysize_, ysize_, 0, (i / k0) * bs, (i % k0) * bs};
  }

  bool is_leaf(const NodeCursor& cur) const { return cur.level + 1 == sched_.levels(); }

  bool node_bit(const NodeCursor& cur, std::uint64_t off) const {
    const auto& bits = bits_at(cur.level);
    return bits.get(local(cur.start, cur.level) + off);
  }

  std::uint64_t node_ones(const NodeCursor& cur) const {
    return ones_prefix(cur, cur.width);
  }

  // Ones among the first len bits of the node.
  std::uint64_t ones_prefix(const NodeCursor& cur, std::uint64_t len) const {
    const auto& bits = bits_at(cur.level);
    const std::uint64_t base = local(cur.start, cur.level);
    return bits.ones_in(base, base + len);
  }

  // fn(offset) for each set bit offset in [from, to) of the node.
  template <class Fn>
  void node_for_each_one(const NodeCursor& cur, std::uint64_t from, std::uint64_t to,
                         Fn&& fn) const {
    const auto& bits = bits_at(cur.level);
    const std::uint64_t base = local(cur.start, cur.level);
    bits.for_each_one(base + from, base + to,
                      [&](std::size_t p) { fn(static_cast<std::uint64_t>(p) - base); });
  }

  // Start of the first child node; cur must be internal with at least 1 one.
  std::uint64_t child_base(const NodeCursor& cur) const {
    return level_begin_[cur.level + 1] +
           (t_.rank1(cur.start) - ones_before_[cur.level]) *
               sched_.child_count(cur.level + 1);
  }

  NodeCursor child_cursor(const NodeCursor& cur, std::uint32_t ci, std::uint64_t m,
                          std::uint64_t base) const {
    const std::uint32_t K = sched_.k(cur.level + 1);
    const std::uint64_t bs = sched_.block_side(cur.level + 1);
    return NodeCursor{base + ci * m, m, cur.level + 1,
                      cur.origin_row + (ci / K) * bs, cur.origin_col + (ci % K) * bs};
  }

  // Does the node's block overlap the inclusive row/column windows?
  bool block_intersects(const NodeCursor& cur, std::uint64_t xlo, std::uint64_t xhi,
                        std::uint64_t zlo, std::uint64_t zhi) const {
    const std::uint64_t bs = sched_.block_side(cur.level);
    return cur.origin_row <= xhi && cur.origin_row + bs - 1 >= xlo &&
           cur.origin_col <= zhi && cur.origin_col + bs - 1 >= zlo;
  }

  bool contains(const Triple& q) const {
    if (q.x >= nx_ || q.y >= ysize_ || q.z >= nz_)
      throw std::invalid_argument("ik2tree: triple out of bounds");
    NodeCursor cur = root_cursor(sched_.child_digit(0, q.x, q.z));
    std::uint64_t off = q.y;
    for (;;) {
      if (!node_bit(cur, off)) return false;
      if (is_leaf(cur)) return true;
      const std::uint64_t m = node_ones(cur);
      off = ones_prefix(cur, off);
      cur = child_cursor(cur, sched_.child_digit(cur.level + 1, q.x, q.z), m,
                         child_base(cur));
    }
  }

  // Top-down evaluation carrying materialized active-y lists, the reference
  // strategy for every pattern shape.  Results sorted (x, z, y).
  std::vector<Triple> query_eager(const TriplePattern& p) const {
    p.x.validate(nx_, "x");
    p.y.validate(ysize_, "y");
    p.z.validate(nz_, "z");
    const auto [xlo, xhi] = p.x.bounds(nx_);
    const auto [zlo, zhi] = p.z.bounds(nz_);
    std::vector<Triple> out;
    const std::uint32_t roots = static_cast<std::uint32_t>(sched_.child_count(0));
    if (p.y.is_fixed()) {
      for (std::uint32_t i = 0; i < roots; ++i) {
        NodeCursor cur = root_cursor(i);
        if (!block_intersects(cur, xlo, xhi, zlo, zhi)) continue;
        descend_fixed(cur, p.y.lo, p.y.lo, xlo, xhi, zlo, zhi, out);
      }
    } else {
      const auto [ylo, yhi] = p.y.bounds(ysize_);
      std::vector<std::uint64_t> ys(yhi - ylo + 1);
      std::iota(ys.begin(), ys.end(), ylo);
      for (std::uint32_t i = 0; i < roots; ++i) {
        NodeCursor cur = root_cursor(i);
        if (!block_intersects(cur, xlo, xhi, zlo, zhi)) continue;
        descend_list(cur, ylo, ys, xlo, xhi, zlo, zhi, out);
      }
    }
    std::sort(out.begin(), out.end(), xzy_less);
    return out;
  }

  // Two-phase evaluation: the descent reads only per-node ones counts, and
  // result y values are recovered on the way back up by mapping each bit
  // ordinal to the position of the matching one in the parent node.  Serves
  // unbounded- and range-y patterns only.
  std::vector<Triple> query_lazy(const TriplePattern& p) const {
    if (p.y.is_fixed())
      throw unsupported_strategy("lazy evaluation requires an unbounded y");
    p.x.validate(nx_, "x");
    p.y.validate(ysize_, "y");
    p.z.validate(nz_, "z");
    const auto [xlo, xhi] = p.x.bounds(nx_);
    const auto [zlo, zhi] = p.z.bounds(nz_);
    std::vector<LazyHit> hits;
    std::vector<std::uint64_t> pos;
    const std::uint32_t roots = static_cast<std::uint32_t>(sched_.child_count(0));
    for (std::uint32_t i = 0; i < roots; ++i) {
      NodeCursor cur = root_cursor(i);
      if (!block_intersects(cur, xlo, xhi, zlo, zhi)) continue;
      visit_lazy(cur, xlo, xhi, zlo, zhi, hits, pos);
    }
    std::vector<Triple> out;
    out.reserve(hits.size());
    const auto [ylo, yhi] = p.y.bounds(ysize_);
    for (const auto& h : hits)
      if (h.rel >= ylo && h.rel <= yhi) out.push_back({h.x, h.rel, h.z});
    std::sort(out.begin(), out.end(), xzy_less);
    return out;
  }

 private:
  struct LazyHit {
    std::uint64_t rel;  // bit offset in the current frame; y once at the root
    std::uint64_t x;
    std::uint64_t z;
  };

  void index_levels(const std::vector<std::uint64_t>& level_size) {
    const std::size_t levels = sched_.levels();
    level_begin_.assign(levels + 1, 0);
    ones_before_.assign(levels, 0);
    for (std::size_t l = 0; l < levels; ++l)
      level_begin_[l + 1] = level_begin_[l] + level_size[l];
    for (std::size_t l = 0; l + 1 < levels; ++l)
      ones_before_[l + 1] = t_.rank1(level_begin_[l + 1]);
  }

  const BitVector& bits_at(std::uint32_t level) const {
    return (level + 1 == sched_.levels()) ? l_ : t_;
  }

  std::uint64_t local(std::uint64_t pos, std::uint32_t level) const {
    return (level + 1 == sched_.levels()) ? pos - t_.size() : pos;
  }

  void descend_fixed(const NodeCursor& cur, std::uint64_t off, std::uint64_t y,
                     std::uint64_t xlo, std::uint64_t xhi, std::uint64_t zlo,
                     std::uint64_t zhi, std::vector<Triple>& out) const {
    if (!node_bit(cur, off)) return;
    if (is_leaf(cur)) {
      out.push_back({cur.origin_row, y, cur.origin_col});
      return;
    }
    const std::uint64_t m = node_ones(cur);
    const std::uint64_t base = child_base(cur);
    const std::uint64_t coff = ones_prefix(cur, off);
    const std::uint32_t fanout = static_cast<std::uint32_t>(sched_.child_count(cur.level + 1));
    for (std::uint32_t ci = 0; ci < fanout; ++ci) {
      NodeCursor child = child_cursor(cur, ci, m, base);
      if (!block_intersects(child, xlo, xhi, zlo, zhi)) continue;
      descend_fixed(child, coff, y, xlo, xhi, zlo, zhi, out);
    }
  }

  // window: bits [wlo, wlo + ys.size()) of cur carry the candidate y values.
  void descend_list(const NodeCursor& cur, std::uint64_t wlo,
                    const std::vector<std::uint64_t>& ys, std::uint64_t xlo,
                    std::uint64_t xhi, std::uint64_t zlo, std::uint64_t zhi,
                    std::vector<Triple>& out) const {
    if (is_leaf(cur)) {
      node_for_each_one(cur, wlo, wlo + ys.size(), [&](std::uint64_t q) {
        out.push_back({cur.origin_row, ys[q - wlo], cur.origin_col});
      });
      return;
    }
    std::vector<std::uint64_t> child_ys;
    node_for_each_one(cur, wlo, wlo + ys.size(),
                      [&](std::uint64_t q) { child_ys.push_back(ys[q - wlo]); });
    if (child_ys.empty()) return;
    const std::uint64_t m = node_ones(cur);
    const std::uint64_t base = child_base(cur);
    const std::uint64_t cwlo = ones_prefix(cur, wlo);
    const std::uint32_t fanout = static_cast<std::uint32_t>(sched_.child_count(cur.level + 1));
    for (std::uint32_t ci = 0; ci < fanout; ++ci) {
      NodeCursor child = child_cursor(cur, ci, m, base);
      if (!block_intersects(child, xlo, xhi, zlo, zhi)) continue;
      descend_list(child, cwlo, child_ys, xlo, xhi, zlo, zhi, out);
    }
  }

  // Appends this subtree's hits to the shared list.  The remap from child
  // ordinals to parent bit offsets is order independent, so hits carry no
  // lasting order; query_lazy sorts once at the end.  pos is a scratch
  // buffer reused across nodes to keep the walk allocation free.
  void visit_lazy(const NodeCursor& cur, std::uint64_t xlo, std::uint64_t xhi,
                  std::uint64_t zlo, std::uint64_t zhi,
                  std::vector<LazyHit>& hits, std::vector<std::uint64_t>& pos) const {
    if (is_leaf(cur)) {
      node_for_each_one(cur, 0, cur.width, [&](std::uint64_t q) {
        hits.push_back({q, cur.origin_row, cur.origin_col});
      });
      return;
    }
    const std::uint64_t m = node_ones(cur);
    if (m == 0) return;
    const std::size_t first = hits.size();
    const std::uint64_t base = child_base(cur);
    const std::uint32_t fanout = static_cast<std::uint32_t>(sched_.child_count(cur.level + 1));
    for (std::uint32_t ci = 0; ci < fanout; ++ci) {
      NodeCursor child = child_cursor(cur, ci, m, base);
      if (!block_intersects(child, xlo, xhi, zlo, zhi)) continue;
      visit_lazy(child, xlo, xhi, zlo, zhi, hits, pos);
    }
    remap_segment(cur, m, hits, first, pos);
  }

  // Rewrites hits[first..] from child ordinals to this node's bit offsets:
  // ordinal j becomes the offset of the node's (j+1)-th one.  A segment dense
  // in the node's m ones decodes every position in one pass and remaps each
  // hit by table lookup; a sparse segment is sorted so one popcount-guided
  // walk can skip whole words and select only the ordinals asked for.
  // Internal nodes only, so the bits live in t_.
  void remap_segment(const NodeCursor& cur, std::uint64_t m,
                     std::vector<LazyHit>& hits, std::size_t first,
                     std::vector<std::uint64_t>& pos) const {
    const std::size_t seg = hits.size() - first;
    if (seg == 0) return;
    if (seg >= m / 8) {
      pos.clear();
      node_for_each_one(cur, 0, cur.width,
                        [&](std::uint64_t q) { pos.push_back(q); });
      for (std::size_t i = first; i < hits.size(); ++i)
        hits[i].rel = pos[hits[i].rel];
      return;
    }
    std::sort(hits.begin() + static_cast<std::ptrdiff_t>(first), hits.end(),
              [](const LazyHit& a, const LazyHit& b) { return a.rel < b.rel; });
    const std::vector<std::uint64_t>& words = t_.words();
    std::size_t wi = cur.start >> 6;
    std::uint64_t cw = words[wi] & ~((std::uint64_t{1} << (cur.start & 63u)) - 1);
    std::uint64_t counted = 0;
    std::uint64_t prev_rel = 0, prev_pos = 0;
    bool have_prev = false;
    for (std::size_t i = first; i < hits.size(); ++i) {
      const std::uint64_t j = hits[i].rel;
      if (have_prev && j == prev_rel) {
        hits[i].rel = prev_pos;
        continue;
      }
      for (;;) {
        const auto pc = static_cast<std::uint64_t>(__builtin_popcountll(cw));
        if (counted + pc > j) break;
        counted += pc;
        cw = words[++wi];
      }
      prev_rel = j;
      prev_pos = wi * 64 + select_in_word(cw, j - counted) - cur.start;
      have_prev = true;
      hits[i].rel = prev_pos;
    }
  }

  LevelSchedule sched_;
  std::uint64_t nx_ = 0;
  std::uint64_t ysize_ = 0;
  std::uint64_t nz_ = 0;
  std::uint64_t ntriples_ = 0;
  bool l_rank_ = false;
  BitVector t_;
  BitVector l_;
  std::vector<std::uint64_t> level_begin_;  // combined T:L coordinates
  std::vector<std::uint64_t> ones_before_;  // ones in T before each level
};

}  // namespace ik2
