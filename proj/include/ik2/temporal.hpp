#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ik2/ik2tree.hpp"
#include "ik2/text.hpp"

namespace ik2 {

// One toggle of cell (x, z) at instant t.  Instant 0 carries the initial
// snapshot: a cell alive from the start has a change at t = 0.
struct ChangeRecord {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  std::uint64_t t = 0;

  friend auto operator<=>(const ChangeRecord&, const ChangeRecord&) = default;
};

// Time window of a temporal query.  Instant asks for the state at one
// instant; over [tl, tr], Weak asks whether the cell is active at some
// instant and Strong whether it is active at every instant.
struct TimeQuery {
  enum class Kind : std::uint8_t { Instant, Weak, Strong };

  Kind kind = Kind::Instant;
  std::uint64_t tl = 0;
  std::uint64_t tr = 0;

  static TimeQuery instant(std::uint64_t t) { return {Kind::Instant, t, t}; }
  static TimeQuery weak(std::uint64_t tl, std::uint64_t tr) {
    check(tl, tr);
    return {Kind::Weak, tl, tr};
  }
  static TimeQuery strong(std::uint64_t tl, std::uint64_t tr) {
    check(tl, tr);
    return {Kind::Strong, tl, tr};
  }

 private:
  static void check(std::uint64_t tl, std::uint64_t tr) {
    if (tl > tr) throw std::invalid_argument("temporal: inverted interval");
  }
};

// Change-log text: one "x z t" record per line, decimal; '#' starts a
// comment line, blank lines are skipped.
inline std::vector<ChangeRecord> read_change_log(std::istream& in) {
  std::vector<ChangeRecord> out;
  std::string line;
  for (std::uint64_t lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream ss(line);
    std::string a, b, c, extra;
    if (!(ss >> a) || a[0] == '#') continue;
    if (!(ss >> b >> c) || (ss >> extra))
      throw parse_error("line " + std::to_string(lineno) + ": expected 3 fields");
    const auto x = parse_u64(a), z = parse_u64(b), t = parse_u64(c);
    if (!x || !z || !t)
      throw parse_error("line " + std::to_string(lineno) + ": expected 3 decimal integers");
    out.push_back({*x, *z, *t});
  }
  return out;
}

// Adjacency log over time: the partition dimension holds change instants, so
// a cell is active at t iff it toggled an odd number of times in [0, t].
// Nodes keep only the instants still alive below them, which lets a window
// query carry a pair of shrinking bit offsets instead of instant sets.
class TemporalIndex {
 public:
  static TemporalIndex build(const std::vector<ChangeRecord>& changes, std::uint64_t nodes,
                             std::uint64_t instants, const LevelSchedule& sched,
                             bool l_rank = true) {
    std::vector<Triple> triples;
    triples.reserve(changes.size());
    for (const auto& c : changes) triples.push_back({c.x, c.t, c.z});
    std::sort(triples.begin(), triples.end());
    if (std::adjacent_find(triples.begin(), triples.end()) != triples.end())
      throw std::invalid_argument("temporal: duplicate change record");
    TemporalIndex idx;
    idx.tree_ = IK2Tree::build(triples, nodes, instants, nodes, sched, l_rank);
    return idx;
  }

  static TemporalIndex from_tree(IK2Tree tree) {
    if (tree.nx() != tree.nz()) throw format_error("temporal: index is not square");
    TemporalIndex idx;
    idx.tree_ = std::move(tree);
    return idx;
  }

  std::uint64_t nodes() const { return tree_.nx(); }
  std::uint64_t instants() const { return tree_.ysize(); }
  std::uint64_t nchanges() const { return tree_.ntriples(); }
  const IK2Tree& tree() const { return tree_; }

  // State of one cell at instant t: walk the cell's path keeping the offset
  // of the last bit that still means "instant <= t", and take the parity of
  // the ones up to it at the leaf.
  bool active_at(std::uint64_t x, std::uint64_t z, std::uint64_t t) const {
    if (x >= nodes() || z >= nodes()) throw std::invalid_argument("temporal: cell out of range");
    if (t >= instants()) throw std::invalid_argument("temporal: instant out of range");
    const auto& sched = tree_.schedule();
    NodeCursor cur = tree_.root_cursor(sched.child_digit(0, x, z));
    std::uint64_t hi = t;
    while (true) {
      const std::uint64_t ones_le = tree_.ones_prefix(cur, hi + 1);
      if (tree_.is_leaf(cur)) return (ones_le & 1) != 0;
      if (ones_le == 0) return false;
      hi = ones_le - 1;
      const std::uint64_t m = tree_.node_ones(cur);
      const std::uint64_t base = tree_.child_base(cur);
      cur = tree_.child_cursor(cur, sched.child_digit(cur.level + 1, x, z), m, base);
    }
  }

  // Cells matching the row/column constraints and the time window, sorted by
  // (x, z).  `prune` enables the window-based subtree cuts; disabling it
  // keeps only the structural ones (exists for checking their soundness).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> query(const DimConstraint& xc,
                                                             const DimConstraint& zc,
                                                             const TimeQuery& q,
                                                             bool prune = true) const {
    xc.validate(nodes(), "x");
    zc.validate(nodes(), "z");
    if (q.tr >= instants()) throw std::invalid_argument("temporal: instant out of range");
    const auto [xlo, xhi] = xc.bounds(nodes());
    const auto [zlo, zhi] = zc.bounds(nodes());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (nchanges() > 0) {
      const std::uint32_t roots =
          static_cast<std::uint32_t>(tree_.schedule().child_count(0));
      for (std::uint32_t d = 0; d < roots; ++d) {
        NodeCursor cur = tree_.root_cursor(d);
        if (!tree_.block_intersects(cur, xlo, xhi, zlo, zhi)) continue;
        visit(cur, static_cast<std::int64_t>(q.tl), static_cast<std::int64_t>(q.tr), q.kind,
              prune, xlo, xhi, zlo, zhi, out);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  // hl / hr are the offsets of the last node bit meaning "instant <= tl" /
  // "<= tr" in this node's frame; -1 once no such instant survives below.
  void visit(const NodeCursor& cur, std::int64_t hl, std::int64_t hr, TimeQuery::Kind kind,
             bool prune, std::uint64_t xlo, std::uint64_t xhi, std::uint64_t zlo,
             std::uint64_t zhi,
             std::vector<std::pair<std::uint64_t, std::uint64_t>>& out) const {
    if (tree_.is_leaf(cur)) {
      const std::uint64_t cl = hl < 0 ? 0 : tree_.ones_prefix(cur, hl + 1);
      const std::uint64_t cr = hr < 0 ? 0 : tree_.ones_prefix(cur, hr + 1);
      bool hit = false;
      switch (kind) {
        case TimeQuery::Kind::Instant: hit = (cr & 1) != 0; break;
        case TimeQuery::Kind::Weak: hit = (cl & 1) != 0 || cr > cl; break;
        case TimeQuery::Kind::Strong: hit = (cl & 1) != 0 && cr == cl; break;
      }
      if (hit) out.emplace_back(cur.origin_row, cur.origin_col);
      return;
    }
    if (prune) {
      // Instant/Weak need a change at some instant <= tr below; Strong needs
      // the cell active at tl, so a change at some instant <= tl.
      const std::int64_t po = kind == TimeQuery::Kind::Strong ? hl : hr;
      if (po < 0 || tree_.ones_prefix(cur, po + 1) == 0) return;
    } else if (tree_.node_ones(cur) == 0) {
      return;
    }
    const std::int64_t chl = hl < 0 ? -1 : static_cast<std::int64_t>(tree_.ones_prefix(cur, hl + 1)) - 1;
    const std::int64_t chr = hr < 0 ? -1 : static_cast<std::int64_t>(tree_.ones_prefix(cur, hr + 1)) - 1;
    const std::uint64_t m = tree_.node_ones(cur);
    const std::uint64_t base = tree_.child_base(cur);
    const std::uint32_t fanout =
        static_cast<std::uint32_t>(tree_.schedule().child_count(cur.level + 1));
    for (std::uint32_t ci = 0; ci < fanout; ++ci) {
      NodeCursor child = tree_.child_cursor(cur, ci, m, base);
      if (!tree_.block_intersects(child, xlo, xhi, zlo, zhi)) continue;
      visit(child, chl, chr, kind, prune, xlo, xhi, zlo, zhi, out);
    }
  }

  IK2Tree tree_;
};

}  // namespace ik2
