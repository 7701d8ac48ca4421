#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ik2/temporal.hpp"
#include "ik2/triples.hpp"

namespace ik2 {

// Reference evaluators used by the tests.  Everything here is a deliberate
// brute-force second route: dense matrices and linear scans, no shared code
// with the succinct structures.

// Dense reference for a binary relation.
struct DenseRelation {
  std::uint64_t nrows = 0;
  std::uint64_t ncols = 0;
  std::vector<std::uint8_t> cells;  // row-major

  static DenseRelation from_pairs(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs,
                                  std::uint64_t nrows, std::uint64_t ncols) {
    DenseRelation d;
    d.nrows = nrows;
    d.ncols = ncols;
    d.cells.assign(nrows * ncols, 0);
    for (const auto& [r, c] : pairs) d.cells[r * ncols + c] = 1;
    return d;
  }

  bool at(std::uint64_t r, std::uint64_t c) const { return cells[r * ncols + c] != 0; }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> query(const DimConstraint& rows,
                                                             const DimConstraint& cols) const {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::uint64_t r = 0; r < nrows; ++r) {
      if (!rows.contains(r)) continue;
      for (std::uint64_t c = 0; c < ncols; ++c)
        if (cols.contains(c) && at(r, c)) out.emplace_back(r, c);
    }
    return out;
  }
};

// Plain list of distinct triples; every query is a filter over the list.
struct TripleStore {
  std::uint64_t nx = 0;
  std::uint64_t ysize = 0;
  std::uint64_t nz = 0;
  std::vector<Triple> triples;

  static TripleStore from_triples(std::vector<Triple> ts, std::uint64_t nx,
                                  std::uint64_t ysize, std::uint64_t nz) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return TripleStore{nx, ysize, nz, std::move(ts)};
  }

  bool contains(const Triple& t) const {
    return std::binary_search(triples.begin(), triples.end(), t);
  }

  // Matches sorted (x, z, y) ascending, the order index queries report.
  std::vector<Triple> pattern(const TriplePattern& p) const {
    std::vector<Triple> out;
    for (const auto& t : triples)
      if (p.x.contains(t.x) && p.y.contains(t.y) && p.z.contains(t.z)) out.push_back(t);
    std::sort(out.begin(), out.end(), xzy_less);
    return out;
  }
};

// Literal timeline replay: expand every cell's full state history, then read
// the answers off it.
struct TimelineOracle {
  std::uint64_t nodes = 0;
  std::uint64_t instants = 0;
  // cell -> state per instant, cells without changes omitted
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<std::uint8_t>> history;

  static TimelineOracle from_changes(const std::vector<ChangeRecord>& changes,
                                     std::uint64_t nodes, std::uint64_t instants) {
    TimelineOracle o;
    o.nodes = nodes;
    o.instants = instants;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<std::uint64_t>> per_cell;
    for (const auto& c : changes) per_cell[{c.x, c.z}].push_back(c.t);
    for (auto& [cell, ts] : per_cell) {
      std::sort(ts.begin(), ts.end());
      auto& states = o.history[cell];
      states.assign(instants, 0);
      std::uint8_t on = 0;
      std::size_t next = 0;
      for (std::uint64_t t = 0; t < instants; ++t) {
        while (next < ts.size() && ts[next] == t) {
          on ^= 1;
          ++next;
        }
        states[t] = on;
      }
    }
    return o;
  }

  bool active_at(std::uint64_t x, std::uint64_t z, std::uint64_t t) const {
    auto it = history.find({x, z});
    return it != history.end() && it->second[t] != 0;
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> query(const DimConstraint& xc,
                                                             const DimConstraint& zc,
                                                             const TimeQuery& q) const {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [cell, states] : history) {
      if (!xc.contains(cell.first) || !zc.contains(cell.second)) continue;
      bool hit = false;
      switch (q.kind) {
        case TimeQuery::Kind::Instant:
          hit = states[q.tr] != 0;
          break;
        case TimeQuery::Kind::Weak:
          for (std::uint64_t t = q.tl; t <= q.tr; ++t) hit = hit || states[t] != 0;
          break;
        case TimeQuery::Kind::Strong:
          hit = true;
          for (std::uint64_t t = q.tl; t <= q.tr; ++t) hit = hit && states[t] != 0;
          break;
      }
      if (hit) out.push_back(cell);
    }
    return out;  // map order is already (x, z)
  }
};

}  // namespace ik2
