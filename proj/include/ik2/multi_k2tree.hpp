#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include <map>

#include "ik2/k2tree.hpp"
#include "ik2/temporal.hpp"
#include "ik2/triples.hpp"

namespace ik2 {

// Baseline layout: one binary tree per y value, every layer sharing one
// schedule.  Bit for bit this is the collection the interleaved tree
// reorganizes, so total sizes and ones counts must match it exactly; it also
// serves as the comparison backend in benchmarks.
class MultiK2 {
 public:
  static MultiK2 build(const std::vector<Triple>& triples, std::uint64_t nx,
                       std::uint64_t ysize, std::uint64_t nz, const LevelSchedule& sched) {
    if (nx == 0 || ysize == 0 || nz == 0)
      throw std::invalid_argument("multik2: empty dimensions");
    std::vector<std::vector<K2Tree::Pair>> buckets(ysize);
    for (const auto& t : triples) {
      if (t.y >= ysize) throw std::invalid_argument("multik2: triple out of bounds");
      buckets[t.y].emplace_back(t.x, t.z);
    }
    MultiK2 m;
    m.nx_ = nx;
    m.nz_ = nz;
    m.layers_.reserve(ysize);
    for (auto& pairs : buckets)
      m.layers_.push_back(K2Tree::build(std::move(pairs), nx, nz, sched));
    return m;
  }

  std::uint64_t nx() const { return nx_; }
  std::uint64_t ysize() const { return layers_.size(); }
  std::uint64_t nz() const { return nz_; }
  const K2Tree& layer(std::uint64_t y) const { return layers_[y]; }

  std::uint64_t total_bits() const {
    std::uint64_t sum = 0;
    for (const auto& t : layers_) sum += t.total_bits();
    return sum;
  }

  std::uint64_t total_ones() const {
    std::uint64_t sum = 0;
    for (const auto& t : layers_) sum += t.total_ones();
    return sum;
  }

  bool contains(const Triple& q) const {
    if (q.y >= layers_.size()) throw std::invalid_argument("multik2: y out of bounds");
    return layers_[q.y].contains(q.x, q.z);
  }

  // Runs the rectangle query against every layer in the y constraint.
  std::vector<Triple> query(const TriplePattern& p) const {
    p.x.validate(nx_, "x");
    p.y.validate(layers_.size(), "y");
    p.z.validate(nz_, "z");
    const auto [ylo, yhi] = p.y.bounds(layers_.size());
    std::vector<Triple> out;
    for (std::uint64_t y = ylo; y <= yhi; ++y)
      for (const auto& [r, c] : layers_[y].query(p.x, p.z)) out.push_back({r, y, c});
    std::sort(out.begin(), out.end(), xzy_less);
    return out;
  }

 private:
  std::uint64_t nx_ = 0;
  std::uint64_t nz_ = 0;
  std::vector<K2Tree> layers_;
};

// Temporal baseline: one binary tree per instant holding that instant's
// change events.  It has no cross-instant structure, so any state question
// replays the cell's instants from 0; the log index must beat this.
class MultiK2Temporal {
 public:
  static MultiK2Temporal build(const std::vector<ChangeRecord>& changes, std::uint64_t nodes,
                               std::uint64_t instants, const LevelSchedule& sched) {
    std::vector<Triple> triples;
    triples.reserve(changes.size());
    for (const auto& c : changes) triples.push_back({c.x, c.t, c.z});
    std::sort(triples.begin(), triples.end());
    if (std::adjacent_find(triples.begin(), triples.end()) != triples.end())
      throw std::invalid_argument("multik2: duplicate change record");
    MultiK2Temporal m;
    m.layers_ = MultiK2::build(triples, nodes, instants, nodes, sched);
    return m;
  }

  std::uint64_t nodes() const { return layers_.nx(); }
  std::uint64_t instants() const { return layers_.ysize(); }
  std::uint64_t total_bits() const { return layers_.total_bits(); }

  bool active_at(std::uint64_t x, std::uint64_t z, std::uint64_t t) const {
    if (x >= nodes() || z >= nodes()) throw std::invalid_argument("multik2: cell out of range");
    if (t >= instants()) throw std::invalid_argument("multik2: instant out of range");
    bool on = false;
    for (std::uint64_t m = 0; m <= t; ++m)
      if (layers_.layer(m).contains(x, z)) on = !on;
    return on;
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> query(const DimConstraint& xc,
                                                             const DimConstraint& zc,
                                                             const TimeQuery& q) const {
    xc.validate(nodes(), "x");
    zc.validate(nodes(), "z");
    if (q.tr >= instants()) throw std::invalid_argument("multik2: instant out of range");
    // change counts per cell in [0, tl] and [0, tr]
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>>
        counts;
    for (std::uint64_t m = 0; m <= q.tr; ++m) {
      for (const auto& cell : layers_.layer(m).query(xc, zc)) {
        auto& [cl, cr] = counts[cell];
        if (m <= q.tl) ++cl;
        ++cr;
      }
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [cell, c] : counts) {
      const auto [cl, cr] = c;
      bool hit = false;
      switch (q.kind) {
        case TimeQuery::Kind::Instant: hit = (cr & 1) != 0; break;
        case TimeQuery::Kind::Weak: hit = (cl & 1) != 0 || cr > cl; break;
        case TimeQuery::Kind::Strong: hit = (cl & 1) != 0 && cr == cl; break;
      }
      if (hit) out.push_back(cell);
    }
    return out;  // map order is already (x, z)
  }

 private:
  MultiK2 layers_;
};

}  // namespace ik2
