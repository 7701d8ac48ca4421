#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ik2/multi_k2tree.hpp"
#include "ik2/oracle.hpp"
#include "ik2/temporal.hpp"

namespace {

using Cell = std::pair<std::uint64_t, std::uint64_t>;

std::string bits_of(const ik2::BitVector& v) {
  std::string s(v.size(), '0');
  for (std::uint64_t i = 0; i < v.size(); ++i)
    if (v.get(i)) s[i] = '1';
  return s;
}

std::vector<ik2::ChangeRecord> random_changes(std::mt19937& rng, std::uint64_t nodes,
                                              std::uint64_t instants, std::size_t count) {
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> seen;
  std::uniform_int_distribution<std::uint64_t> dx(0, nodes - 1);
  std::uniform_int_distribution<std::uint64_t> dt(0, instants - 1);
  while (seen.size() < count) seen.insert({dx(rng), dx(rng), dt(rng)});
  std::vector<ik2::ChangeRecord> out;
  for (const auto& [x, z, t] : seen) out.push_back({x, z, t});
  return out;
}

ik2::DimConstraint random_constraint(std::mt19937& rng, std::uint64_t n) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::uint64_t> dv(0, n - 1);
  switch (kind(rng)) {
    case 0: return ik2::DimConstraint::any();
    case 1: return ik2::DimConstraint::fixed(dv(rng));
    default: {
      std::uint64_t a = dv(rng), b = dv(rng);
      return ik2::DimConstraint::range(std::min(a, b), std::max(a, b));
    }
  }
}

ik2::TimeQuery random_window(std::mt19937& rng, std::uint64_t instants, int kind) {
  std::uniform_int_distribution<std::uint64_t> dt(0, instants - 1);
  std::uint64_t a = dt(rng), b = dt(rng);
  const std::uint64_t tl = std::min(a, b), tr = std::max(a, b);
  switch (kind) {
    case 0: return ik2::TimeQuery::instant(tr);
    case 1: return ik2::TimeQuery::weak(tl, tr);
    default: return ik2::TimeQuery::strong(tl, tr);
  }
}

// 8x8 grid over 3 instants.  Cell histories: (6,5) alive from the start,
// (7,5) alive from the start and gone at t2, (1,2) appears at t1, (3,3)
// lives only at t0, (4,6) appears at t2.
const std::vector<ik2::ChangeRecord> kTimeline = {
    {6, 5, 0}, {7, 5, 0}, {7, 5, 2}, {1, 2, 1}, {3, 3, 0}, {3, 3, 1}, {4, 6, 2},
};

}  // namespace

TEST_CASE("golden change log lays out instants per node", "[temporal]") {
  const auto idx = ik2::TemporalIndex::build(kTimeline, 8, 3, ik2::LevelSchedule::uniform(2, 8));
  REQUIRE(idx.nodes() == 8);
  REQUIRE(idx.instants() == 3);
  REQUIRE(idx.nchanges() == 7);

  // roots: quadrant ysets {0,1} / {} / {} / {0,2}, then 2-bit child nodes
  CHECK(bits_of(idx.tree().t()) == "110000000101" + std::string("0001001100011100"));
  // leaf groups: rows0-1|cols2-3 over {1}, rows2-3|cols2-3 over {0,1},
  // rows4-5|cols6-7 over {2}, rows6-7|cols4-5 over {0,2}
  CHECK(bits_of(idx.tree().l()) == "0010" + std::string("00000011") + "1000" + "00100011");

  SECTION("state probes") {
    CHECK(idx.active_at(6, 5, 0));
    CHECK(idx.active_at(6, 5, 2));
    CHECK(idx.active_at(7, 5, 1));
    CHECK_FALSE(idx.active_at(7, 5, 2));
    CHECK_FALSE(idx.active_at(1, 2, 0));
    CHECK(idx.active_at(1, 2, 1));
    CHECK(idx.active_at(3, 3, 0));
    CHECK_FALSE(idx.active_at(3, 3, 1));
    CHECK_FALSE(idx.active_at(0, 0, 2));
    CHECK_FALSE(idx.active_at(4, 6, 1));
    CHECK(idx.active_at(4, 6, 2));
  }

  SECTION("one vanishing neighbor separates weak from strong") {
    const auto x7 = ik2::DimConstraint::fixed(7);
    const auto any = ik2::DimConstraint::any();
    CHECK(idx.query(x7, any, ik2::TimeQuery::weak(1, 2)) == std::vector<Cell>{{7, 5}});
    CHECK(idx.query(x7, any, ik2::TimeQuery::strong(1, 2)).empty());
    CHECK(idx.query(x7, any, ik2::TimeQuery::instant(1)) == std::vector<Cell>{{7, 5}});
    CHECK(idx.query(x7, any, ik2::TimeQuery::instant(2)).empty());
  }

  SECTION("full snapshots") {
    const auto any = ik2::DimConstraint::any();
    CHECK(idx.query(any, any, ik2::TimeQuery::instant(0)) ==
          std::vector<Cell>{{3, 3}, {6, 5}, {7, 5}});
    CHECK(idx.query(any, any, ik2::TimeQuery::instant(2)) ==
          std::vector<Cell>{{1, 2}, {4, 6}, {6, 5}});
    CHECK(idx.query(any, any, ik2::TimeQuery::weak(0, 2)) ==
          std::vector<Cell>{{1, 2}, {3, 3}, {4, 6}, {6, 5}, {7, 5}});
    CHECK(idx.query(any, any, ik2::TimeQuery::strong(0, 2)) == std::vector<Cell>{{6, 5}});
  }
}

TEST_CASE("state probes match timeline replay", "[temporal]") {
  std::mt19937 rng(20107);
  const struct {
    std::uint64_t nodes, instants;
    std::size_t count;
  } configs[] = {{5, 1, 3}, {16, 4, 40}, {16, 40, 200}, {33, 13, 150}};
  for (const auto& cfg : configs) {
    const auto changes = random_changes(rng, cfg.nodes, cfg.instants, cfg.count);
    const auto idx = ik2::TemporalIndex::build(changes, cfg.nodes, cfg.instants,
                                               ik2::LevelSchedule::uniform(2, cfg.nodes));
    const auto oracle = ik2::TimelineOracle::from_changes(changes, cfg.nodes, cfg.instants);
    for (std::uint64_t x = 0; x < cfg.nodes; ++x)
      for (std::uint64_t z = 0; z < cfg.nodes; ++z)
        for (std::uint64_t t = 0; t < cfg.instants; ++t)
          REQUIRE(idx.active_at(x, z, t) == oracle.active_at(x, z, t));
  }
}

TEST_CASE("window queries match timeline replay", "[temporal]") {
  std::mt19937 rng(20211);
  const struct {
    std::uint64_t nodes, instants;
    std::size_t count;
    ik2::LevelSchedule sched;
  } configs[] = {
      {9, 6, 50, ik2::LevelSchedule::uniform(2, 9)},
      {16, 40, 250, ik2::LevelSchedule::uniform(2, 16)},
      {20, 8, 120, ik2::LevelSchedule::temporal_default(20)},
      {48, 17, 400, ik2::LevelSchedule::prefix({4, 4, 2, 2}, 48)},
      {7, 1, 10, ik2::LevelSchedule::uniform(3, 7)},
  };
  for (const auto& cfg : configs) {
    const auto changes = random_changes(rng, cfg.nodes, cfg.instants, cfg.count);
    const auto idx = ik2::TemporalIndex::build(changes, cfg.nodes, cfg.instants, cfg.sched);
    const auto oracle = ik2::TimelineOracle::from_changes(changes, cfg.nodes, cfg.instants);
    for (int rep = 0; rep < 60; ++rep) {
      const auto xc = random_constraint(rng, cfg.nodes);
      const auto zc = random_constraint(rng, cfg.nodes);
      const auto q = random_window(rng, cfg.instants, rep % 3);
      REQUIRE(idx.query(xc, zc, q) == oracle.query(xc, zc, q));
    }
  }
}

TEST_CASE("answer sets nest across semantics", "[temporal]") {
  std::mt19937 rng(20301);
  const auto changes = random_changes(rng, 24, 12, 180);
  const auto idx =
      ik2::TemporalIndex::build(changes, 24, 12, ik2::LevelSchedule::uniform(2, 24));
  const auto any = ik2::DimConstraint::any();
  for (int rep = 0; rep < 20; ++rep) {
    std::uniform_int_distribution<std::uint64_t> dt(0, 11);
    std::uint64_t a = dt(rng), b = dt(rng);
    const std::uint64_t tl = std::min(a, b), tr = std::max(a, b);
    const auto weak = idx.query(any, any, ik2::TimeQuery::weak(tl, tr));
    const auto strong = idx.query(any, any, ik2::TimeQuery::strong(tl, tr));
    for (std::uint64_t t = tl; t <= tr; ++t) {
      const auto inst = idx.query(any, any, ik2::TimeQuery::instant(t));
      REQUIRE(std::includes(inst.begin(), inst.end(), strong.begin(), strong.end()));
      REQUIRE(std::includes(weak.begin(), weak.end(), inst.begin(), inst.end()));
    }
  }
}

TEST_CASE("window pruning only skips empty work", "[temporal]") {
  std::mt19937 rng(20401);
  for (int round = 0; round < 4; ++round) {
    const auto changes = random_changes(rng, 16, 10, 80);
    const auto idx =
        ik2::TemporalIndex::build(changes, 16, 10, ik2::LevelSchedule::uniform(2, 16));
    for (int rep = 0; rep < 30; ++rep) {
      const auto xc = random_constraint(rng, 16);
      const auto zc = random_constraint(rng, 16);
      const auto q = random_window(rng, 10, rep % 3);
      REQUIRE(idx.query(xc, zc, q, true) == idx.query(xc, zc, q, false));
    }
  }
}

TEST_CASE("degenerate window collapses the kinds", "[temporal]") {
  std::mt19937 rng(20501);
  const auto changes = random_changes(rng, 12, 9, 70);
  const auto idx = ik2::TemporalIndex::build(changes, 12, 9, ik2::LevelSchedule::uniform(2, 12));
  const auto any = ik2::DimConstraint::any();
  for (std::uint64_t t = 0; t < 9; ++t) {
    const auto inst = idx.query(any, any, ik2::TimeQuery::instant(t));
    CHECK(idx.query(any, any, ik2::TimeQuery::weak(t, t)) == inst);
    CHECK(idx.query(any, any, ik2::TimeQuery::strong(t, t)) == inst);
  }
}

TEST_CASE("per-instant baseline agrees with the log index", "[temporal]") {
  std::mt19937 rng(20601);
  const auto sched = ik2::LevelSchedule::uniform(2, 16);
  const auto changes = random_changes(rng, 16, 12, 140);
  const auto idx = ik2::TemporalIndex::build(changes, 16, 12, sched);
  const auto base = ik2::MultiK2Temporal::build(changes, 16, 12, sched);
  REQUIRE(base.instants() == 12);
  for (std::uint64_t x = 0; x < 16; ++x)
    for (std::uint64_t t = 0; t < 12; ++t)
      REQUIRE(idx.active_at(x, (x * 7 + t) % 16, t) == base.active_at(x, (x * 7 + t) % 16, t));
  for (int rep = 0; rep < 40; ++rep) {
    const auto xc = random_constraint(rng, 16);
    const auto zc = random_constraint(rng, 16);
    const auto q = random_window(rng, 12, rep % 3);
    REQUIRE(idx.query(xc, zc, q) == base.query(xc, zc, q));
  }
}

TEST_CASE("temporal input rejection", "[temporal]") {
  const auto sched = ik2::LevelSchedule::uniform(2, 8);
  CHECK_THROWS_AS(ik2::TemporalIndex::build({{1, 2, 0}, {1, 2, 0}}, 8, 3, sched),
                  std::invalid_argument);
  CHECK_THROWS_AS(ik2::MultiK2Temporal::build({{1, 2, 0}, {1, 2, 0}}, 8, 3, sched),
                  std::invalid_argument);
  CHECK_THROWS_AS(ik2::TemporalIndex::build({{1, 2, 3}}, 8, 3, sched), std::invalid_argument);
  CHECK_THROWS_AS(ik2::TemporalIndex::build({{8, 2, 0}}, 8, 3, sched), std::invalid_argument);
  CHECK_THROWS_AS(ik2::TimeQuery::weak(3, 1), std::invalid_argument);
  CHECK_THROWS_AS(ik2::TimeQuery::strong(2, 0), std::invalid_argument);

  const auto idx = ik2::TemporalIndex::build(kTimeline, 8, 3, sched);
  const auto any = ik2::DimConstraint::any();
  CHECK_THROWS_AS(idx.active_at(8, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(idx.active_at(0, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(idx.query(any, any, ik2::TimeQuery::instant(3)), std::invalid_argument);
  CHECK_THROWS_AS(idx.query(ik2::DimConstraint::fixed(8), any, ik2::TimeQuery::instant(0)),
                  std::invalid_argument);
}

TEST_CASE("empty and dense logs", "[temporal]") {
  const auto sched = ik2::LevelSchedule::uniform(2, 4);
  const auto empty = ik2::TemporalIndex::build({}, 4, 5, sched);
  CHECK_FALSE(empty.active_at(3, 3, 4));
  CHECK(empty.query(ik2::DimConstraint::any(), ik2::DimConstraint::any(),
                    ik2::TimeQuery::weak(0, 4))
            .empty());

  // every cell toggles at every instant: parity of t+1
  std::vector<ik2::ChangeRecord> all;
  for (std::uint64_t x = 0; x < 4; ++x)
    for (std::uint64_t z = 0; z < 4; ++z)
      for (std::uint64_t t = 0; t < 3; ++t) all.push_back({x, z, t});
  const auto dense = ik2::TemporalIndex::build(all, 4, 3, sched);
  CHECK(dense.active_at(2, 1, 0));
  CHECK_FALSE(dense.active_at(2, 1, 1));
  CHECK(dense.active_at(2, 1, 2));
  CHECK(dense.query(ik2::DimConstraint::any(), ik2::DimConstraint::any(),
                    ik2::TimeQuery::instant(2))
            .size() == 16);
  CHECK(dense.query(ik2::DimConstraint::any(), ik2::DimConstraint::any(),
                    ik2::TimeQuery::strong(0, 2))
            .empty());
}
