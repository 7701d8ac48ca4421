#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ik2/ik2tree.hpp"
#include "ik2/multi_k2tree.hpp"
#include "ik2/oracle.hpp"

using ik2::DimConstraint;
using ik2::IK2Tree;
using ik2::LevelSchedule;
using ik2::MultiK2;
using ik2::NodeCursor;
using ik2::Triple;
using ik2::TriplePattern;
using ik2::TripleStore;

namespace {

std::string bits_of(const ik2::BitVector& v) {
  std::string s;
  s.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s += v.get(i) ? '1' : '0';
  return s;
}

std::vector<Triple> random_triples(std::mt19937_64& rng, std::uint64_t nx,
                                   std::uint64_t ysize, std::uint64_t nz,
                                   std::size_t count) {
  std::uniform_int_distribution<std::uint64_t> dx(0, nx - 1);
  std::uniform_int_distribution<std::uint64_t> dy(0, ysize - 1);
  std::uniform_int_distribution<std::uint64_t> dz(0, nz - 1);
  std::vector<Triple> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back({dx(rng), dy(rng), dz(rng)});
  return out;
}

DimConstraint make_constraint(std::mt19937_64& rng, int kind, std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> id(0, n - 1);
  switch (kind) {
    case 0: return DimConstraint::any();
    case 1: return DimConstraint::fixed(id(rng));
    default: {
      auto a = id(rng), b = id(rng);
      return DimConstraint::range(std::min(a, b), std::max(a, b));
    }
  }
}

// Independent replay of the active-list recurrence: every list is rebuilt
// from plain bit reads, and the reconstructed relation must equal the input.
void replay_walk(const IK2Tree& tree, const NodeCursor& cur,
                 const std::vector<std::uint64_t>& actives, std::vector<Triple>& out) {
  if (tree.is_leaf(cur)) {
    for (std::uint64_t off = 0; off < cur.width; ++off)
      if (tree.node_bit(cur, off))
        out.push_back({cur.origin_row, actives[off], cur.origin_col});
    return;
  }
  std::vector<std::uint64_t> child_actives;
  for (std::uint64_t off = 0; off < cur.width; ++off)
    if (tree.node_bit(cur, off)) child_actives.push_back(actives[off]);
  if (child_actives.empty()) return;
  const std::uint64_t m = child_actives.size();
  const std::uint64_t base = tree.child_base(cur);
  const auto fanout = static_cast<std::uint32_t>(tree.schedule().child_count(cur.level + 1));
  for (std::uint32_t ci = 0; ci < fanout; ++ci)
    replay_walk(tree, tree.child_cursor(cur, ci, m, base), child_actives, out);
}

std::vector<Triple> replay_relation(const IK2Tree& tree) {
  std::vector<std::uint64_t> identity(tree.ysize());
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<Triple> out;
  for (std::uint32_t i = 0; i < tree.schedule().child_count(0); ++i)
    replay_walk(tree, tree.root_cursor(i), identity, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("worked 8x8 example with three y values matches its bitmaps", "[ik2tree]") {
  // Seven triples over an 8x8 grid, ysize 3.  The first root node has ones
  // for y1 and y2 only; the third root node's first one belongs to y1.
  const std::vector<Triple> triples = {{0, 2, 1}, {1, 0, 5}, {2, 1, 2}, {3, 2, 7},
                                       {4, 2, 3}, {5, 0, 6}, {6, 1, 0}};
  auto tree = IK2Tree::build(triples, 8, 3, 8, LevelSchedule::uniform(2, 8));

  REQUIRE(tree.levels() == 3);
  CHECK(bits_of(tree.t()) ==
        "011101011100"                  // level 0: four nodes, three bits each
        "0100001010000001000110000100"  // level 1: children in node order
  );
  CHECK(bits_of(tree.l()) == "0100100000010001010010000010");
  CHECK(tree.ntriples() == 7);

  for (const auto& t : triples) CHECK(tree.contains(t));
  CHECK(tree.contains({6, 1, 0}));
  CHECK_FALSE(tree.contains({6, 0, 0}));
  CHECK_FALSE(tree.contains({0, 0, 0}));
  CHECK_FALSE(tree.contains({7, 2, 7}));

  // (x=2, any y, z=2) touches two y candidates but only y=1 survives the
  // leaf; the expected triple reads (x2, y1, z2).
  auto got = tree.query_eager({DimConstraint::fixed(2), DimConstraint::any(),
                               DimConstraint::fixed(2)});
  REQUIRE(got == std::vector<Triple>{{2, 1, 2}});

  auto row6 = tree.query_eager({DimConstraint::fixed(6), DimConstraint::any(),
                                DimConstraint::any()});
  REQUIRE(row6 == std::vector<Triple>{{6, 1, 0}});

  auto y2 = tree.query_eager({DimConstraint::any(), DimConstraint::fixed(2),
                              DimConstraint::any()});
  REQUIRE(y2 == std::vector<Triple>{{0, 2, 1}, {3, 2, 7}, {4, 2, 3}});
}

TEST_CASE("children start at rank times fanout plus the root-level size", "[ik2tree]") {
  const std::vector<Triple> triples = {{0, 2, 1}, {1, 0, 5}, {2, 1, 2}, {3, 2, 7},
                                       {4, 2, 3}, {5, 0, 6}, {6, 1, 0}};
  auto tree = IK2Tree::build(triples, 8, 3, 8, LevelSchedule::uniform(2, 8));
  // Uniform K: the per-level offsets collapse to one global formula,
  // adjust = ysize * K^2 at every level.
  const std::uint64_t adjust = tree.ysize() * 4;
  std::vector<NodeCursor> stack;
  for (std::uint32_t i = 0; i < 4; ++i) stack.push_back(tree.root_cursor(i));
  while (!stack.empty()) {
    NodeCursor cur = stack.back();
    stack.pop_back();
    if (tree.is_leaf(cur)) continue;
    const std::uint64_t m = tree.node_ones(cur);
    if (m == 0) continue;
    const std::uint64_t base = tree.child_base(cur);
    REQUIRE(base == tree.t().rank1(cur.start) * 4 + adjust);
    for (std::uint32_t ci = 0; ci < 4; ++ci)
      stack.push_back(tree.child_cursor(cur, ci, m, base));
  }
}

TEST_CASE("empty ternary relation keeps an all-zero root level", "[ik2tree]") {
  auto tree = IK2Tree::build({}, 8, 5, 8, LevelSchedule::uniform(2, 8));
  CHECK(tree.t().size() == 4 * 5);
  CHECK(tree.t().ones() == 0);
  CHECK(tree.l().size() == 0);
  CHECK(tree.ntriples() == 0);
  CHECK(tree.query_eager({DimConstraint::any(), DimConstraint::any(),
                          DimConstraint::any()})
            .empty());
}

TEST_CASE("single-level interleaved tree lives entirely in L", "[ik2tree]") {
  auto tree = IK2Tree::build({{0, 1, 1}, {1, 0, 0}}, 2, 2, 2, LevelSchedule::uniform(2, 2));
  CHECK(tree.t().size() == 0);
  CHECK(tree.l().size() == 4 * 2);
  CHECK(tree.contains({0, 1, 1}));
  CHECK_FALSE(tree.contains({0, 0, 1}));
  auto all = tree.query_eager({DimConstraint::any(), DimConstraint::any(),
                               DimConstraint::any()});
  REQUIRE(all == std::vector<Triple>{{0, 1, 1}, {1, 0, 0}});
}

TEST_CASE("interleaving preserves the per-y collection bit for bit", "[ik2tree]") {
  std::mt19937_64 rng(4242);
  const struct {
    std::uint64_t nx, ysize, nz;
    std::size_t count;
    LevelSchedule sched;
  } configs[] = {
      {16, 4, 16, 60, LevelSchedule::uniform(2, 16)},
      {32, 7, 24, 300, LevelSchedule::uniform(2, 32)},
      {64, 3, 64, 100, LevelSchedule::from_ks({4, 4, 2, 2})},
      {8, 6, 8, 0, LevelSchedule::uniform(2, 8)},  // all layers empty
      {30, 5, 30, 500, LevelSchedule::uniform(2, 32)},
  };
  for (const auto& cfg : configs) {
    auto triples = random_triples(rng, cfg.nx, cfg.ysize, cfg.nz, cfg.count);
    auto tree = IK2Tree::build(triples, cfg.nx, cfg.ysize, cfg.nz, cfg.sched);
    auto multi = MultiK2::build(triples, cfg.nx, cfg.ysize, cfg.nz, cfg.sched);
    REQUIRE(tree.total_bits() == multi.total_bits());
    REQUIRE(tree.total_ones() == multi.total_ones());
  }
}

TEST_CASE("node widths follow the parent-ones recurrence", "[ik2tree]") {
  std::mt19937_64 rng(91);
  auto triples = random_triples(rng, 64, 9, 64, 700);
  auto tree = IK2Tree::build(triples, 64, 9, 64, LevelSchedule::uniform(2, 64));
  const auto& s = tree.schedule();
  REQUIRE(tree.level_begin(1) == s.child_count(0) * tree.ysize());
  for (std::size_t l = 0; l + 1 < s.levels(); ++l) {
    const auto ones = tree.t().rank1(tree.level_begin(l + 1)) - tree.t().rank1(tree.level_begin(l));
    REQUIRE(tree.level_begin(l + 2) - tree.level_begin(l + 1) == ones * s.child_count(l + 1));
  }
  REQUIRE(tree.level_begin(s.levels()) == tree.total_bits());
  REQUIRE(tree.l().ones() == tree.ntriples());
}

TEST_CASE("eager evaluation agrees with the scan store on every shape", "[ik2tree]") {
  std::mt19937_64 rng(20240817);
  const struct {
    std::uint64_t nx, ysize, nz;
    std::size_t count;
    LevelSchedule sched;
  } configs[] = {
      {32, 16, 32, 400, LevelSchedule::uniform(2, 32)},
      {64, 256, 64, 2000, LevelSchedule::uniform(2, 64)},
      {33, 5, 60, 350, LevelSchedule::from_ks({4, 4, 2, 2})},
      {1, 1, 1, 1, LevelSchedule::uniform(2, 2)},
      {16, 1, 16, 30, LevelSchedule::uniform(2, 16)},
  };
  for (const auto& cfg : configs) {
    auto triples = random_triples(rng, cfg.nx, cfg.ysize, cfg.nz, cfg.count);
    auto tree = IK2Tree::build(triples, cfg.nx, cfg.ysize, cfg.nz, cfg.sched);
    auto store = TripleStore::from_triples(triples, cfg.nx, cfg.ysize, cfg.nz);
    REQUIRE(tree.ntriples() == store.triples.size());

    // all 27 combinations of constraint kinds, several draws each
    for (int kx = 0; kx < 3; ++kx)
      for (int ky = 0; ky < 3; ++ky)
        for (int kz = 0; kz < 3; ++kz)
          for (int rep = 0; rep < 4; ++rep) {
            TriplePattern p{make_constraint(rng, kx, cfg.nx),
                            make_constraint(rng, ky, cfg.ysize),
                            make_constraint(rng, kz, cfg.nz)};
            REQUIRE(tree.query_eager(p) == store.pattern(p));
          }

    for (const auto& t : store.triples) REQUIRE(tree.contains(t));
    for (int i = 0; i < 200; ++i) {
      auto probe = random_triples(rng, cfg.nx, cfg.ysize, cfg.nz, 1)[0];
      REQUIRE(tree.contains(probe) == store.contains(probe));
    }
  }
}

TEST_CASE("materialized active lists equal the replayed recurrence", "[ik2tree]") {
  std::mt19937_64 rng(55);
  for (std::size_t count : {0u, 40u, 600u}) {
    auto triples = random_triples(rng, 32, 12, 32, count);
    auto tree = IK2Tree::build(triples, 32, 12, 32, LevelSchedule::uniform(2, 32));
    auto store = TripleStore::from_triples(triples, 32, 12, 32);
    REQUIRE(replay_relation(tree) == store.triples);
  }
}

TEST_CASE("structural reload validates the level recurrence", "[ik2tree]") {
  std::mt19937_64 rng(66);
  auto triples = random_triples(rng, 16, 6, 16, 80);
  auto tree = IK2Tree::build(triples, 16, 6, 16, LevelSchedule::uniform(2, 16), true);

  auto copy = IK2Tree::from_parts(tree.schedule(), tree.nx(), tree.ysize(), tree.nz(),
                                  tree.l_rank_enabled(), tree.t(), tree.l());
  REQUIRE(copy.ntriples() == tree.ntriples());
  TriplePattern all{DimConstraint::any(), DimConstraint::any(), DimConstraint::any()};
  REQUIRE(copy.query_eager(all) == tree.query_eager(all));

  // chopping L off breaks the recurrence
  CHECK_THROWS_AS(IK2Tree::from_parts(tree.schedule(), tree.nx(), tree.ysize(), tree.nz(),
                                      false, tree.t(), ik2::BitVector()),
                  ik2::format_error);
  // a too-small matrix for the schedule is rejected as well
  CHECK_THROWS_AS(IK2Tree::from_parts(LevelSchedule::uniform(2, 4), 16, 6, 16, false,
                                      tree.t(), tree.l()),
                  ik2::format_error);
}

TEST_CASE("interleaved build and queries reject bad input", "[ik2tree]") {
  CHECK_THROWS_AS(IK2Tree::build({{8, 0, 0}}, 8, 2, 8, LevelSchedule::uniform(2, 8)),
                  std::invalid_argument);
  CHECK_THROWS_AS(IK2Tree::build({{0, 2, 0}}, 8, 2, 8, LevelSchedule::uniform(2, 8)),
                  std::invalid_argument);
  CHECK_THROWS_AS(IK2Tree::build({}, 8, 0, 8, LevelSchedule::uniform(2, 8)),
                  std::invalid_argument);
  CHECK_THROWS_AS(IK2Tree::build({}, 16, 2, 8, LevelSchedule::uniform(2, 8)),
                  std::invalid_argument);

  auto tree = IK2Tree::build({{1, 1, 1}}, 8, 3, 8, LevelSchedule::uniform(2, 8));
  CHECK_THROWS_AS(tree.query_eager({DimConstraint::fixed(8), DimConstraint::any(),
                                    DimConstraint::any()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(tree.query_eager({DimConstraint::any(), DimConstraint::range(1, 3),
                                    DimConstraint::any()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(tree.contains({1, 3, 1}), std::invalid_argument);
}

TEST_CASE("duplicate triples collapse", "[ik2tree]") {
  auto tree = IK2Tree::build({{1, 1, 1}, {1, 1, 1}}, 4, 2, 4, LevelSchedule::uniform(2, 4));
  CHECK(tree.ntriples() == 1);
}
