#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "ik2/temporal.hpp"
#include "ik2/triples.hpp"

namespace ik2 {

// Seeded synthetic inputs shared by benchmarks and the acceptance suite.
// Everything here is deterministic in (seed, parameters).

inline std::vector<Triple> gen_triples(std::mt19937_64& rng, std::uint64_t nx,
                                       std::uint64_t ysize, std::uint64_t nz,
                                       std::size_t count) {
  std::set<Triple> seen;
  std::uniform_int_distribution<std::uint64_t> dx(0, nx - 1);
  std::uniform_int_distribution<std::uint64_t> dy(0, ysize - 1);
  std::uniform_int_distribution<std::uint64_t> dz(0, nz - 1);
  while (seen.size() < count) seen.insert({dx(rng), dy(rng), dz(rng)});
  return {seen.begin(), seen.end()};
}

inline std::vector<ChangeRecord> gen_changes(std::mt19937_64& rng, std::uint64_t nodes,
                                             std::uint64_t instants, std::size_t count) {
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> seen;
  std::uniform_int_distribution<std::uint64_t> dn(0, nodes - 1);
  std::uniform_int_distribution<std::uint64_t> dt(0, instants - 1);
  while (seen.size() < count) seen.insert({dn(rng), dn(rng), dt(rng)});
  std::vector<ChangeRecord> out;
  out.reserve(count);
  for (const auto& [x, z, t] : seen) out.push_back({x, z, t});
  return out;
}

// Communication-network-like evolving graph: a snapshot of live edges at
// t = 0, then a fixed budget of edge toggles at every later instant.
inline std::vector<ChangeRecord> gen_commnet(std::mt19937_64& rng, std::uint64_t nodes,
                                             std::uint64_t instants, std::size_t initial_edges,
                                             std::size_t toggles_per_instant) {
  std::uniform_int_distribution<std::uint64_t> dn(0, nodes - 1);
  std::vector<ChangeRecord> out;
  std::set<std::pair<std::uint64_t, std::uint64_t>> cells;
  while (cells.size() < initial_edges) cells.insert({dn(rng), dn(rng)});
  for (const auto& [x, z] : cells) out.push_back({x, z, 0});
  for (std::uint64_t t = 1; t < instants; ++t) {
    cells.clear();
    while (cells.size() < toggles_per_instant) cells.insert({dn(rng), dn(rng)});
    for (const auto& [x, z] : cells) out.push_back({x, z, t});
  }
  return out;
}

}  // namespace ik2
