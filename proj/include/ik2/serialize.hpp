#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "ik2/errors.hpp"
#include "ik2/ik2tree.hpp"

namespace ik2 {

// Index file layout: magic "IK2X", version byte, mode byte, then
// little-endian u64 fields nx, ysize, nz, level count, one K per level,
// l_rank flag, |T| bits, |L| bits, followed by the two bit payloads.
enum class IndexMode : std::uint8_t { Plain = 0, Rdf = 1, Temporal = 2 };

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  char b[8];
  if (!in.read(b, 8)) throw format_error("index: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

}  // namespace detail

inline void write_index(std::ostream& out, const IK2Tree& tree, IndexMode mode) {
  out.write("IK2X", 4);
  out.put(1);
  out.put(static_cast<char>(mode));
  detail::put_u64(out, tree.nx());
  detail::put_u64(out, tree.ysize());
  detail::put_u64(out, tree.nz());
  const auto& ks = tree.schedule().ks();
  detail::put_u64(out, ks.size());
  for (auto k : ks) detail::put_u64(out, k);
  detail::put_u64(out, tree.l_rank_enabled() ? 1 : 0);
  detail::put_u64(out, tree.t().size());
  detail::put_u64(out, tree.l().size());
  tree.t().write_payload(out);
  tree.l().write_payload(out);
  if (!out) throw format_error("index: write failed");
}

struct LoadedIndex {
  IndexMode mode = IndexMode::Plain;
  IK2Tree tree;
};

inline LoadedIndex read_index(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != "IK2X")
    throw format_error("index: bad magic");
  const int version = in.get();
  if (version != 1) throw format_error("index: unsupported version");
  const int mode_byte = in.get();
  if (mode_byte < 0 || mode_byte > 2) throw format_error("index: unknown mode");
  const auto mode = static_cast<IndexMode>(mode_byte);
  const std::uint64_t nx = detail::get_u64(in);
  const std::uint64_t ysize = detail::get_u64(in);
  const std::uint64_t nz = detail::get_u64(in);
  const std::uint64_t nlevels = detail::get_u64(in);
  if (nlevels == 0 || nlevels > 64) throw format_error("index: level count out of range");
  std::vector<std::uint32_t> ks(nlevels);
  for (std::size_t i = 0; i < nlevels; ++i) {
    const std::uint64_t v = detail::get_u64(in);
    if (v < 2 || v > 0x7fffffffu) throw format_error("index: K out of range");
    ks[i] = static_cast<std::uint32_t>(v);
  }
  const std::uint64_t l_rank = detail::get_u64(in);
  if (l_rank > 1) throw format_error("index: bad flag");
  if (mode == IndexMode::Temporal && l_rank != 1)
    throw format_error("index: temporal mode needs rank on L");
  const std::uint64_t tbits = detail::get_u64(in);
  const std::uint64_t lbits = detail::get_u64(in);
  // size guard so a corrupt header cannot drive allocations
  if (tbits > (1ull << 40) || lbits > (1ull << 40))
    throw format_error("index: bit count out of range");
  BitVector t = BitVector::read_payload(in, tbits);
  BitVector l = BitVector::read_payload(in, lbits);
  if (in.peek() != std::char_traits<char>::eof())
    throw format_error("index: trailing bytes");
  LevelSchedule sched = LevelSchedule::from_ks(std::move(ks));
  LoadedIndex out;
  out.mode = mode;
  out.tree = IK2Tree::from_parts(std::move(sched), nx, ysize, nz, l_rank == 1, std::move(t),
                                 std::move(l));
  return out;
}

}  // namespace ik2
