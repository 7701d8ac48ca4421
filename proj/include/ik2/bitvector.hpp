#pragma once

#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#if defined(__BMI2__)
#include <immintrin.h>
#endif

#include "ik2/errors.hpp"

namespace ik2 {

// Position of the (n+1)-th set bit of word; word must carry more than n ones.
inline std::uint64_t select_in_word(std::uint64_t word, std::uint64_t n) {
#if defined(__BMI2__)
  return static_cast<std::uint64_t>(
      __builtin_ctzll(_pdep_u64(std::uint64_t{1} << n, word)));
#else
  while (n-- > 0) word &= word - 1;
  return static_cast<std::uint64_t>(__builtin_ctzll(word));
#endif
}

// Append-only bit sequence used while assembling tree levels.
class BitBuffer {
 public:
  void push_back(bool bit) {
    if ((size_ & 63u) == 0) words_.push_back(0);
    if (bit) words_.back() |= std::uint64_t{1} << (size_ & 63u);
    ++size_;
  }

  std::size_t size() const { return size_; }

  bool operator[](std::size_t i) const {
    return (words_[i >> 6] >> (i & 63u)) & 1u;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t> take_words() { return std::move(words_); }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

// Immutable bit sequence with constant-time rank and logarithmic select.
//
// rank1(i) counts ones in the half-open prefix [0, i); select1(j) returns the
// position of the j-th one, j >= 1.  Rank is backed by one absolute cumulative
// count per 512-bit block; select binary-searches that directory and scans a
// single block, so no separate select directory is kept.  Counts are stored
// only at interior block boundaries (the leading boundary is always zero and
// the total is kept as a scalar), which bounds the directory at 12.5% of the
// payload words for every input.
class BitVector {
 public:
  static constexpr std::size_t kBlockBits = 512;
  static constexpr std::size_t kBlockWords = kBlockBits / 64;

  BitVector() = default;

  explicit BitVector(BitBuffer buf) : size_(buf.size()), words_(buf.take_words()) {
    build_directory();
  }

  explicit BitVector(const std::vector<bool>& bits) : size_(bits.size()) {
    words_.assign((size_ + 63) / 64, 0);
    for (std::size_t i = 0; i < size_; ++i)
      if (bits[i]) words_[i >> 6] |= std::uint64_t{1} << (i & 63u);
    build_directory();
  }

  // Adopts pre-packed words; bits past nbits in the last word must be clear.
  static BitVector from_words(std::vector<std::uint64_t> words, std::size_t nbits) {
    BitVector v;
    v.size_ = nbits;
    v.words_ = std::move(words);
    if (v.words_.size() != (nbits + 63) / 64)
      throw std::invalid_argument("bitvector: word count does not match bit count");
    if ((nbits & 63u) != 0 && !v.words_.empty() &&
        (v.words_.back() >> (nbits & 63u)) != 0)
      throw std::invalid_argument("bitvector: nonzero bits past the end");
    v.build_directory();
    return v;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::uint64_t ones() const { return ones_; }

  bool get(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("bitvector: access past the end");
    return (words_[i >> 6] >> (i & 63u)) & 1u;
  }

  // Ones in [0, i); i may equal size().
  std::uint64_t rank1(std::size_t i) const {
    if (i > size_) throw std::out_of_range("bitvector: rank past the end");
    if (i == size_) return ones_;
    const std::size_t block = i / kBlockBits;
    std::uint64_t count = block ? pre_[block - 1] : 0;
    const std::size_t wi = i >> 6;
    for (std::size_t w = block * kBlockWords; w < wi; ++w)
      count += static_cast<std::uint64_t>(__builtin_popcountll(words_[w]));
    if ((i & 63u) != 0)
      count += static_cast<std::uint64_t>(
          __builtin_popcountll(words_[wi] & ((std::uint64_t{1} << (i & 63u)) - 1)));
    return count;
  }

  std::uint64_t ones_in(std::size_t begin, std::size_t end) const {
    if (begin > end) throw std::out_of_range("bitvector: inverted range");
    return rank1(end) - rank1(begin);
  }

  // Position of the j-th one, 1-based.
  std::size_t select1(std::uint64_t j) const {
    if (j == 0 || j > ones_) throw std::out_of_range("bitvector: select out of range");
    const std::size_t block =
        static_cast<std::size_t>(std::lower_bound(pre_.begin(), pre_.end(), j) - pre_.begin());
    std::uint64_t remaining = j - (block ? pre_[block - 1] : 0);
    std::size_t w = block * kBlockWords;
    for (;; ++w) {
      const auto pc = static_cast<std::uint64_t>(__builtin_popcountll(words_[w]));
      if (remaining <= pc) break;
      remaining -= pc;
    }
    return w * 64 + static_cast<std::size_t>(select_in_word(words_[w], remaining - 1));
  }

  // Calls fn(position) for every set bit in [begin, end), ascending.
  template <class Fn>
  void for_each_one(std::size_t begin, std::size_t end, Fn&& fn) const {
    if (begin > end || end > size_) throw std::out_of_range("bitvector: bad scan range");
    if (begin == end) return;
    std::size_t wi = begin >> 6;
    const std::size_t wlast = (end - 1) >> 6;
    for (; wi <= wlast; ++wi) {
      std::uint64_t word = words_[wi];
      if (wi == begin >> 6 && (begin & 63u) != 0)
        word &= ~((std::uint64_t{1} << (begin & 63u)) - 1);
      if (wi == wlast && (end & 63u) != 0)
        word &= (std::uint64_t{1} << (end & 63u)) - 1;
      while (word) {
        fn(wi * 64 + static_cast<std::size_t>(__builtin_ctzll(word)));
        word &= word - 1;
      }
    }
  }

  std::size_t directory_bits() const { return pre_.size() * 64; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  // Payload bytes, LSB-first, zero-padded to a byte boundary.  The bit count
  // travels separately in the enclosing format.
  void write_payload(std::ostream& out) const {
    const std::size_t nbytes = (size_ + 7) / 8;
    for (std::size_t b = 0; b < nbytes; ++b) {
      const unsigned char byte =
          static_cast<unsigned char>((words_[b >> 3] >> ((b & 7u) * 8)) & 0xFFu);
      out.put(static_cast<char>(byte));
    }
  }

  static BitVector read_payload(std::istream& in, std::size_t nbits) {
    std::vector<std::uint64_t> words((nbits + 63) / 64, 0);
    const std::size_t nbytes = (nbits + 7) / 8;
    for (std::size_t b = 0; b < nbytes; ++b) {
      const int ch = in.get();
      if (ch == std::char_traits<char>::eof())
        throw format_error("bit payload truncated");
      words[b >> 3] |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch))
                       << ((b & 7u) * 8);
    }
    if ((nbits & 63u) != 0 && !words.empty() && (words.back() >> (nbits & 63u)) != 0)
      throw format_error("bit payload has nonzero padding");
    return from_words(std::move(words), nbits);
  }

 private:
  void build_directory() {
    pre_.clear();
    const std::size_t nblocks = (size_ + kBlockBits - 1) / kBlockBits;
    std::uint64_t cum = 0;
    for (std::size_t b = 0; b + 1 < nblocks; ++b) {
      const std::size_t wend = std::min(words_.size(), (b + 1) * kBlockWords);
      for (std::size_t w = b * kBlockWords; w < wend; ++w)
        cum += static_cast<std::uint64_t>(__builtin_popcountll(words_[w]));
      pre_.push_back(cum);
    }
    ones_ = cum;
    if (nblocks > 0) {
      for (std::size_t w = (nblocks - 1) * kBlockWords; w < words_.size(); ++w)
        ones_ += static_cast<std::uint64_t>(__builtin_popcountll(words_[w]));
    }
  }

  std::size_t size_ = 0;
  std::uint64_t ones_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> pre_;  // ones before block b+1, b interior
};

}  // namespace ik2
