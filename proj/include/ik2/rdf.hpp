#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ik2/errors.hpp"
#include "ik2/ik2tree.hpp"

namespace ik2 {

// Sorted term table; ids are the ranks, so id order equals term order.
class Dictionary {
 public:
  Dictionary() = default;

  static Dictionary from_terms(std::vector<std::string> terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    Dictionary d;
    d.terms_ = std::move(terms);
    return d;
  }

  std::uint64_t size() const { return terms_.size(); }

  const std::string& term(std::uint64_t id) const {
    if (id >= terms_.size()) throw std::invalid_argument("dictionary: id out of range");
    return terms_[id];
  }

  std::optional<std::uint64_t> encode(const std::string& term) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
    if (it == terms_.end() || *it != term) return std::nullopt;
    return static_cast<std::uint64_t>(it - terms_.begin());
  }

  // One term per line.  Terms are whitespace-free tokens, so the framing is
  // lossless; readers insist on the sorted order ids depend on.
  void write(std::ostream& out) const {
    for (const auto& t : terms_) out << t << '\n';
  }

  static Dictionary read(std::istream& in) {
    Dictionary d;
    std::string line;
    while (std::getline(in, line)) {
      if (!d.terms_.empty() && line <= d.terms_.back())
        throw format_error("dictionary: terms not strictly increasing");
      d.terms_.push_back(line);
    }
    return d;
  }

 private:
  std::vector<std::string> terms_;
};

struct RdfTriple {
  std::string s, p, o;

  friend auto operator<=>(const RdfTriple&, const RdfTriple&) = default;
};

// Triple pattern at the string level; an empty slot is unbounded.
struct RdfPattern {
  std::optional<std::string> s, p, o;
};

enum class Strategy : std::uint8_t { Auto, Eager, Lazy };

// Triple store with predicate as the partition dimension.  Subjects and
// objects share one dictionary, so the matrix is square and an id means the
// same node on either side.
class RdfDataset {
 public:
  static constexpr std::uint64_t kDefaultLazyThreshold = 64;

  static RdfDataset from_triples(const std::vector<RdfTriple>& triples,
                                 std::uint64_t lazy_threshold = kDefaultLazyThreshold) {
    std::vector<std::string> so, ps;
    for (const auto& t : triples) {
      so.push_back(t.s);
      so.push_back(t.o);
      ps.push_back(t.p);
    }
    RdfDataset ds;
    ds.so_ = Dictionary::from_terms(std::move(so));
    ds.p_ = Dictionary::from_terms(std::move(ps));
    ds.lazy_threshold_ = lazy_threshold;
    std::vector<Triple> ids;
    ids.reserve(triples.size());
    for (const auto& t : triples) ids.push_back({*ds.so_.encode(t.s), *ds.p_.encode(t.p), *ds.so_.encode(t.o)});
    const std::uint64_t side = std::max<std::uint64_t>(ds.so_.size(), 1);
    ds.index_ = IK2Tree::build(ids, side, std::max<std::uint64_t>(ds.p_.size(), 1), side,
                               LevelSchedule::rdf_default(side));
    return ds;
  }

  // One triple per line, three whitespace-separated terms.  Blank lines are
  // skipped; any other token count is an error naming the line.
  static RdfDataset ingest(std::istream& in,
                           std::uint64_t lazy_threshold = kDefaultLazyThreshold) {
    return from_triples(read_triples(in), lazy_threshold);
  }

  // Reassemble a dataset from a loaded index and its dictionary files.
  static RdfDataset from_parts(Dictionary so, Dictionary p, IK2Tree index,
                               std::uint64_t lazy_threshold = kDefaultLazyThreshold) {
    const std::uint64_t side = std::max<std::uint64_t>(so.size(), 1);
    if (index.nx() != side || index.nz() != side ||
        index.ysize() != std::max<std::uint64_t>(p.size(), 1))
      throw format_error("rdf: index does not match the dictionaries");
    RdfDataset ds;
    ds.so_ = std::move(so);
    ds.p_ = std::move(p);
    ds.index_ = std::move(index);
    ds.lazy_threshold_ = lazy_threshold;
    return ds;
  }

  static std::vector<RdfTriple> read_triples(std::istream& in) {
    std::vector<RdfTriple> out;
    std::string line;
    for (std::uint64_t lineno = 1; std::getline(in, line); ++lineno) {
      std::istringstream ss(line);
      std::string a, b, c, extra;
      if (!(ss >> a)) continue;
      if (!(ss >> b >> c) || (ss >> extra))
        throw parse_error("line " + std::to_string(lineno) + ": expected 3 terms");
      out.push_back({std::move(a), std::move(b), std::move(c)});
    }
    return out;
  }

  const Dictionary& so_dict() const { return so_; }
  const Dictionary& p_dict() const { return p_; }
  const IK2Tree& index() const { return index_; }
  std::uint64_t ntriples() const { return index_.ntriples(); }
  std::uint64_t lazy_threshold() const { return lazy_threshold_; }

  // Lazy pays off only when the predicate is open, more than one branch
  // survives (some of s/o open too) and the predicate space is wide enough.
  static Strategy choose_strategy(const RdfPattern& p, std::uint64_t ysize,
                                  std::uint64_t threshold = kDefaultLazyThreshold) {
    const bool multi_branch = !p.s.has_value() || !p.o.has_value();
    if (!p.p.has_value() && multi_branch && ysize >= threshold) return Strategy::Lazy;
    return Strategy::Eager;
  }

  std::vector<RdfTriple> evaluate(const RdfPattern& p, Strategy strategy = Strategy::Auto) const {
    if (ntriples() == 0) return {};
    TriplePattern tp;
    if (p.s) {
      auto id = so_.encode(*p.s);
      if (!id) return {};
      tp.x = DimConstraint::fixed(*id);
    }
    if (p.p) {
      auto id = p_.encode(*p.p);
      if (!id) return {};
      tp.y = DimConstraint::fixed(*id);
    }
    if (p.o) {
      auto id = so_.encode(*p.o);
      if (!id) return {};
      tp.z = DimConstraint::fixed(*id);
    }
    if (strategy == Strategy::Auto) strategy = choose_strategy(p, p_.size(), lazy_threshold_);
    auto rows =
        strategy == Strategy::Lazy ? index_.query_lazy(tp) : index_.query_eager(tp);
    // id order equals term order per dictionary, so (x, y, z) is (s, p, o)
    std::sort(rows.begin(), rows.end());
    std::vector<RdfTriple> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({so_.term(r.x), p_.term(r.y), so_.term(r.z)});
    return out;
  }

 private:
  Dictionary so_;
  Dictionary p_;
  IK2Tree index_;
  std::uint64_t lazy_threshold_ = kDefaultLazyThreshold;
};

}  // namespace ik2
