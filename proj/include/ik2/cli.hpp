#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ik2/datagen.hpp"
#include "ik2/ik2tree.hpp"
#include "ik2/multi_k2tree.hpp"
#include "ik2/rdf.hpp"
#include "ik2/serialize.hpp"
#include "ik2/temporal.hpp"
#include "ik2/text.hpp"

namespace ik2 {
namespace cli_detail {

inline IndexMode mode_from(const std::string& s) {
  if (s == "plain") return IndexMode::Plain;
  if (s == "rdf") return IndexMode::Rdf;
  return IndexMode::Temporal;
}

// --k grammar: "auto", one arity, or a comma list taken as the arity prefix.
inline LevelSchedule make_schedule(const std::string& kflag, IndexMode mode,
                                   std::uint64_t needed) {
  if (kflag == "auto") {
    // floors keep at least two levels, so empty inputs serialize with |L| = 0
    if (mode == IndexMode::Plain)
      return LevelSchedule::uniform(2, std::max<std::uint64_t>(needed, 4));
    if (mode == IndexMode::Rdf)
      return LevelSchedule::rdf_default(std::max<std::uint64_t>(needed, 4));
    return LevelSchedule::temporal_default(std::max<std::uint64_t>(needed, 8));
  }
  std::vector<std::uint32_t> ks;
  std::string item;
  std::istringstream ss(kflag);
  while (std::getline(ss, item, ',')) {
    const auto k = parse_u64(item);
    if (!k || *k < 2 || *k > 0x7fffffffu)
      throw std::invalid_argument("bad --k value '" + item + "'");
    ks.push_back(static_cast<std::uint32_t>(*k));
  }
  if (ks.empty()) throw std::invalid_argument("bad --k '" + kflag + "'");
  if (ks.size() == 1) return LevelSchedule::uniform(ks[0], std::max<std::uint64_t>(needed, 2));
  return LevelSchedule::prefix(std::move(ks), std::max<std::uint64_t>(needed, 2));
}

// Plain-mode triples: "x y z" decimal per line, '#' comments, blanks skipped.
inline std::vector<Triple> read_plain_triples(std::istream& in) {
  std::vector<Triple> out;
  std::string line;
  for (std::uint64_t lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream ss(line);
    std::string a, b, c, extra;
    if (!(ss >> a) || a[0] == '#') continue;
    if (!(ss >> b >> c) || (ss >> extra))
      throw parse_error("line " + std::to_string(lineno) + ": expected 3 fields");
    const auto x = parse_u64(a), y = parse_u64(b), z = parse_u64(c);
    if (!x || !y || !z)
      throw parse_error("line " + std::to_string(lineno) + ": expected 3 decimal integers");
    out.push_back({*x, *y, *z});
  }
  return out;
}

// Pattern token: '?', '?lo-hi', or a literal id.
inline DimConstraint parse_dim_token(const std::string& tok, const char* what) {
  if (tok == "?") return DimConstraint::any();
  if (tok.size() > 1 && tok[0] == '?') {
    const std::string rest = tok.substr(1);
    const auto dash = rest.find('-');
    if (dash != std::string::npos) {
      const auto lo = parse_u64(rest.substr(0, dash));
      const auto hi = parse_u64(rest.substr(dash + 1));
      if (lo && hi && *lo <= *hi) return DimConstraint::range(*lo, *hi);
    }
    throw std::invalid_argument(std::string("bad ") + what + " token '" + tok +
                                "': want '?', '?lo-hi' or an id");
  }
  const auto v = parse_u64(tok);
  if (!v)
    throw std::invalid_argument(std::string("bad ") + what + " token '" + tok +
                                "': want '?', '?lo-hi' or an id");
  return DimConstraint::fixed(*v);
}

// Time token: an instant, or wTL-TR / sTL-TR for weak / strong intervals.
inline TimeQuery parse_time_token(const std::string& tok) {
  if (!tok.empty() && (tok[0] == 'w' || tok[0] == 's')) {
    const std::string rest = tok.substr(1);
    const auto dash = rest.find('-');
    if (dash != std::string::npos) {
      const auto tl = parse_u64(rest.substr(0, dash));
      const auto tr = parse_u64(rest.substr(dash + 1));
      if (tl && tr && *tl <= *tr)
        return tok[0] == 'w' ? TimeQuery::weak(*tl, *tr) : TimeQuery::strong(*tl, *tr);
    }
  } else if (const auto t = parse_u64(tok)) {
    return TimeQuery::instant(*t);
  }
  throw std::invalid_argument("bad time token '" + tok + "': want T, wTL-TR or sTL-TR");
}

inline std::ifstream open_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

inline std::ifstream open_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

inline void print_stats(std::ostream& out, const IK2Tree& tree) {
  const std::uint64_t total = tree.t().size() + tree.l().size();
  const double per = tree.ntriples() ? static_cast<double>(total) / tree.ntriples() : 0.0;
  out << "triples=" << tree.ntriples() << " ysize=" << tree.ysize() << " T=" << tree.t().size()
      << " L=" << tree.l().size() << " bits_per_triple=" << std::fixed << std::setprecision(2)
      << per << std::defaultfloat << '\n';
}

inline int cmd_build(const std::string& in_path, const std::string& out_path,
                     const std::string& mode_flag, const std::string& kflag,
                     std::ostream& out) {
  const IndexMode mode = mode_from(mode_flag);
  auto in = open_text(in_path);
  IK2Tree tree;
  if (mode == IndexMode::Plain) {
    const auto triples = read_plain_triples(in);
    std::uint64_t nx = 1, ysize = 1, nz = 1;
    for (const auto& t : triples) {
      nx = std::max(nx, t.x + 1);
      ysize = std::max(ysize, t.y + 1);
      nz = std::max(nz, t.z + 1);
    }
    const auto sched = make_schedule(kflag, mode, std::max(nx, nz));
    tree = IK2Tree::build(triples, nx, ysize, nz, sched);
  } else if (mode == IndexMode::Rdf) {
    const auto triples = RdfDataset::read_triples(in);
    std::vector<std::string> so, ps;
    for (const auto& t : triples) {
      so.push_back(t.s);
      so.push_back(t.o);
      ps.push_back(t.p);
    }
    auto so_dict = Dictionary::from_terms(std::move(so));
    auto p_dict = Dictionary::from_terms(std::move(ps));
    const std::uint64_t side = std::max<std::uint64_t>(so_dict.size(), 1);
    const auto sched = make_schedule(kflag, mode, side);
    std::vector<Triple> ids;
    ids.reserve(triples.size());
    for (const auto& t : triples)
      ids.push_back({*so_dict.encode(t.s), *p_dict.encode(t.p), *so_dict.encode(t.o)});
    tree = IK2Tree::build(ids, side, std::max<std::uint64_t>(p_dict.size(), 1), side, sched);
    std::ofstream sof(out_path + ".so.dict");
    std::ofstream pf(out_path + ".p.dict");
    if (!sof || !pf) throw std::runtime_error("cannot write dictionaries for " + out_path);
    so_dict.write(sof);
    p_dict.write(pf);
    if (!sof.flush() || !pf.flush())
      throw std::runtime_error("cannot write dictionaries for " + out_path);
  } else {
    const auto changes = read_change_log(in);
    std::uint64_t nodes = 1, instants = 1;
    for (const auto& c : changes) {
      nodes = std::max({nodes, c.x + 1, c.z + 1});
      instants = std::max(instants, c.t + 1);
    }
    const auto sched = make_schedule(kflag, mode, nodes);
    tree = TemporalIndex::build(changes, nodes, instants, sched).tree();
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  write_index(f, tree, mode);
  if (!f.flush()) throw std::runtime_error("cannot write " + out_path);
  print_stats(out, tree);
  return 0;
}

inline int cmd_query(const std::string& index_path, const std::vector<std::string>& tokens,
                     const std::string& strategy_flag, std::ostream& out, std::ostream& err) {
  auto in = open_binary(index_path);
  auto loaded = read_index(in);
  std::uint64_t count = 0;
  if (loaded.mode == IndexMode::Plain) {
    TriplePattern tp{parse_dim_token(tokens[0], "x"), parse_dim_token(tokens[1], "y"),
                     parse_dim_token(tokens[2], "z")};
    bool lazy = strategy_flag == "lazy";
    if (strategy_flag == "auto")
      lazy = tp.y.kind != DimConstraint::Kind::Fixed &&
             (tp.x.kind != DimConstraint::Kind::Fixed ||
              tp.z.kind != DimConstraint::Kind::Fixed) &&
             loaded.tree.ysize() >= RdfDataset::kDefaultLazyThreshold;
    auto rows = lazy ? loaded.tree.query_lazy(tp) : loaded.tree.query_eager(tp);
    std::sort(rows.begin(), rows.end());
    for (const auto& r : rows) out << r.x << ' ' << r.y << ' ' << r.z << '\n';
    count = rows.size();
  } else if (loaded.mode == IndexMode::Rdf) {
    auto so_in = open_text(index_path + ".so.dict");
    auto p_in = open_text(index_path + ".p.dict");
    const auto ds = RdfDataset::from_parts(Dictionary::read(so_in), Dictionary::read(p_in),
                                           std::move(loaded.tree));
    RdfPattern p;
    const auto slot = [](const std::string& tok) -> std::optional<std::string> {
      if (tok == "?") return std::nullopt;
      if (tok.size() > 1 && tok[0] == '?')
        throw std::invalid_argument("term patterns take '?' or a literal term, got '" + tok +
                                    "'");
      return tok;
    };
    p.s = slot(tokens[0]);
    p.p = slot(tokens[1]);
    p.o = slot(tokens[2]);
    const Strategy st = strategy_flag == "eager"  ? Strategy::Eager
                        : strategy_flag == "lazy" ? Strategy::Lazy
                                                  : Strategy::Auto;
    const auto rows = ds.evaluate(p, st);
    for (const auto& r : rows) out << r.s << ' ' << r.p << ' ' << r.o << '\n';
    count = rows.size();
  } else {
    const auto idx = TemporalIndex::from_tree(std::move(loaded.tree));
    const auto xc = parse_dim_token(tokens[0], "x");
    const auto zc = parse_dim_token(tokens[1], "z");
    const auto tq = parse_time_token(tokens[2]);
    const auto rows = idx.query(xc, zc, tq);
    for (const auto& [x, z] : rows) out << x << ' ' << z << '\n';
    count = rows.size();
  }
  err << "# " << count << " results\n";
  return 0;
}

inline int cmd_stats(const std::string& index_path, std::ostream& out) {
  auto in = open_binary(index_path);
  const auto loaded = read_index(in);
  const auto& tree = loaded.tree;
  const char* mode = loaded.mode == IndexMode::Plain  ? "plain"
                     : loaded.mode == IndexMode::Rdf ? "rdf"
                                                      : "temporal";
  out << "mode=" << mode << " nx=" << tree.nx() << " ysize=" << tree.ysize()
      << " nz=" << tree.nz() << " levels=" << tree.schedule().levels() << " ks=";
  const auto& ks = tree.schedule().ks();
  for (std::size_t i = 0; i < ks.size(); ++i) out << (i ? "," : "") << ks[i];
  out << " l_rank=" << (tree.l_rank_enabled() ? 1 : 0) << ' ';
  print_stats(out, tree);
  return 0;
}

template <class Q, class F>
std::pair<double, double> time_queries(const std::vector<Q>& queries, F&& run) {
  std::uint64_t results = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& q : queries) results += run(q);
  const double us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
  return {us / static_cast<double>(queries.size()),
          us / static_cast<double>(std::max<std::uint64_t>(results, 1))};
}

inline void csv_row(std::ostream& out, const std::string& cls, const std::string& backend,
                    std::pair<double, double> t) {
  out << cls << ',' << backend << ',' << std::fixed << std::setprecision(3) << t.first << ','
      << t.second << std::defaultfloat << '\n';
}

inline int bench_rdf(std::uint64_t nodes, std::uint64_t preds, std::uint64_t ntriples,
                     std::uint64_t nqueries, std::uint64_t seed, const std::string& kflag,
                     std::ostream& out) {
  std::mt19937_64 rng(seed);
  ntriples = std::min(ntriples, nodes * nodes * preds);
  const auto triples = gen_triples(rng, nodes, preds, nodes, ntriples);
  const auto sched = make_schedule(kflag, IndexMode::Rdf, nodes);
  const auto ik2 = IK2Tree::build(triples, nodes, preds, nodes, sched);
  const auto mk2 = MultiK2::build(triples, nodes, preds, nodes, sched);
  const struct {
    const char* name;
    bool bs, bp, bo;
  } classes[] = {{"spo", true, true, true},    {"sp?", true, true, false},
                 {"s?o", true, false, true},   {"s??", true, false, false},
                 {"?po", false, true, true},   {"?p?", false, true, false},
                 {"??o", false, false, true},  {"???", false, false, false}};
  std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
  out << "query_class,backend,us_per_query,us_per_result\n";
  for (const auto& cls : classes) {
    std::vector<TriplePattern> queries(nqueries);
    for (auto& q : queries) {
      const auto& base = triples[pick(rng)];
      if (cls.bs) q.x = DimConstraint::fixed(base.x);
      if (cls.bp) q.y = DimConstraint::fixed(base.y);
      if (cls.bo) q.z = DimConstraint::fixed(base.z);
    }
    csv_row(out, cls.name, "mk2",
            time_queries(queries, [&](const TriplePattern& q) { return mk2.query(q).size(); }));
    csv_row(out, cls.name, "ik2-eager", time_queries(queries, [&](const TriplePattern& q) {
              return ik2.query_eager(q).size();
            }));
    if (!cls.bp)
      csv_row(out, cls.name, "ik2-lazy", time_queries(queries, [&](const TriplePattern& q) {
                return ik2.query_lazy(q).size();
              }));
  }
  return 0;
}

inline int bench_temporal(std::uint64_t nodes, std::uint64_t instants, std::uint64_t initial,
                          std::uint64_t toggles, std::uint64_t nqueries, std::uint64_t seed,
                          const std::string& kflag, std::ostream& out) {
  std::mt19937_64 rng(seed);
  if (initial == 0) initial = std::min(nodes * 4, nodes * nodes / 2 + 1);
  if (toggles == 0) toggles = std::max<std::uint64_t>(nodes / 10, 1);
  initial = std::min(initial, nodes * nodes);
  toggles = std::min(toggles, nodes * nodes);
  const auto changes = gen_commnet(rng, nodes, instants, initial, toggles);
  const auto sched = make_schedule(kflag, IndexMode::Temporal, nodes);
  const auto idx = TemporalIndex::build(changes, nodes, instants, sched);
  const auto base = MultiK2Temporal::build(changes, nodes, instants, sched);
  struct TQ {
    DimConstraint xc, zc;
    TimeQuery when;
  };
  std::uniform_int_distribution<std::uint64_t> dn(0, nodes - 1);
  std::uniform_int_distribution<std::uint64_t> dt(0, instants - 1);
  const auto window = [&](int kind) {
    const std::uint64_t a = dt(rng), b = dt(rng);
    const std::uint64_t tl = std::min(a, b), tr = std::max(a, b);
    switch (kind) {
      case 0: return TimeQuery::instant(tr);
      case 1: return TimeQuery::weak(tl, tr);
      default: return TimeQuery::strong(tl, tr);
    }
  };
  const char* kind_name[] = {"instant", "weak", "strong"};
  out << "query_class,backend,us_per_query,us_per_result\n";
  for (int kind = 0; kind < 3; ++kind) {
    for (const bool direct : {true, false}) {
      std::vector<TQ> queries(nqueries);
      for (auto& q : queries) {
        q.xc = direct ? DimConstraint::fixed(dn(rng)) : DimConstraint::any();
        q.zc = direct ? DimConstraint::any() : DimConstraint::fixed(dn(rng));
        q.when = window(kind);
      }
      const std::string cls = std::string(kind_name[kind]) + (direct ? "-direct" : "-reverse");
      csv_row(out, cls, "ik2", time_queries(queries, [&](const TQ& q) {
                return idx.query(q.xc, q.zc, q.when).size();
              }));
      csv_row(out, cls, "mk2", time_queries(queries, [&](const TQ& q) {
                return base.query(q.xc, q.zc, q.when).size();
              }));
    }
  }
  return 0;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"interleaved k2-tree index tool"};
  app.require_subcommand(1);

  std::string b_input, b_output, b_mode = "plain", b_k = "auto";
  auto* build = app.add_subcommand("build", "build an index file from text input");
  build->add_option("--input", b_input, "input text file")->required();
  build->add_option("--output", b_output, "index file to write")->required();
  build->add_option("--mode", b_mode, "input kind")
      ->check(CLI::IsMember({"plain", "rdf", "temporal"}));
  build->add_option("--k", b_k, "level arities: 'auto', one value, or a comma list");

  std::string q_index, q_strategy = "auto";
  std::vector<std::string> q_tokens;
  auto* query = app.add_subcommand("query", "run one pattern against an index file");
  query->add_option("--index", q_index, "index file")->required();
  query->add_option("pattern", q_tokens, "three pattern tokens")->expected(3)->required();
  query->add_option("--strategy", q_strategy, "evaluation strategy")
      ->check(CLI::IsMember({"auto", "eager", "lazy"}));

  std::string s_index;
  auto* stats = app.add_subcommand("stats", "print index file header facts");
  stats->add_option("--index", s_index, "index file")->required();

  std::string n_suite, n_k = "auto";
  std::uint64_t n_seed = 1, n_queries = 500, n_nodes = 300, n_preds = 256, n_triples = 20000;
  std::uint64_t n_instants = 1000, n_initial = 0, n_toggles = 0;
  auto* bench = app.add_subcommand("bench", "time query classes against the baseline");
  bench->add_option("--suite", n_suite, "benchmark suite")
      ->required()
      ->check(CLI::IsMember({"rdf-patterns", "temporal"}));
  bench->add_option("--seed", n_seed, "generator seed");
  bench->add_option("--queries", n_queries, "queries per class")->check(CLI::PositiveNumber);
  bench->add_option("--nodes", n_nodes, "node count")->check(CLI::PositiveNumber);
  bench->add_option("--preds", n_preds, "predicate count")->check(CLI::PositiveNumber);
  bench->add_option("--triples", n_triples, "triple count")->check(CLI::PositiveNumber);
  bench->add_option("--instants", n_instants, "instant count")->check(CLI::PositiveNumber);
  bench->add_option("--initial-edges", n_initial, "edges alive at t0 (0 = auto)");
  bench->add_option("--toggles", n_toggles, "edge toggles per instant (0 = auto)");
  bench->add_option("--k", n_k, "level arities");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (build->parsed()) return cli_detail::cmd_build(b_input, b_output, b_mode, b_k, out);
    if (query->parsed()) return cli_detail::cmd_query(q_index, q_tokens, q_strategy, out, err);
    if (stats->parsed()) return cli_detail::cmd_stats(s_index, out);
    if (n_suite == "rdf-patterns")
      return cli_detail::bench_rdf(n_nodes, n_preds, n_triples, n_queries, n_seed, n_k, out);
    return cli_detail::bench_temporal(n_nodes, n_instants, n_initial, n_toggles, n_queries,
                                      n_seed, n_k, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ik2
