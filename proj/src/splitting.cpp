#include "fzkit/splitting.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fzkit/stallings.hpp"
#include "fzkit/whitehead.hpp"

namespace fzkit {

const char* to_string(SplitVariant v) { return v == SplitVariant::Amalgam ? "amalgam" : "hnn"; }

const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::Free: return "free";
    case EdgeClass::Cyclic: return "cyclic";
    default: return "maximal-cyclic";
  }
}

const char* to_string(PairType p) {
  switch (p) {
    case PairType::HH: return "HH";
    case PairType::EE: return "EE";
    case PairType::HE: return "HE";
    default: return "EH";
  }
}

namespace {

CoreGraph group_of(const std::vector<Word>& gens, int rank) { return CoreGraph::from_generators(gens, rank); }

std::string word_or_one(const Word& w) { return w.empty() ? "1" : w.str(); }

Word conj_by(const Word& t, const Word& w) { return t.inverse() * w * t; }  // t^-1 w t

// g with g u g^-1 = v, assuming [u] = [v].
std::optional<Word> conjugator(const Word& u, const Word& v) {
  auto cu = cyclic_reduce(u), cv = cyclic_reduce(v);
  if (cu.core.size() != cv.core.size()) return std::nullopt;
  if (cu.core.empty()) return Word();
  std::size_t n = cu.core.size();
  const auto& a = cu.core.letters();
  const auto& b = cv.core.letters();
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) ok = a[(i + j) % n] == b[j];
    if (!ok) continue;
    // core_v = p^-1 core_u p with p the first i letters of core_u
    Word p = cu.core.subword(0, i);
    return cv.conjugator * p.inverse() * cu.conjugator.inverse();
  }
  return std::nullopt;
}

Word root_word(const Word& w) {
  auto cr = cyclic_reduce(w);
  auto [root, e] = CyclicWord(cr.core).root();
  (void)root;
  return cr.conjugator * cr.core.subword(0, cr.core.size() / static_cast<std::size_t>(e)) * cr.conjugator.inverse();
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

Word parse_word(const std::string& tok, int rank, int line, int col) {
  if (tok == "1") return Word();
  try {
    return Word::parse(tok, rank);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line, col);
  } catch (const Error& e) {
    throw ParseError(e.what(), line, col);
  }
}

}  // namespace

// ---- OneEdgeSplitting -------------------------------------------------------

OneEdgeSplitting OneEdgeSplitting::amalgam(int rank, std::vector<Word> v1, std::vector<Word> v2, Word edge) {
  OneEdgeSplitting s;
  s.variant = SplitVariant::Amalgam;
  s.rank = rank;
  s.v1 = std::move(v1);
  s.v2 = std::move(v2);
  s.edge = std::move(edge);
  s.validate();
  return s;
}

OneEdgeSplitting OneEdgeSplitting::hnn(int rank, std::vector<Word> v, Word stable, Word edge) {
  OneEdgeSplitting s;
  s.variant = SplitVariant::HNN;
  s.rank = rank;
  s.v1 = std::move(v);
  s.stable = std::move(stable);
  s.edge = std::move(edge);
  s.validate();
  return s;
}

void OneEdgeSplitting::validate() const {
  if (rank < 1) throw PreconditionFailed("splitting rank must be positive");
  if (v1.empty() || (variant == SplitVariant::Amalgam && v2.empty()))
    throw PreconditionFailed("vertex groups need generators");
  auto g1 = group_of(v1, rank);
  std::vector<Word> all = v1;
  int expected = 0;
  if (variant == SplitVariant::Amalgam) {
    auto g2 = group_of(v2, rank);
    if (!edge.empty() && !(g1.contains(edge) && g2.contains(edge)))
      throw PreconditionFailed("edge word " + edge.str() + " is not in both vertex groups");
    all.insert(all.end(), v2.begin(), v2.end());
    expected = g1.rank() + g2.rank() - (edge.empty() ? 0 : 1);
  } else {
    if (stable.empty()) throw PreconditionFailed("HNN splitting needs a stable letter");
    if (!edge.empty() && !(g1.contains(edge) && g1.contains(conj_by(stable, edge))))
      throw PreconditionFailed("edge word " + edge.str() + " and its stable conjugate must lie in the vertex group");
    all.push_back(stable);
    expected = g1.rank() + (edge.empty() ? 1 : 0);
  }
  if (!generates_free_group(all, rank)) throw PreconditionFailed("vertex groups do not generate F");
  if (expected != rank)
    throw PreconditionFailed("vertex group ranks give rank " + std::to_string(expected) + ", not " +
                             std::to_string(rank));
}

EdgeClass OneEdgeSplitting::tag() const {
  if (edge.empty()) return EdgeClass::Free;
  return CyclicWord(edge).is_proper_power() ? EdgeClass::Cyclic : EdgeClass::MaximalCyclic;
}

bool OneEdgeSplitting::reduced() const {
  if (edge.empty()) return true;
  auto e = group_of({edge}, rank);
  if (variant == SplitVariant::Amalgam)
    return !same_subgroup(e, group_of(v1, rank)) && !same_subgroup(e, group_of(v2, rank));
  auto v = group_of(v1, rank);
  return !same_subgroup(e, v) && !same_subgroup(group_of({conj_by(stable, edge)}, rank), v);
}

std::string OneEdgeSplitting::canonical() const {
  std::vector<std::string> vg{group_of(v1, rank).conjugacy_canonical()};
  if (variant == SplitVariant::Amalgam) vg.push_back(group_of(v2, rank).conjugacy_canonical());
  std::sort(vg.begin(), vg.end());
  std::string out = std::string(to_string(variant)) + "|" + std::to_string(rank);
  for (const auto& s : vg) out += "|" + s;
  out += "|" + (edge.empty() ? std::string("1") : CyclicWord(edge).unoriented().str());
  return out;
}

std::string OneEdgeSplitting::serialize() const {
  std::ostringstream out;
  out << to_string(variant) << " " << rank << "\n";
  auto line = [&](const std::vector<Word>& gens) {
    out << "vertex";
    for (const auto& w : gens) out << " " << word_or_one(w);
    out << "\n";
  };
  line(v1);
  if (variant == SplitVariant::Amalgam) line(v2);
  else out << "stable " << word_or_one(stable) << "\n";
  out << "edge " << word_or_one(edge) << "\n";
  return out.str();
}

OneEdgeSplitting OneEdgeSplitting::parse(std::string_view text) {
  OneEdgeSplitting s;
  bool header = false, have_edge = false, have_stable = false;
  std::vector<std::vector<Word>> vertices;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    auto tok = tokens_of(raw);
    if (tok.empty()) continue;
    int col = static_cast<int>(raw.find(tok[0])) + 1;
    if (!header) {
      if (tok.size() != 2 || (tok[0] != "amalgam" && tok[0] != "hnn"))
        throw ParseError("expected 'amalgam <rank>' or 'hnn <rank>'", lineno, col);
      s.variant = tok[0] == "amalgam" ? SplitVariant::Amalgam : SplitVariant::HNN;
      try {
        s.rank = std::stoi(tok[1]);
      } catch (const std::exception&) {
        throw ParseError("bad rank '" + tok[1] + "'", lineno, col);
      }
      if (s.rank < 1 || s.rank > 26) throw ParseError("rank out of range", lineno, col);
      header = true;
      continue;
    }
    auto word_at = [&](std::size_t i) {
      return parse_word(tok[i], s.rank, lineno, static_cast<int>(raw.find(tok[i])) + 1);
    };
    if (tok[0] == "vertex") {
      std::vector<Word> gens;
      for (std::size_t i = 1; i < tok.size(); ++i) gens.push_back(word_at(i));
      vertices.push_back(std::move(gens));
    } else if (tok[0] == "edge" && tok.size() == 2 && !have_edge) {
      s.edge = word_at(1);
      have_edge = true;
    } else if (tok[0] == "stable" && tok.size() == 2 && !have_stable) {
      s.stable = word_at(1);
      have_stable = true;
    } else {
      throw ParseError("unexpected line '" + tok[0] + "'", lineno, col);
    }
  }
  if (!header) throw ParseError("empty splitting file", lineno, 1);
  std::size_t want = s.variant == SplitVariant::Amalgam ? 2 : 1;
  if (vertices.size() != want) throw ParseError("expected " + std::to_string(want) + " vertex lines", lineno, 1);
  if (s.variant == SplitVariant::HNN && !have_stable) throw ParseError("missing stable line", lineno, 1);
  if (s.variant == SplitVariant::Amalgam && have_stable) throw ParseError("amalgam has no stable letter", lineno, 1);
  s.v1 = vertices[0];
  if (want == 2) s.v2 = vertices[1];
  s.validate();
  return s;
}

// ---- folds, ellipticity, equivalence ----------------------------------------

OneEdgeSplitting edge_fold(const OneEdgeSplitting& s, const Word& w, int side) {
  if (!s.edge.empty()) throw PreconditionFailed("edge fold needs a free splitting");
  if (w.empty()) throw WNotInVertexGroup("fold word is trivial");
  OneEdgeSplitting out = s;
  out.edge = w;
  if (s.variant == SplitVariant::Amalgam) {
    if (side != 0 && side != 1) throw PreconditionFailed("side must be 0 or 1");
    const auto& home = side == 0 ? s.v1 : s.v2;
    if (!group_of(home, s.rank).contains(w)) throw WNotInVertexGroup(w.str() + " is not in the chosen vertex group");
    auto& other = side == 0 ? out.v2 : out.v1;
    other.push_back(w);
  } else {
    if (!group_of(s.v1, s.rank).contains(w)) throw WNotInVertexGroup(w.str() + " is not in the vertex group");
    out.v1.push_back(conj_by(s.stable, w));
  }
  out.validate();
  return out;
}

bool is_elliptic(const CyclicWord& c, const OneEdgeSplitting& s) {
  if (c.empty()) return true;
  if (group_of(s.v1, s.rank).contains_conjugate(c)) return true;
  return s.variant == SplitVariant::Amalgam && group_of(s.v2, s.rank).contains_conjugate(c);
}

PairType pair_type(const OneEdgeSplitting& s, const OneEdgeSplitting& t) {
  if (s.edge.empty() || t.edge.empty()) throw TrivialEdgeGroup("pair types need cyclic edge groups");
  bool se = is_elliptic(CyclicWord(s.edge), t);
  bool te = is_elliptic(CyclicWord(t.edge), s);
  if (se && te) return PairType::EE;
  if (!se && !te) return PairType::HH;
  return se ? PairType::EH : PairType::HE;
}

OneEdgeSplitting apply_aut(const OneEdgeSplitting& s, const FreeAutomorphism& phi) {
  OneEdgeSplitting out = s;
  for (auto& w : out.v1) w = phi.apply(w);
  for (auto& w : out.v2) w = phi.apply(w);
  out.edge = phi.apply(s.edge);
  out.stable = phi.apply(s.stable);
  return out;
}

bool equivalent(const OneEdgeSplitting& s, const OneEdgeSplitting& t) {
  return s.rank == t.rank && s.canonical() == t.canonical();
}

std::optional<InvariantSplitting> invariant_splitting_search(const FreeAutomorphism& phi, const OneEdgeSplitting& seed,
                                                             int power_cap) {
  OneEdgeSplitting cur = seed;
  std::string target = seed.canonical();
  for (int k = 1; k <= power_cap; ++k) {
    cur = apply_aut(cur, phi);
    if (cur.canonical() == target) return InvariantSplitting{k, seed};
  }
  return std::nullopt;
}

std::vector<OneEdgeSplitting> seeds_from_class(const CyclicWord& w, int rank) {
  std::vector<OneEdgeSplitting> out;
  if (w.empty() || rank < 2) return out;
  CyclicWord r = w.root().first;
  auto wm = whitehead_minimize({r}, rank);
  if (wm.minimal.size() != 1 || wm.minimal[0].size() != 1) return out;
  int x = gen_index(wm.minimal[0].word().front());
  FreeAutomorphism back = invert(wm.composite);
  Word xw = Word::generator(x);
  std::vector<int> rest;
  for (int i = 0; i < rank; ++i)
    if (i != x) rest.push_back(i);
  auto transport = [&](OneEdgeSplitting s) {
    s = apply_aut(s, back);
    s.validate();
    out.push_back(std::move(s));
  };
  // amalgams over <x>: split the remaining generators into two nonempty parts
  int m = static_cast<int>(rest.size());
  for (int mask = 1; mask < (1 << m) - 1; ++mask) {
    if (!(mask & 1)) continue;  // first generator on the left; each partition once
    std::vector<Word> left{xw}, right{xw};
    for (int i = 0; i < m; ++i) ((mask >> i) & 1 ? left : right).push_back(Word::generator(rest[static_cast<std::size_t>(i)]));
    OneEdgeSplitting s;
    s.variant = SplitVariant::Amalgam;
    s.rank = rank;
    s.v1 = left;
    s.v2 = right;
    s.edge = xw;
    transport(s);
  }
  // HNN extensions: fold the free HNN with stable letter y along x
  for (int y : rest) {
    OneEdgeSplitting s;
    s.variant = SplitVariant::HNN;
    s.rank = rank;
    s.v1 = {xw};
    for (int z : rest)
      if (z != y) s.v1.push_back(Word::generator(z));
    s.stable = Word::generator(y);
    s.edge = xw;
    s.v1.push_back(conj_by(s.stable, xw));
    transport(s);
  }
  return out;
}

// ---- adapted bases and twists ---------------------------------------------

std::optional<std::vector<Word>> express_generators(const std::vector<Word>& gens, int rank) {
  // Stallings folding that carries, on every edge, a word over the generating
  // set. Invariant: for an edge u -> v with letter l and hidden word h there
  // are tau(u), tau(v) in F with tau(base) = 1 and h evaluating to
  // tau(u) l tau(v)^-1, so closed paths at the base read off expressions.
  struct E {
    int from, to;
    Letter label;
    Word hidden;
    bool alive = true;
  };
  std::vector<E> edges;
  int nv = 1;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const auto& w = gens[k].letters();
    if (w.empty()) continue;
    int prev = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      int next = i + 1 == w.size() ? 0 : nv++;
      Word h = i + 1 == w.size() ? Word::generator(static_cast<int>(k)) : Word();
      if (w[i] > 0) edges.push_back({prev, next, w[i], h});
      else edges.push_back({next, prev, -w[i], h.inverse()});
      prev = next;
    }
  }
  std::vector<int> rep(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) rep[static_cast<std::size_t>(i)] = i;
  // oriented end out of a vertex: (edge id, forward?)
  auto out_label = [&](const E& e, bool fwd) { return fwd ? e.label : -e.label; };
  auto out_hidden = [&](const E& e, bool fwd) { return fwd ? e.hidden : e.hidden.inverse(); };
  for (;;) {
    bool folded = false;
    std::map<std::pair<int, Letter>, std::pair<std::size_t, bool>> seen;
    for (std::size_t id = 0; id < edges.size() && !folded; ++id) {
      if (!edges[id].alive) continue;
      for (bool fwd : {true, false}) {
        const E& e = edges[id];
        int u = fwd ? e.from : e.to;
        Letter l = out_label(e, fwd);
        auto [it, fresh] = seen.emplace(std::make_pair(u, l), std::make_pair(id, fwd));
        if (fresh) continue;
        auto [id1, fwd1] = it->second;
        if (id1 == id) continue;
        std::size_t id2 = id;
        bool fwd2 = fwd;
        int v1 = fwd1 ? edges[id1].to : edges[id1].from;
        int v2 = fwd2 ? edges[id2].to : edges[id2].from;
        Word h1 = out_hidden(edges[id1], fwd1), h2 = out_hidden(edges[id2], fwd2);
        edges[id2].alive = false;
        if (v1 != v2) {
          if (v2 == 0) {  // keep the base
            std::swap(v1, v2);
            std::swap(h1, h2);
          }
          // merge v2 into v1; an edge leaving v2 with hidden h becomes h1^-1 h2 h
          Word shift = h1.inverse() * h2;
          for (auto& g : edges) {
            if (!g.alive) continue;
            if (g.from == v2) {
              g.hidden = shift * g.hidden;
              g.from = v1;
            }
            if (g.to == v2) {
              g.hidden = g.hidden * shift.inverse();
              g.to = v1;
            }
          }
        }
        folded = true;
        break;
      }
    }
    if (!folded) break;
  }
  std::vector<std::optional<Word>> found(static_cast<std::size_t>(rank));
  for (const auto& e : edges) {
    if (!e.alive) continue;
    if (e.from != 0 || e.to != 0) return std::nullopt;
    found[static_cast<std::size_t>(e.label - 1)] = e.hidden;
  }
  std::vector<Word> out;
  for (auto& f : found) {
    if (!f) return std::nullopt;
    out.push_back(*f);
  }
  return out;
}

namespace {

Word substitute(const Word& w, const std::vector<Word>& images) {
  std::vector<Letter> raw;
  for (Letter x : w.letters()) {
    Word img = x > 0 ? images[static_cast<std::size_t>(x - 1)] : images[static_cast<std::size_t>(-x - 1)].inverse();
    raw.insert(raw.end(), img.letters().begin(), img.letters().end());
  }
  return Word::reduce(raw);
}

}  // namespace

FreeAutomorphism dehn_twist(const OneEdgeSplitting& s) {
  if (s.edge.empty()) throw PreconditionFailed("Dehn twist needs a nontrivial edge word");
  std::vector<Word> xs, ys;
  const Word& w = s.edge;
  for (const auto& g : s.v1) {
    xs.push_back(g);
    ys.push_back(s.variant == SplitVariant::Amalgam ? w * g * w.inverse() : g);
  }
  if (s.variant == SplitVariant::Amalgam) {
    for (const auto& g : s.v2) {
      xs.push_back(g);
      ys.push_back(g);
    }
  } else {
    xs.push_back(s.stable);
    ys.push_back(w * s.stable);
  }
  auto expr = express_generators(xs, s.rank);
  if (!expr) throw BasisAdaptationFailed("splitting generators do not generate F");
  std::vector<Word> images;
  for (const auto& e : *expr) images.push_back(substitute(e, ys));
  FreeAutomorphism d(s.rank, images);
  try {
    (void)invert(d);
  } catch (const NotAnAutomorphism&) {
    throw BasisAdaptationFailed("twist images do not form a basis");
  }
  for (int k = 1; k <= 12; ++k)
    if (is_inner(power(d, k))) throw PreconditionFailed("twist has finite order in Out(F); splitting is not reduced");
  return d;
}

// ---- graphs of groups -------------------------------------------------------

GraphOfGroups GraphOfGroups::from_splitting(const OneEdgeSplitting& s) {
  if (s.edge.empty()) throw TrivialEdgeGroup("graphs of groups here carry cyclic edge groups");
  GraphOfGroups g;
  g.rank = s.rank;
  g.vertex_groups.push_back(s.v1);
  if (s.variant == SplitVariant::Amalgam) {
    g.vertex_groups.push_back(s.v2);
    g.edges.push_back({0, 1, s.edge, s.edge, Word()});
  } else {
    g.edges.push_back({0, 0, s.edge, conj_by(s.stable, s.edge), s.stable});
  }
  g.validate();
  return g;
}

void GraphOfGroups::validate() const {
  std::vector<CoreGraph> groups;
  for (const auto& v : vertex_groups) groups.push_back(group_of(v, rank));
  int nv = static_cast<int>(vertex_groups.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    std::string name = "edge " + std::to_string(i);
    if (e.from < 0 || e.from >= nv || e.to < 0 || e.to >= nv) throw PreconditionFailed(name + ": bad endpoint");
    if (e.alpha.empty()) throw PreconditionFailed(name + ": trivial edge group");
    if (!groups[static_cast<std::size_t>(e.from)].contains(e.alpha))
      throw PreconditionFailed(name + ": alpha not in its vertex group");
    if (!groups[static_cast<std::size_t>(e.to)].contains(e.omega))
      throw PreconditionFailed(name + ": omega not in its vertex group");
    if (conj_by(e.stable, e.alpha) != e.omega) throw PreconditionFailed(name + ": omega is not stable^-1 alpha stable");
  }
}

bool GraphOfGroups::reduced() const {
  for (const auto& e : edges) {
    if (e.from == e.to) continue;
    auto c = group_of({e.alpha}, rank);
    if (same_subgroup(c, group_of(vertex_groups[static_cast<std::size_t>(e.from)], rank))) return false;
    if (same_subgroup(group_of({e.omega}, rank), group_of(vertex_groups[static_cast<std::size_t>(e.to)], rank)))
      return false;
  }
  return true;
}

bool GraphOfGroups::is_elliptic(const CyclicWord& c) const {
  if (c.empty()) return true;
  for (const auto& v : vertex_groups)
    if (group_of(v, rank).contains_conjugate(c)) return true;
  return false;
}

namespace {

// Conjugacy class of x inside the vertex group H (x in H): the cyclically
// reduced loop in H's graph, as (start vertex, word) minimized over rotations.
std::string local_class(const CoreGraph& h, const Word& x) {
  auto cr = cyclic_reduce(x);
  int u = h.read(0, cr.conjugator);
  const auto& core = cr.core.letters();
  std::size_t n = core.size();
  std::string best;
  int v = u;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Letter> rot(core.begin() + static_cast<long>(i), core.end());
    rot.insert(rot.end(), core.begin(), core.begin() + static_cast<long>(i));
    std::string cand = std::to_string(v) + ":" + Word::reduce(rot).str();
    if (best.empty() || cand < best) best = cand;
    v = h.target(v, core[i]);
  }
  return best;
}

}  // namespace

std::string GraphOfGroups::canonical() const {
  std::vector<CoreGraph> groups;
  for (const auto& v : vertex_groups) groups.push_back(group_of(v, rank));
  std::vector<std::string> descs;
  for (const auto& e : edges) {
    std::string best;
    for (int inv = 0; inv < 2; ++inv) {
      Word a = inv ? e.alpha.inverse() : e.alpha, o = inv ? e.omega.inverse() : e.omega;
      std::string ca = local_class(groups[static_cast<std::size_t>(e.from)], a);
      std::string co = local_class(groups[static_cast<std::size_t>(e.to)], o);
      std::string fwd = std::to_string(e.from) + ">" + std::to_string(e.to) + "[" + ca + "|" + co + "]";
      std::string bwd = std::to_string(e.to) + ">" + std::to_string(e.from) + "[" + co + "|" + ca + "]";
      for (const auto& c : {fwd, bwd})
        if (best.empty() || c < best) best = c;
    }
    descs.push_back(best);
  }
  std::sort(descs.begin(), descs.end());
  std::string out = std::to_string(rank);
  for (const auto& g : groups) out += "|" + g.canonical();
  for (const auto& d : descs) out += ";" + d;
  return out;
}

GraphOfGroups slide(const GraphOfGroups& g, int e, int e_end, int f, int f_end) {
  int ne = static_cast<int>(g.edges.size());
  if (e < 0 || e >= ne || f < 0 || f >= ne) throw PreconditionFailed("edge index out of range");
  if (e == f) throw PreconditionFailed("an edge cannot slide across itself");
  if ((e_end != 0 && e_end != 1) || (f_end != 0 && f_end != 1)) throw PreconditionFailed("ends are 0 or 1");
  const GoGEdge& E = g.edges[static_cast<std::size_t>(e)];
  const GoGEdge& Fd = g.edges[static_cast<std::size_t>(f)];
  // orient both edges away from the shared vertex
  int v = e_end == 0 ? E.from : E.to;
  int w = e_end == 0 ? E.to : E.from;
  Word ae = e_end == 0 ? E.alpha : E.omega, oe = e_end == 0 ? E.omega : E.alpha;
  Word te = e_end == 0 ? E.stable : E.stable.inverse();
  int fv = f_end == 0 ? Fd.from : Fd.to;
  Word af = f_end == 0 ? Fd.alpha : Fd.omega;
  Word tf = f_end == 0 ? Fd.stable : Fd.stable.inverse();
  if (fv != v) throw PreconditionFailed("edges do not share the chosen vertex");
  std::size_t le = cyclic_length(ae), lf = cyclic_length(af);
  if (le == 0 || lf % le != 0) throw PreconditionFailed("edge group of f is not contained in that of e");
  long m = static_cast<long>(lf / le);
  auto vg = group_of(g.vertex_groups[static_cast<std::size_t>(v)], g.rank);
  Word root = root_word(ae);
  for (long k : {m, -m}) {
    Word target = ae.pow(k);
    auto y0 = conjugator(target, af);  // y0 ae^k y0^-1 = af
    if (!y0) continue;
    for (long j : {0L, 1L, -1L, 2L, -2L, 3L, -3L, 4L, -4L}) {
      Word y = *y0 * root.pow(j);
      if (!vg.contains(y)) continue;
      GraphOfGroups out = g;
      GoGEdge& nf = out.edges[static_cast<std::size_t>(f)];
      Word alpha2 = oe.pow(k);
      Word t2 = te.inverse() * y.inverse() * tf;
      if (f_end == 0) {
        nf.from = w;
        nf.alpha = alpha2;
        nf.stable = t2;
      } else {
        nf.to = w;
        nf.omega = alpha2;
        nf.stable = t2.inverse();
      }
      out.validate();
      return out;
    }
  }
  throw PreconditionFailed("edge group of f is not contained in that of e");
}

SlideOrbit enumerate_slides(const GraphOfGroups& g, std::size_t cap) {
  SlideOrbit orbit;
  std::unordered_set<std::string> seen{g.canonical()};
  orbit.members.push_back(g);
  std::deque<std::size_t> queue{0};
  int ne = static_cast<int>(g.edges.size());
  while (!queue.empty()) {
    GraphOfGroups cur = orbit.members[queue.front()];
    queue.pop_front();
    for (int e = 0; e < ne; ++e)
      for (int f = 0; f < ne; ++f) {
        if (e == f) continue;
        for (int ee = 0; ee < 2; ++ee)
          for (int fe = 0; fe < 2; ++fe) {
            const auto& E = cur.edges[static_cast<std::size_t>(e)];
            const auto& Fd = cur.edges[static_cast<std::size_t>(f)];
            if ((ee == 0 ? E.from : E.to) != (fe == 0 ? Fd.from : Fd.to)) continue;
            GraphOfGroups next;
            try {
              next = slide(cur, e, ee, f, fe);
            } catch (const PreconditionFailed&) {
              continue;
            }
            if (!seen.insert(next.canonical()).second) continue;
            if (orbit.members.size() >= cap) {
              orbit.capped = true;
              return orbit;
            }
            orbit.members.push_back(next);
            queue.push_back(orbit.members.size() - 1);
          }
      }
  }
  return orbit;
}

}  // namespace fzkit
