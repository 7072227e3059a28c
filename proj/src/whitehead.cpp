#include "fzkit/whitehead.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>

namespace fzkit {

FreeAutomorphism WhiteheadMove::automorphism(int rank) const {
  std::vector<Word> im;
  Word a = Word::reduce({multiplier});
  for (int i = 0; i < rank; ++i) {
    Word x = Word::generator(i);
    if (i == gen_index(multiplier)) {
      im.push_back(x);
      continue;
    }
    bool right = in_set[static_cast<std::size_t>(letter_key(i + 1))];
    bool left = in_set[static_cast<std::size_t>(letter_key(-(i + 1)))];
    Word y = x;
    if (right) y = y * a;
    if (left) y = a.inverse() * y;
    im.push_back(y);
  }
  return FreeAutomorphism(rank, im);
}

std::vector<WhiteheadMove> whitehead_moves(int rank) {
  std::vector<WhiteheadMove> out;
  int nl = 2 * rank;
  for (int ka = 0; ka < nl; ++ka) {
    Letter a = letter_from_key(ka);
    std::vector<int> others;
    for (int k = 0; k < nl; ++k)
      if (gen_index(letter_from_key(k)) != gen_index(a)) others.push_back(k);
    std::size_t full = (std::size_t{1} << others.size()) - 1;
    for (std::size_t mask = 1; mask < full; ++mask) {
      WhiteheadMove m;
      m.multiplier = a;
      m.in_set.assign(static_cast<std::size_t>(nl), false);
      m.in_set[static_cast<std::size_t>(ka)] = true;
      for (std::size_t b = 0; b < others.size(); ++b)
        if (mask >> b & 1) m.in_set[static_cast<std::size_t>(others[b])] = true;
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::size_t total_length(const std::vector<CyclicWord>& s) {
  std::size_t t = 0;
  for (const auto& c : s) t += c.size();
  return t;
}

std::vector<CyclicWord> apply_all(const FreeAutomorphism& phi, const std::vector<CyclicWord>& s) {
  std::vector<CyclicWord> r;
  r.reserve(s.size());
  for (const auto& c : s) r.push_back(phi.apply(c));
  std::sort(r.begin(), r.end());
  return r;
}

namespace {

std::vector<CyclicWord> canonical_set(const std::vector<CyclicWord>& s) {
  std::vector<CyclicWord> r;
  for (const auto& c : s)
    if (!c.empty()) r.push_back(CyclicWord(c.word()));
  std::sort(r.begin(), r.end());
  return r;
}

std::vector<int> used_generators(const std::vector<CyclicWord>& s, int rank) {
  std::vector<bool> used(static_cast<std::size_t>(rank), false);
  for (const auto& c : s)
    for (Letter x : c.word().letters()) used[static_cast<std::size_t>(gen_index(x))] = true;
  std::vector<int> r;
  for (int i = 0; i < rank; ++i)
    if (used[static_cast<std::size_t>(i)]) r.push_back(i);
  return r;
}

bool graph_certifies(const std::vector<CyclicWord>& s, int rank) {
  WhiteheadGraph g = whitehead_graph(s, rank);
  return g.connected() && g.cut_vertices().empty();
}

}  // namespace

WhiteheadResult whitehead_minimize(const std::vector<CyclicWord>& s, int rank, const WhiteheadCaps& caps) {
  WhiteheadResult res;
  res.minimal = canonical_set(s);
  res.composite = FreeAutomorphism::identity(rank);
  auto moves = whitehead_moves(rank);
  std::vector<FreeAutomorphism> autos;
  for (const auto& m : moves) autos.push_back(m.automorphism(rank));
  std::size_t cur = total_length(res.minimal);
  for (int step = 0;; ++step) {
    std::size_t best = cur;
    int best_i = -1;
    std::vector<CyclicWord> best_set;
    for (std::size_t i = 0; i < autos.size(); ++i) {
      auto t = apply_all(autos[i], res.minimal);
      std::size_t len = total_length(t);
      if (len < best) {
        best = len;
        best_i = static_cast<int>(i);
        best_set = std::move(t);
      }
    }
    if (best_i < 0) break;
    if (step >= caps.depth) {
      res.certified = false;
      break;
    }
    res.minimal = std::move(best_set);
    res.sequence.push_back(autos[static_cast<std::size_t>(best_i)]);
    res.composite = compose(autos[static_cast<std::size_t>(best_i)], res.composite);
    cur = best;
  }
  return res;
}

WhiteheadGraph whitehead_graph(const std::vector<CyclicWord>& s, int rank) {
  WhiteheadGraph g;
  g.rank = rank;
  for (const auto& c : s) {
    const auto& v = c.word().letters();
    std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      Letter x = v[i], y = v[(i + 1) % n];
      g.edges.emplace_back(letter_key(-x), letter_key(y));
    }
  }
  return g;
}

bool WhiteheadGraph::connected() const {
  int nv = 2 * rank;
  std::vector<int> parent(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) parent[static_cast<std::size_t>(i)] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  for (auto [a, b] : edges) parent[static_cast<std::size_t>(find(a))] = find(b);
  for (int i = 1; i < nv; ++i)
    if (find(i) != find(0)) return false;
  return true;
}

std::vector<int> WhiteheadGraph::cut_vertices() const {
  int nv = 2 * rank;
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nv));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [a, b] = edges[e];
    if (a == b) continue;
    adj[static_cast<std::size_t>(a)].emplace_back(b, static_cast<int>(e));
    adj[static_cast<std::size_t>(b)].emplace_back(a, static_cast<int>(e));
  }
  std::vector<int> disc(static_cast<std::size_t>(nv), -1), low(static_cast<std::size_t>(nv), 0);
  std::vector<bool> cut(static_cast<std::size_t>(nv), false);
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int u, int pe) {
    disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
    int children = 0;
    for (auto [v, e] : adj[static_cast<std::size_t>(u)]) {
      if (e == pe) continue;
      if (disc[static_cast<std::size_t>(v)] >= 0) {
        low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], disc[static_cast<std::size_t>(v)]);
      } else {
        ++children;
        dfs(v, e);
        low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
        if (pe >= 0 && low[static_cast<std::size_t>(v)] >= disc[static_cast<std::size_t>(u)]) cut[static_cast<std::size_t>(u)] = true;
      }
    }
    if (pe < 0 && children > 1) cut[static_cast<std::size_t>(u)] = true;
  };
  for (int i = 0; i < nv; ++i)
    if (disc[static_cast<std::size_t>(i)] < 0) dfs(i, -1);
  std::vector<int> r;
  for (int i = 0; i < nv; ++i)
    if (cut[static_cast<std::size_t>(i)]) r.push_back(i);
  return r;
}

const char* to_string(CarrierKind k) {
  switch (k) {
    case CarrierKind::CarriedByProperFactor: return "CarriedByProperFactor";
    case CarrierKind::NotCarried: return "NotCarried";
    default: return "Inconclusive";
  }
}

CarrierVerdict free_factor_carrier_test(const std::vector<CyclicWord>& input, int rank, const WhiteheadCaps& caps) {
  CarrierVerdict out;
  auto s = canonical_set(input);
  auto carried = [&](const std::vector<CyclicWord>& rep, const FreeAutomorphism& composite) {
    FreeAutomorphism back = invert(composite);
    out.kind = CarrierKind::CarriedByProperFactor;
    out.certificate_words = rep;
    for (int g : used_generators(rep, rank)) out.factor_basis.push_back(back.apply(Word::generator(g)));
  };
  if (static_cast<int>(used_generators(s, rank).size()) < rank) {
    carried(s, FreeAutomorphism::identity(rank));
    out.note = "letters miss a generator";
    return out;
  }
  if (graph_certifies(s, rank)) {
    out.kind = CarrierKind::NotCarried;
    out.certificate_words = s;
    out.note = "Whitehead graph connected without cut vertex";
    return out;
  }
  WhiteheadResult m = whitehead_minimize(s, rank, caps);
  if (!m.certified) {
    out.note = "Whitehead descent hit depth cap";
    out.certificate_words = m.minimal;
    return out;
  }
  if (static_cast<int>(used_generators(m.minimal, rank).size()) < rank) {
    carried(m.minimal, m.composite);
    out.note = "minimal representative misses a generator";
    return out;
  }
  if (graph_certifies(m.minimal, rank)) {
    out.kind = CarrierKind::NotCarried;
    out.certificate_words = m.minimal;
    out.note = "minimal Whitehead graph connected without cut vertex";
    return out;
  }
  // Explore the minimal level.
  std::size_t len = total_length(m.minimal);
  std::vector<FreeAutomorphism> autos;
  for (const auto& mv : whitehead_moves(rank)) autos.push_back(mv.automorphism(rank));
  std::map<std::vector<CyclicWord>, FreeAutomorphism> seen;
  std::queue<std::vector<CyclicWord>> q;
  seen.emplace(m.minimal, m.composite);
  q.push(m.minimal);
  while (!q.empty()) {
    auto cur = q.front();
    q.pop();
    FreeAutomorphism comp = seen.at(cur);
    for (const auto& a : autos) {
      auto t = apply_all(a, cur);
      if (total_length(t) != len || seen.count(t)) continue;
      FreeAutomorphism c2 = compose(a, comp);
      if (static_cast<int>(used_generators(t, rank).size()) < rank) {
        carried(t, c2);
        out.note = "minimal-level search found a representative missing a generator";
        return out;
      }
      if (graph_certifies(t, rank)) {
        out.kind = CarrierKind::NotCarried;
        out.certificate_words = t;
        out.note = "minimal-level representative with cut-vertex-free Whitehead graph";
        return out;
      }
      if (seen.size() >= caps.frontier) {
        out.note = "minimal-level search hit frontier cap";
        out.certificate_words = m.minimal;
        return out;
      }
      seen.emplace(t, c2);
      q.push(std::move(t));
    }
  }
  // Exhausted the minimal level without a generator-missing representative.
  out.kind = CarrierKind::NotCarried;
  out.certificate_words = m.minimal;
  out.note = "minimal level exhausted; no representative misses a generator";
  return out;
}

}  // namespace fzkit
