#include "fzkit/stallings.hpp"

#include "fzkit/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace fzkit {

// Union-find folding with a merge worklist.
class Folder {
 public:
  explicit Folder(int rank) : nk_(2 * rank) { add_vertex(); }

  int add_vertex() {
    adj_.emplace_back(static_cast<std::size_t>(nk_), -1);
    parent_.push_back(static_cast<int>(parent_.size()));
    return static_cast<int>(adj_.size()) - 1;
  }

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) x = parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
    return x;
  }

  void add_edge(int u, int key, int v) {
    u = find(u);
    v = find(v);
    link(u, key, v);
    drain();
  }

  void add_loop_word(const Word& w) {
    if (w.empty()) return;
    int cur = 0;
    const auto& l = w.letters();
    for (std::size_t i = 0; i < l.size(); ++i) {
      int k = letter_key(l[i]);
      int nxt;
      if (i + 1 == l.size()) {
        nxt = 0;
      } else {
        int t = adj_[static_cast<std::size_t>(find(cur))][static_cast<std::size_t>(k)];
        nxt = t >= 0 ? t : add_vertex();
      }
      add_edge(cur, k, nxt);
      cur = find(nxt);
    }
  }

  CoreGraph finish(int rank) {
    std::map<int, int> id;
    std::vector<int> order;
    std::queue<int> q;
    int b = find(0);
    id[b] = 0;
    order.push_back(b);
    q.push(b);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int k = 0; k < nk_; ++k) {
        int t = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)];
        if (t < 0) continue;
        t = find(t);
        if (!id.count(t)) {
          id[t] = static_cast<int>(order.size());
          order.push_back(t);
          q.push(t);
        }
      }
    }
    CoreGraph g;
    g.rank_ = rank;
    g.out_.assign(order.size(), std::vector<int>(static_cast<std::size_t>(nk_), -1));
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int k = 0; k < nk_; ++k) {
        int t = adj_[static_cast<std::size_t>(order[i])][static_cast<std::size_t>(k)];
        if (t >= 0) g.out_[i][static_cast<std::size_t>(k)] = id.at(find(t));
      }
    return g;
  }

 private:
  void link(int u, int key, int v) {
    int& fwd = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(key)];
    int& back = adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(key ^ 1)];
    if (fwd >= 0 && find(fwd) != v) pending_.emplace_back(fwd, v);
    if (back >= 0 && find(back) != u) pending_.emplace_back(back, u);
    if (fwd < 0) fwd = v;
    if (back < 0) back = u;
  }

  void drain() {
    while (!pending_.empty()) {
      auto [a, b] = pending_.front();
      pending_.pop_front();
      a = find(a);
      b = find(b);
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      parent_[static_cast<std::size_t>(b)] = a;
      // Re-home b's edges onto a.
      for (int k = 0; k < nk_; ++k) {
        int t = adj_[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
        if (t < 0) continue;
        adj_[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] = -1;
        t = find(t);
        int& back = adj_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k ^ 1)];
        if (back >= 0 && find(back) == a) back = a;
        link(a, k, t);
      }
    }
  }

  int nk_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_;
  std::deque<std::pair<int, int>> pending_;
};

CoreGraph CoreGraph::from_generators(const std::vector<Word>& gens, int rank) {
  Folder f(rank);
  for (const auto& w : gens) {
    for (Letter x : w.letters())
      if (std::abs(x) > rank) throw PreconditionFailed("generator " + w.str() + " uses a letter beyond rank " + std::to_string(rank));
    f.add_loop_word(w);
  }
  return f.finish(rank).core();
}

CoreGraph CoreGraph::from_adjacency(int rank, std::vector<std::vector<int>> out) {
  int n = static_cast<int>(out.size());
  for (int v = 0; v < n; ++v) {
    if (static_cast<int>(out[static_cast<std::size_t>(v)].size()) != 2 * rank) throw PreconditionFailed("adjacency row has wrong width");
    for (int k = 0; k < 2 * rank; ++k) {
      int t = out[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)];
      if (t < 0) continue;
      if (t >= n || out[static_cast<std::size_t>(t)][static_cast<std::size_t>(k ^ 1)] != v)
        throw PreconditionFailed("adjacency is not a folded labelled graph");
    }
  }
  CoreGraph g;
  g.rank_ = rank;
  g.out_ = std::move(out);
  return g;
}

int CoreGraph::num_edges() const {
  int c = 0;
  for (const auto& row : out_)
    for (int t : row) c += t >= 0;
  return c / 2;
}

int CoreGraph::degree(int v) const {
  int d = 0;
  for (int t : out_[static_cast<std::size_t>(v)]) d += t >= 0;
  return d;
}

int CoreGraph::read(int v, const Word& w) const {
  for (Letter x : w.letters()) {
    if (v < 0 || std::abs(x) > rank_) return -1;
    v = out_[static_cast<std::size_t>(v)][static_cast<std::size_t>(letter_key(x))];
  }
  return v;
}

bool CoreGraph::contains_conjugate(const CyclicWord& c) const {
  if (c.empty()) return true;
  for (int v = 0; v < num_vertices(); ++v)
    if (read(v, c.word()) == v) return true;
  return false;
}

bool CoreGraph::immerses_segment(const Word& w) const {
  if (w.empty()) return num_vertices() > 0;
  for (int v = 0; v < num_vertices(); ++v)
    if (read(v, w) >= 0) return true;
  return false;
}

CoreGraph CoreGraph::core() const {
  std::vector<std::vector<int>> out = out_;
  std::vector<bool> alive(out.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 1; v < out.size(); ++v) {
      if (!alive[v]) continue;
      int d = 0, k1 = -1;
      for (int k = 0; k < static_cast<int>(out[v].size()); ++k)
        if (out[v][static_cast<std::size_t>(k)] >= 0) {
          ++d;
          k1 = k;
        }
      if (d <= 1) {
        alive[v] = false;
        changed = true;
        if (d == 1) {
          int t = out[v][static_cast<std::size_t>(k1)];
          out[static_cast<std::size_t>(t)][static_cast<std::size_t>(k1 ^ 1)] = -1;
          out[v][static_cast<std::size_t>(k1)] = -1;
        }
      }
    }
  }
  std::vector<int> id(out.size(), -1);
  int n = 0;
  for (std::size_t v = 0; v < out.size(); ++v)
    if (alive[v]) id[v] = n++;
  CoreGraph g;
  g.rank_ = rank_;
  g.out_.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(2 * rank_), -1));
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (!alive[v]) continue;
    for (std::size_t k = 0; k < out[v].size(); ++k)
      if (out[v][k] >= 0) g.out_[static_cast<std::size_t>(id[v])][k] = id[static_cast<std::size_t>(out[v][k])];
  }
  return g;
}

CoreGraph CoreGraph::rebased(int v) const {
  std::vector<int> perm(out_.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[0], perm[static_cast<std::size_t>(v)]);
  CoreGraph g;
  g.rank_ = rank_;
  g.out_.assign(out_.size(), {});
  for (std::size_t u = 0; u < out_.size(); ++u) {
    auto row = out_[u];
    for (auto& t : row)
      if (t >= 0) t = perm[static_cast<std::size_t>(t)];
    g.out_[static_cast<std::size_t>(perm[u])] = row;
  }
  return g;
}

CoreGraph CoreGraph::cyclic_core() const {
  CoreGraph g = core();
  while (g.num_vertices() > 1 && g.degree(0) <= 1) {
    int nxt = -1;
    for (int t : g.out_[0])
      if (t >= 0) nxt = t;
    if (nxt < 0) break;
    g = g.rebased(nxt).core();
  }
  return g;
}

std::string CoreGraph::canonical() const {
  std::vector<int> id(out_.size(), -1);
  std::vector<int> order;
  std::queue<int> q;
  if (out_.empty()) return "";
  id[0] = 0;
  order.push_back(0);
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int t : out_[static_cast<std::size_t>(u)]) {
      if (t < 0 || id[static_cast<std::size_t>(t)] >= 0) continue;
      id[static_cast<std::size_t>(t)] = static_cast<int>(order.size());
      order.push_back(t);
      q.push(t);
    }
  }
  std::ostringstream os;
  os << order.size() << ":";
  for (int u : order) {
    for (int t : out_[static_cast<std::size_t>(u)]) os << (t < 0 ? -1 : id[static_cast<std::size_t>(t)]) << ",";
    os << ";";
  }
  return os.str();
}

std::string CoreGraph::conjugacy_canonical() const {
  CoreGraph c = cyclic_core();
  std::string best;
  for (int v = 0; v < c.num_vertices(); ++v) {
    std::string s = c.rebased(v).canonical();
    if (v == 0 || s < best) best = s;
  }
  return best;
}

Word CoreGraph::path_to(int v) const {
  std::vector<int> prev(out_.size(), -2), via(out_.size(), 0);
  std::queue<int> q;
  prev[0] = -1;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (std::size_t k = 0; k < out_[static_cast<std::size_t>(u)].size(); ++k) {
      int t = out_[static_cast<std::size_t>(u)][k];
      if (t < 0 || prev[static_cast<std::size_t>(t)] != -2) continue;
      prev[static_cast<std::size_t>(t)] = u;
      via[static_cast<std::size_t>(t)] = letter_from_key(static_cast<int>(k));
      q.push(t);
    }
  }
  std::vector<Letter> l;
  for (int u = v; u > 0; u = prev[static_cast<std::size_t>(u)]) l.push_back(via[static_cast<std::size_t>(u)]);
  std::reverse(l.begin(), l.end());
  return Word::reduce(l);
}

std::vector<Word> CoreGraph::basis() const {
  std::vector<Word> to(out_.size());
  std::vector<bool> seen(out_.size(), false);
  std::set<std::pair<int, int>> tree;  // (vertex, key) tree edges, both orientations
  std::queue<int> q;
  seen[0] = true;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (std::size_t k = 0; k < out_[static_cast<std::size_t>(u)].size(); ++k) {
      int t = out_[static_cast<std::size_t>(u)][k];
      if (t < 0 || seen[static_cast<std::size_t>(t)]) continue;
      seen[static_cast<std::size_t>(t)] = true;
      to[static_cast<std::size_t>(t)] = to[static_cast<std::size_t>(u)] * Word::reduce({letter_from_key(static_cast<int>(k))});
      tree.insert({u, static_cast<int>(k)});
      tree.insert({t, static_cast<int>(k) ^ 1});
      q.push(t);
    }
  }
  std::vector<Word> b;
  for (std::size_t u = 0; u < out_.size(); ++u)
    for (std::size_t k = 0; k < out_[u].size(); k += 2) {  // positive letters only
      int t = out_[u][k];
      if (t < 0 || tree.count({static_cast<int>(u), static_cast<int>(k)})) continue;
      b.push_back(to[u] * Word::reduce({letter_from_key(static_cast<int>(k))}) * to[static_cast<std::size_t>(t)].inverse());
    }
  return b;
}

bool CoreGraph::is_whole_group() const {
  if (out_.size() != 1) return false;
  for (int t : out_[0])
    if (t != 0) return false;
  return true;
}

std::string CoreGraph::str() const {
  std::ostringstream os;
  for (std::size_t u = 0; u < out_.size(); ++u)
    for (std::size_t k = 0; k < out_[u].size(); k += 2)
      if (out_[u][k] >= 0) os << u << " -" << letter_char(letter_from_key(static_cast<int>(k))) << "-> " << out_[u][k] << "\n";
  return os.str();
}

bool is_subgroup(const CoreGraph& h, const CoreGraph& k) {
  for (const auto& w : h.basis())
    if (!k.contains(w)) return false;
  return true;
}

bool same_subgroup(const CoreGraph& h, const CoreGraph& k) { return h.core().canonical() == k.core().canonical(); }

namespace {

// Vertices surviving removal of every valence <= 1 vertex, base included.
std::vector<bool> cyclic_core_vertices(const CoreGraph& c) {
  std::size_t n = static_cast<std::size_t>(c.num_vertices());
  std::vector<bool> alive(n, true);
  std::vector<int> deg(n);
  for (std::size_t v = 0; v < n; ++v) deg[v] = c.degree(static_cast<int>(v));
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (!alive[v] || deg[v] > 1) continue;
      alive[v] = false;
      changed = true;
      for (int t : c.adjacency()[v])
        if (t >= 0 && alive[static_cast<std::size_t>(t)]) --deg[static_cast<std::size_t>(t)];
    }
  }
  return alive;
}

// Path from the base into the cyclic core and the core rebased there.
std::pair<Word, CoreGraph> core_entry(const CoreGraph& g) {
  CoreGraph c = g.core();
  auto alive = cyclic_core_vertices(c);
  int best = -1;
  std::size_t best_len = 0;
  for (int v = 0; v < c.num_vertices(); ++v) {
    if (!alive[static_cast<std::size_t>(v)]) continue;
    std::size_t len = c.path_to(v).size();
    if (best < 0 || len < best_len) {
      best = v;
      best_len = len;
    }
  }
  if (best < 0) return {Word(), CoreGraph::from_generators({}, c.rank_alphabet())};
  return {c.path_to(best), c.rebased(best).core()};
}

}  // namespace

std::optional<Word> conjugator_between(const CoreGraph& h, const CoreGraph& k) {
  auto [uh, ch] = core_entry(h);
  auto [uk, ck] = core_entry(k);
  if (ch.num_edges() == 0 || ck.num_edges() == 0) {
    if (ch.num_edges() == 0 && ck.num_edges() == 0) return Word();
    return std::nullopt;
  }
  if (ch.num_vertices() != ck.num_vertices() || ch.num_edges() != ck.num_edges()) return std::nullopt;
  std::string target = ch.canonical();
  for (int y = 0; y < ck.num_vertices(); ++y) {
    if (ck.rebased(y).canonical() != target) continue;
    Word t = ck.path_to(y);
    return uk * t * uh.inverse();
  }
  return std::nullopt;
}

bool generates_free_group(const std::vector<Word>& gens, int rank) {
  return CoreGraph::from_generators(gens, rank).is_whole_group();
}

}  // namespace fzkit
