#include "fzkit/graph_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "fzkit/errors.hpp"
#include "fzkit/stallings.hpp"

namespace fzkit {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

MarkedGraph::MarkedGraph(int rank, int num_vertices, std::vector<GraphEdge> edges, int base)
    : rank_(rank), nv_(num_vertices), base_(base), edges_(std::move(edges)) {
  if (nv_ <= 0) throw PreconditionFailed("graph needs a vertex");
  if (base_ < 0 || base_ >= nv_) throw PreconditionFailed("base vertex out of range");
  for (const auto& e : edges_) {
    if (e.tail < 0 || e.tail >= nv_ || e.head < 0 || e.head >= nv_) throw PreconditionFailed("edge endpoint out of range: " + e.name);
    if (e.marking.max_generator() >= rank_) throw AlphabetError("marking of " + e.name + " leaves the alphabet");
  }
  for (int v = 0; v < nv_; ++v)
    if (valence(v) == 1) throw PreconditionFailed("valence-1 vertex " + std::to_string(v));
  build_tree();
  for (int v = 0; v < nv_; ++v)
    if (v != base_ && parent_edge_[idx(v)] == 0) throw PreconditionFailed("graph is disconnected");
  auto loops = loop_basis();
  if (static_cast<int>(loops.size()) != rank_) throw PreconditionFailed("graph rank differs from alphabet rank");
  std::vector<Word> words;
  for (const auto& l : loops) words.push_back(read(l));
  if (!generates_free_group(words, rank_)) throw PreconditionFailed("marking is not a homotopy equivalence");
}

MarkedGraph MarkedGraph::rose(int rank) {
  std::vector<GraphEdge> es;
  for (int i = 0; i < rank; ++i) es.push_back({std::string(1, letter_char(i + 1)), 0, 0, Word::generator(i)});
  return MarkedGraph(rank, 1, std::move(es), 0);
}

void MarkedGraph::build_tree() {
  parent_edge_.assign(idx(nv_), 0);
  tree_edge_.assign(edges_.size(), false);
  std::vector<bool> seen(idx(nv_), false);
  std::queue<int> q;
  seen[idx(base_)] = true;
  q.push(base_);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int d : directions(u)) {
      int t = terminus(d);
      if (seen[idx(t)]) continue;
      seen[idx(t)] = true;
      parent_edge_[idx(t)] = d;
      tree_edge_[idx(edge_index(d))] = true;
      q.push(t);
    }
  }
}

std::vector<int> MarkedGraph::directions(int v) const {
  std::vector<int> out;
  for (int i = 0; i < num_edges(); ++i) {
    if (edges_[idx(i)].tail == v) out.push_back(i + 1);
    if (edges_[idx(i)].head == v) out.push_back(-(i + 1));
  }
  return out;
}

std::string MarkedGraph::edge_name(int oe) const {
  const auto& n = edge(edge_index(oe)).name;
  return oe > 0 ? n : "~" + n;
}

int MarkedGraph::parse_edge(std::string_view token) const {
  bool inv = !token.empty() && token.front() == '~';
  if (inv) token.remove_prefix(1);
  for (int i = 0; i < num_edges(); ++i)
    if (edges_[idx(i)].name == token) return inv ? -(i + 1) : i + 1;
  throw ParseError("unknown edge '" + std::string(token) + "'", 0, 0);
}

std::string MarkedGraph::path_str(const EdgePath& p) const {
  std::string s;
  for (int oe : p.letters()) {
    if (!s.empty()) s += ' ';
    s += edge_name(oe);
  }
  return s;
}

EdgePath MarkedGraph::parse_path(std::string_view text) const {
  std::vector<int> raw;
  for (const auto& t : split_ws(text))
    if (t != "1") raw.push_back(parse_edge(t));
  return tighten(raw);
}

bool MarkedGraph::composable(const std::vector<int>& raw) const {
  for (std::size_t i = 0; i + 1 < raw.size(); ++i)
    if (terminus(raw[i]) != origin(raw[i + 1])) return false;
  return true;
}

EdgePath MarkedGraph::tighten(const std::vector<int>& raw) const {
  for (int oe : raw)
    if (oe == 0 || edge_index(oe) >= num_edges()) throw NonComposable("edge index out of range");
  if (!composable(raw)) throw NonComposable("consecutive edges do not meet");
  return Word::reduce(raw);
}

Word MarkedGraph::read(const EdgePath& p) const {
  Word w;
  for (int oe : p.letters()) {
    const Word& m = edge(edge_index(oe)).marking;
    w = w * (oe > 0 ? m : m.inverse());
  }
  return w;
}

EdgePath MarkedGraph::tree_path(int v) const {
  std::vector<int> rev;
  while (v != base_) {
    int d = parent_edge_[idx(v)];
    rev.push_back(d);
    v = origin(d);
  }
  std::reverse(rev.begin(), rev.end());
  return Word::reduce(rev);
}

std::vector<EdgePath> MarkedGraph::loop_basis() const {
  std::vector<EdgePath> out;
  for (int i = 0; i < num_edges(); ++i) {
    if (tree_edge_[idx(i)]) continue;
    const auto& e = edges_[idx(i)];
    out.push_back(tree_path(e.tail) * Word::reduce({i + 1}) * tree_path(e.head).inverse());
  }
  return out;
}

GraphSelfMap::GraphSelfMap(MarkedGraph g, std::vector<int> vertex_images, std::vector<EdgePath> edge_images, bool allow_collapse)
    : g_(std::move(g)), vmap_(std::move(vertex_images)), images_(std::move(edge_images)), collapse_(allow_collapse) {
  if (static_cast<int>(vmap_.size()) != g_.num_vertices()) throw PreconditionFailed("vertex map has wrong size");
  if (static_cast<int>(images_.size()) != g_.num_edges()) throw PreconditionFailed("edge map has wrong size");
  for (int v : vmap_)
    if (v < 0 || v >= g_.num_vertices()) throw PreconditionFailed("vertex image out of range");
  for (int i = 0; i < g_.num_edges(); ++i) {
    const auto& p = images_[idx(i)];
    const auto& e = g_.edge(i);
    if (p.empty()) {
      if (!allow_collapse) throw PreconditionFailed("edge " + e.name + " maps to a point");
      if (vmap_[idx(e.tail)] != vmap_[idx(e.head)]) throw PreconditionFailed("collapsed edge " + e.name + " has distinct end images");
      continue;
    }
    if (!g_.composable(p.letters())) throw NonComposable("image of " + e.name + " is not a path");
    if (g_.origin(p.front()) != vmap_[idx(e.tail)] || g_.terminus(p.back()) != vmap_[idx(e.head)])
      throw PreconditionFailed("image of " + e.name + " does not match the vertex map");
  }
}

GraphSelfMap GraphSelfMap::rose(const FreeAutomorphism& phi) {
  MarkedGraph g = MarkedGraph::rose(phi.rank());
  std::vector<EdgePath> im;
  for (int i = 0; i < phi.rank(); ++i) {
    if (phi.image(i).empty()) throw NotAnAutomorphism("generator maps to the identity");
    im.push_back(phi.image(i));
  }
  return GraphSelfMap(std::move(g), {0}, std::move(im));
}

EdgePath GraphSelfMap::image(int oe) const {
  const auto& p = images_[idx(edge_index(oe))];
  return oe > 0 ? p : p.inverse();
}

std::vector<int> GraphSelfMap::image_raw(const EdgePath& p) const {
  std::vector<int> raw;
  for (int oe : p.letters()) {
    EdgePath q = image(oe);
    raw.insert(raw.end(), q.letters().begin(), q.letters().end());
  }
  return raw;
}

EdgePath GraphSelfMap::map_path(const EdgePath& p, int k) const {
  EdgePath cur = p;
  for (int i = 0; i < k; ++i) cur = Word::reduce(image_raw(cur));
  return cur;
}

std::size_t GraphSelfMap::cancellation(const EdgePath& p) const {
  auto raw = image_raw(p);
  return raw.size() - Word::reduce(raw).size();
}

int GraphSelfMap::direction_image(int oe) const {
  EdgePath q = image(oe);
  return q.empty() ? 0 : q.front();
}

IntMatrix GraphSelfMap::transition_matrix() const {
  int n = g_.num_edges();
  IntMatrix m(idx(n), std::vector<long>(idx(n), 0));
  for (int j = 0; j < n; ++j)
    for (int oe : images_[idx(j)].letters()) ++m[idx(edge_index(oe))][idx(j)];
  return m;
}

FreeAutomorphism GraphSelfMap::induced_automorphism() const {
  int r = g_.rank();
  auto loops = g_.loop_basis();
  std::vector<Word> u, w;
  EdgePath tau = g_.tree_path(vmap_[idx(g_.base())]);
  for (const auto& l : loops) {
    u.push_back(g_.read(l));
    w.push_back(g_.read(tau * map_path(l) * tau.inverse()));
  }
  FreeAutomorphism U(r, u), W(r, w);
  return fzkit::compose(W, invert(U));
}

GraphSelfMap GraphSelfMap::compose(const GraphSelfMap& g) const {
  std::vector<int> vm;
  for (int v = 0; v < g_.num_vertices(); ++v) vm.push_back(vmap_[idx(g.vmap_[idx(v)])]);
  std::vector<EdgePath> im;
  for (int i = 0; i < g_.num_edges(); ++i) im.push_back(map_path(g.images_[idx(i)]));
  bool collapse = collapse_ || g.collapse_;
  for (const auto& p : im) collapse = collapse || p.empty();
  return GraphSelfMap(g_, std::move(vm), std::move(im), collapse);
}

GraphSelfMap GraphSelfMap::power(int k) const {
  if (k < 1) throw PreconditionFailed("power needs k >= 1");
  GraphSelfMap out = *this;
  for (int i = 1; i < k; ++i) out = compose(out);
  return out;
}

GraphSelfMap GraphSelfMap::parse(std::string_view text) {
  int rank = -1, nv = -1, base = 0;
  std::vector<GraphEdge> edges;
  struct Pending {
    int line;
    std::vector<std::string> tok;
  };
  std::vector<Pending> maps;
  std::istringstream in{std::string(text)};
  std::string line;
  int ln = 0;
  auto need_int = [&](const std::string& s, int col) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected an integer, got '" + s + "'", ln, col);
    }
  };
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    int col = static_cast<int>(line.find(tok[0])) + 1;
    const auto& kw = tok[0];
    if (kw == "rank" && tok.size() == 2) {
      rank = need_int(tok[1], col);
    } else if (kw == "vertices" && tok.size() == 2) {
      nv = need_int(tok[1], col);
    } else if (kw == "base" && tok.size() == 2) {
      base = need_int(tok[1], col);
    } else if (kw == "edge" && tok.size() == 5) {
      if (rank < 0) throw ParseError("'rank' must precede edges", ln, col);
      Word m;
      try {
        m = Word::parse(tok[4], rank);
      } catch (const Error& e) {
        throw ParseError(e.what(), ln, static_cast<int>(line.find(tok[4])) + 1);
      }
      edges.push_back({tok[1], need_int(tok[2], col), need_int(tok[3], col), m});
    } else if ((kw == "vertex" || kw == "image") && tok.size() >= 3 && tok[2] == "->") {
      maps.push_back({ln, tok});
    } else {
      throw ParseError("unrecognised line", ln, col);
    }
  }
  if (rank < 0 || nv < 0) throw ParseError("missing 'rank' or 'vertices'", ln, 1);
  MarkedGraph g;
  try {
    g = MarkedGraph(rank, nv, edges, base);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), ln, 1);
  }
  std::vector<int> vm(idx(nv), -1);
  std::vector<EdgePath> im(edges.size());
  std::vector<bool> have(edges.size(), false);
  for (const auto& p : maps) {
    if (p.tok[0] == "vertex") {
      if (p.tok.size() != 4) throw ParseError("vertex line needs 'vertex v -> w'", p.line, 1);
      ln = p.line;
      int v = need_int(p.tok[1], 1), w = need_int(p.tok[3], 1);
      if (v < 0 || v >= nv) throw ParseError("vertex out of range", p.line, 1);
      vm[idx(v)] = w;
    } else {
      int e;
      try {
        e = g.parse_edge(p.tok[1]);
      } catch (const ParseError& err) {
        throw ParseError(err.what(), p.line, 1);
      }
      if (e < 0) throw ParseError("image line must name a positive edge", p.line, 1);
      std::vector<int> raw;
      for (std::size_t i = 3; i < p.tok.size(); ++i) {
        if (p.tok[i] == "1") continue;
        try {
          raw.push_back(g.parse_edge(p.tok[i]));
        } catch (const ParseError& err) {
          throw ParseError(err.what(), p.line, 1);
        }
      }
      if (!g.composable(raw)) throw ParseError("image of " + p.tok[1] + " is not a path", p.line, 1);
      EdgePath path = Word::reduce(raw);
      if (path.size() != raw.size()) throw ParseError("image of " + p.tok[1] + " is not tight", p.line, 1);
      im[idx(edge_index(e))] = path;
      have[idx(edge_index(e))] = true;
    }
  }
  for (int v = 0; v < nv; ++v)
    if (vm[idx(v)] < 0) throw ParseError("missing image of vertex " + std::to_string(v), ln, 1);
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (!have[i]) throw ParseError("missing image of edge " + edges[i].name, ln, 1);
  try {
    return GraphSelfMap(std::move(g), std::move(vm), std::move(im));
  } catch (const Error& e) {
    throw ParseError(e.what(), ln, 1);
  }
}

std::string GraphSelfMap::serialize() const {
  std::ostringstream os;
  os << "rank " << g_.rank() << "\n";
  os << "vertices " << g_.num_vertices() << "\n";
  os << "base " << g_.base() << "\n";
  for (const auto& e : g_.edges())
    os << "edge " << e.name << " " << e.tail << " " << e.head << " " << (e.marking.empty() ? "1" : e.marking.str()) << "\n";
  for (int v = 0; v < g_.num_vertices(); ++v) os << "vertex " << v << " -> " << vmap_[idx(v)] << "\n";
  for (int i = 0; i < g_.num_edges(); ++i) {
    auto s = g_.path_str(images_[idx(i)]);
    os << "image " << g_.edge(i).name << " -> " << (s.empty() ? "1" : s) << "\n";
  }
  return os.str();
}

bool realizes(const GraphSelfMap& f, const FreeAutomorphism& phi) {
  if (f.graph().rank() != phi.rank()) return false;
  return outer_equal(f.induced_automorphism(), phi);
}

// ---- matrices -------------------------------------------------------------

IntMatrix transpose(const IntMatrix& m) {
  if (m.empty()) return {};
  IntMatrix t(m[0].size(), std::vector<long>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  std::size_t n = a.size(), k = b.size(), p = b.empty() ? 0 : b[0].size();
  IntMatrix c(n, std::vector<long>(p, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      if (a[i][l])
        for (std::size_t j = 0; j < p; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

bool is_irreducible(const IntMatrix& m) {
  std::size_t n = m.size();
  if (n == 0) return false;
  if (n == 1) return m[0][0] > 0;
  auto reach_all = [&](bool fwd) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> st{0};
    seen[0] = true;
    while (!st.empty()) {
      auto u = st.back();
      st.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (!seen[v] && (fwd ? m[u][v] : m[v][u]) > 0) seen[v] = true, st.push_back(v);
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach_all(true) && reach_all(false);
}

PFData pf_eigen(const IntMatrix& m, double tol) {
  if (!is_irreducible(m)) throw NotIrreducible("matrix is not irreducible");
  std::size_t n = m.size();
  std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
  PFData out;
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y, double shift) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = shift * x[i];
      for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(m[i][j]) * x[j];
      y[i] = s;
    }
  };
  for (int it = 1; it <= 2000000; ++it) {
    apply(v, w, 1.0);
    double norm = 0;
    for (double x : w) norm += x;
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= norm;
      change += std::abs(w[i] - v[i]);
    }
    v.swap(w);
    out.iterations = it;
    if (change < tol) break;
  }
  apply(v, w, 0.0);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) num += w[i], den += v[i];
  out.lambda = num / den;
  out.vec = v;
  for (std::size_t i = 0; i < n; ++i) out.residual += std::abs(w[i] - out.lambda * v[i]);
  return out;
}

std::vector<boost::multiprecision::cpp_int> characteristic_polynomial(const IntMatrix& m) {
  using boost::multiprecision::cpp_int;
  std::size_t n = m.size();
  std::vector<std::vector<cpp_int>> a(n, std::vector<cpp_int>(n)), mk(n, std::vector<cpp_int>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
  std::vector<cpp_int> c(n + 1, 0);  // c[k] multiplies x^(n-k)
  c[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    // mk = a * mk_prev + c[k-1] I
    std::vector<std::vector<cpp_int>> next(n, std::vector<cpp_int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cpp_int s = 0;
        for (std::size_t l = 0; l < n; ++l) s += a[i][l] * mk[l][j];
        next[i][j] = s + (i == j ? c[k - 1] : cpp_int(0));
      }
    mk = std::move(next);
    cpp_int tr = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += a[i][l] * mk[l][i];
    c[k] = -tr / static_cast<long>(k);
  }
  return c;
}

// ---- stratification -------------------------------------------------------

const char* to_string(StratumKind k) {
  switch (k) {
    case StratumKind::Zero: return "Zero";
    case StratumKind::NEGFixed: return "NEG-fixed";
    case StratumKind::NEGLinear: return "NEG-linear";
    case StratumKind::NEGNonlinear: return "NEG-nonlinear";
    default: return "EG";
  }
}

int Stratification::top_eg() const {
  for (int i = static_cast<int>(strata.size()) - 1; i >= 0; --i)
    if (strata[idx(i)].kind == StratumKind::EG) return i;
  return -1;
}

std::vector<int> Stratification::filtration_edges(int i) const {
  std::vector<int> out;
  for (int s = 0; s <= i && s < static_cast<int>(strata.size()); ++s)
    out.insert(out.end(), strata[idx(s)].edges.begin(), strata[idx(s)].edges.end());
  std::sort(out.begin(), out.end());
  return out;
}

CyclicWord axis_class(const EdgePath& closed) { return CyclicWord(closed).unoriented(); }

namespace {

// Root of a word as a string: least period dividing the length.
std::pair<Word, long> word_root(const Word& w) {
  std::size_t n = w.size();
  for (std::size_t p = 1; p <= n; ++p) {
    if (n % p) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return {w.subword(0, p), static_cast<long>(n / p)};
  }
  return {w, 1};
}

void classify_neg(const GraphSelfMap& f, Stratum& s) {
  int e = s.edges[0];
  EdgePath im = f.image(e + 1);
  const auto& g = f.graph();
  if (!im.empty() && im.front() == e + 1) {
    s.oriented_edge = e + 1;
    s.suffix = im.subword(1, im.size() - 1);
  } else if (!im.empty() && im.back() == e + 1) {
    s.oriented_edge = -(e + 1);
    s.suffix = im.subword(0, im.size() - 1).inverse();
  } else {
    s.oriented_edge = e + 1;
    s.kind = StratumKind::NEGNonlinear;
    return;
  }
  if (s.suffix.empty()) {
    s.kind = StratumKind::NEGFixed;
    return;
  }
  int v = g.terminus(s.oriented_edge);
  auto [root, d] = word_root(s.suffix);
  bool closed = g.origin(root.front()) == v && g.terminus(root.back()) == v && f.vertex_image(v) == v;
  if (closed && f.map_path(root) == root) {
    s.kind = StratumKind::NEGLinear;
    CyclicWord c(root);
    if (c.unoriented() == c) {
      s.axis = root;
      s.exponent = d;
    } else {
      s.axis = root.inverse();
      s.exponent = -d;
    }
  } else {
    s.kind = StratumKind::NEGNonlinear;
  }
}

}  // namespace

Stratification compute_stratification(const GraphSelfMap& f) {
  const auto& g = f.graph();
  int n = g.num_edges();
  IntMatrix m = f.transition_matrix();
  // Tarjan SCC on arcs e' -> e when e occurs in f(e').
  std::vector<int> index(idx(n), -1), low(idx(n), 0), comp(idx(n), -1);
  std::vector<bool> on(idx(n), false);
  std::vector<int> st;
  int counter = 0, ncomp = 0;
  std::function<void(int)> dfs = [&](int u) {
    index[idx(u)] = low[idx(u)] = counter++;
    st.push_back(u);
    on[idx(u)] = true;
    for (int v = 0; v < n; ++v) {
      if (m[idx(v)][idx(u)] == 0) continue;
      if (index[idx(v)] < 0) {
        dfs(v);
        low[idx(u)] = std::min(low[idx(u)], low[idx(v)]);
      } else if (on[idx(v)]) {
        low[idx(u)] = std::min(low[idx(u)], index[idx(v)]);
      }
    }
    if (low[idx(u)] == index[idx(u)]) {
      while (true) {
        int w = st.back();
        st.pop_back();
        on[idx(w)] = false;
        comp[idx(w)] = ncomp;
        if (w == u) break;
      }
      ++ncomp;
    }
  };
  for (int e = 0; e < n; ++e)
    if (index[idx(e)] < 0) dfs(e);
  std::vector<std::vector<int>> members(idx(ncomp));
  for (int e = 0; e < n; ++e) members[idx(comp[idx(e)])].push_back(e);
  std::vector<std::set<int>> below(idx(ncomp));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (m[idx(i)][idx(j)] && comp[idx(i)] != comp[idx(j)]) below[idx(comp[idx(j)])].insert(comp[idx(i)]);
  auto key = [&](int c) {
    std::vector<std::string> names;
    for (int e : members[idx(c)]) names.push_back(g.edge(e).name);
    std::sort(names.begin(), names.end());
    return std::make_pair(members[idx(c)].size(), names);
  };
  std::vector<bool> placed(idx(ncomp), false);
  Stratification out;
  out.stratum_of_edge.assign(idx(n), -1);
  for (int round = 0; round < ncomp; ++round) {
    int pick = -1;
    for (int c = 0; c < ncomp; ++c) {
      if (placed[idx(c)]) continue;
      bool ready = std::all_of(below[idx(c)].begin(), below[idx(c)].end(), [&](int b) { return placed[idx(b)]; });
      if (ready && (pick < 0 || key(c) < key(pick))) pick = c;
    }
    placed[idx(pick)] = true;
    Stratum s;
    s.edges = members[idx(pick)];
    std::size_t k = s.edges.size();
    IntMatrix block(k, std::vector<long>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) block[i][j] = m[idx(s.edges[i])][idx(s.edges[j])];
    if (k == 1 && block[0][0] == 0) {
      s.kind = StratumKind::Zero;
    } else if (k == 1 && block[0][0] == 1) {
      s.kind = StratumKind::NEGFixed;
      classify_neg(f, s);
    } else {
      PFData pf = pf_eigen(transpose(block));
      if (pf.lambda <= 1.0 + 1e-9) {
        std::string names;
        for (int e : s.edges) names += g.edge(e).name + " ";
        throw UnclassifiableStratum("irreducible block with growth 1 on edges " + names);
      }
      s.kind = StratumKind::EG;
      s.lambda = pf.lambda;
      s.lengths = pf.vec;
    }
    for (int e : s.edges) out.stratum_of_edge[idx(e)] = static_cast<int>(out.strata.size());
    out.strata.push_back(std::move(s));
  }
  return out;
}

}  // namespace fzkit
