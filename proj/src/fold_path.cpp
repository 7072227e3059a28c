#include "fzkit/fold_path.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "fzkit/splitting.hpp"

namespace fzkit {

namespace {

using boost::multiprecision::cpp_int;
using Poly = std::vector<cpp_int>;  // leading coefficient first

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Remainder of p modulo a monic q.
Poly poly_mod(Poly p, const Poly& q) {
  std::size_t dq = q.size() - 1;
  while (p.size() > dq && !p.empty()) {
    cpp_int lead = p.front();
    for (std::size_t i = 0; i < q.size(); ++i) p[i] -= lead * q[i];
    p.erase(p.begin());
  }
  return p;
}

bool divides(const Poly& q, const Poly& p) {
  for (const auto& c : poly_mod(p, q))
    if (c != 0) return false;
  return true;
}

// Largest k with k^2 | n, and the squarefree rest.
std::pair<long, long> square_split(long n) {
  long k = 1, d = n;
  for (long p = 2; p * p <= d; ++p)
    while (d % (p * p) == 0) {
      d /= p * p;
      k *= p;
    }
  return {k, d};
}

struct ExactLambda {
  QuadraticNumber value;
  Poly min_poly;
};

std::optional<ExactLambda> exact_lambda(const IntMatrix& block, double approx) {
  Poly cp = characteristic_polynomial(block);
  long l = std::lround(approx);
  if (std::abs(approx - static_cast<double>(l)) < 1e-6 && divides(Poly{1, -l}, cp))
    return ExactLambda{QuadraticNumber(l), Poly{1, -l}};
  // lambda^2 - t lambda + n = 0 with t = lambda + lambda', |lambda'| <= lambda
  for (long t = 0; t <= static_cast<long>(std::ceil(2 * approx)); ++t) {
    double nf = static_cast<double>(t) * approx - approx * approx;
    long n = std::lround(nf);
    if (std::abs(nf - static_cast<double>(n)) > 1e-6) continue;
    long disc = t * t - 4 * n;
    if (disc <= 0) continue;
    auto [k, d] = square_split(disc);
    if (d == 1) continue;
    if (!divides(Poly{1, -t, n}, cp)) continue;
    QuadraticNumber lam(Rational(t, 2), Rational(k, 2), d);
    if (std::abs(lam.to_double() - approx) > 1e-6) continue;
    return ExactLambda{lam, Poly{1, -t, n}};
  }
  return std::nullopt;
}

// Null vector of a over the field, free coordinate set to 1.
std::optional<std::vector<QuadraticNumber>> null_vector(std::vector<std::vector<QuadraticNumber>> a) {
  std::size_t n = a.size(), m = a.empty() ? 0 : a[0].size();
  std::vector<int> pivot_col;
  std::size_t row = 0;
  for (std::size_t c = 0; c < m && row < n; ++c) {
    std::size_t p = row;
    while (p < n && a[p][c].sign() == 0) ++p;
    if (p == n) continue;
    std::swap(a[p], a[row]);
    QuadraticNumber inv = QuadraticNumber(1) / a[row][c];
    for (auto& x : a[row]) x = x * inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row || a[i][c].sign() == 0) continue;
      QuadraticNumber k = a[i][c];
      for (std::size_t j = 0; j < m; ++j) a[i][j] = a[i][j] - k * a[row][j];
    }
    pivot_col.push_back(static_cast<int>(c));
    ++row;
  }
  if (pivot_col.size() + 1 != m) return std::nullopt;
  std::size_t free_col = 0;
  for (std::size_t c = 0; c < m; ++c)
    if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(c)) == pivot_col.end()) free_col = c;
  std::vector<QuadraticNumber> v(m, QuadraticNumber(0));
  v[free_col] = QuadraticNumber(1);
  for (std::size_t i = 0; i < pivot_col.size(); ++i) v[idx(pivot_col[i])] = -a[i][free_col];
  return v;
}

std::vector<Letter> substitute(const std::vector<EdgePath>& images, const Word& g) {
  std::vector<Letter> raw;
  for (Letter x : g.letters()) {
    const EdgePath& p = images[idx(std::abs(x) - 1)];
    if (x > 0) raw.insert(raw.end(), p.letters().begin(), p.letters().end());
    else
      for (auto it = p.letters().rbegin(); it != p.letters().rend(); ++it) raw.push_back(-*it);
  }
  return raw;
}

Real loop_length(const std::vector<Real>& lengths, const EdgePath& p, bool exact) {
  std::vector<long> count(lengths.size(), 0);
  for (int oe : p.letters()) ++count[idx(edge_index(oe))];
  Real sum = exact ? Real(0) : Real::floating(0);
  for (std::size_t e = 0; e < count.size(); ++e)
    if (count[e]) sum += Real(count[e]) * lengths[e];
  return sum;
}

EdgePath cyclic_loop(const std::vector<Letter>& raw) { return cyclic_reduce(Word::reduce(raw)).core; }

}  // namespace

const char* to_string(Arithmetic a) { return a == Arithmetic::Exact ? "exact" : "float"; }

MuMeasure mu_metric(const GraphSelfMap& f, const Stratification& s, Arithmetic mode) {
  int r = s.top_eg();
  if (r < 0) throw PreconditionFailed("no EG stratum");
  if (r + 1 != static_cast<int>(s.strata.size())) throw PreconditionFailed("a stratum lies above the top EG stratum");
  const auto& edges = s.strata[idx(r)].edges;
  IntMatrix full = f.transition_matrix(), block(edges.size(), std::vector<long>(edges.size()));
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = 0; j < edges.size(); ++j) block[i][j] = full[idx(edges[i])][idx(edges[j])];
  // mu(f(E_j)) = sum_i block[i][j] mu(E_i) = lambda mu(E_j)
  IntMatrix bt = transpose(block);
  PFData pf = pf_eigen(bt);

  MuMeasure out;
  out.stratum = r;
  std::size_t ne = idx(f.graph().num_edges());
  if (mode == Arithmetic::Exact) {
    if (auto lam = exact_lambda(block, pf.lambda)) {
      std::vector<std::vector<QuadraticNumber>> a(edges.size(), std::vector<QuadraticNumber>(edges.size()));
      for (std::size_t i = 0; i < edges.size(); ++i)
        for (std::size_t j = 0; j < edges.size(); ++j)
          a[i][j] = QuadraticNumber(bt[i][j]) - (i == j ? lam->value : QuadraticNumber(0));
      if (auto v = null_vector(a)) {
        QuadraticNumber first = (*v)[0];
        out.mode = Arithmetic::Exact;
        out.lambda = Real(lam->value);
        out.min_poly = lam->min_poly;
        out.mu.assign(ne, Real(0));
        for (std::size_t i = 0; i < edges.size(); ++i) out.mu[idx(edges[i])] = Real((*v)[i] / first);
        return out;
      }
      out.note = "eigenspace of lambda is not one-dimensional";
    } else {
      out.note = "lambda has degree above 2";
    }
  }
  out.mode = Arithmetic::Float;
  out.lambda = Real::floating(pf.lambda);
  out.mu.assign(ne, Real::floating(0));
  for (std::size_t i = 0; i < edges.size(); ++i) out.mu[idx(edges[i])] = Real::floating(pf.vec[i] / pf.vec[0]);
  return out;
}

std::vector<EdgePath> generator_loops(const MarkedGraph& g) {
  auto loops = g.loop_basis();
  std::vector<Word> reads;
  for (const auto& l : loops) reads.push_back(g.read(l));
  auto ex = express_generators(reads, g.rank());
  if (!ex) throw PreconditionFailed("the marking does not read a basis");
  std::vector<EdgePath> out;
  for (const auto& w : *ex) out.push_back(Word::reduce(substitute(loops, w)));
  return out;
}

CollapsedGraph collapse_T0(const GraphSelfMap& f, const Stratification& s, const MuMeasure& mu) {
  const MarkedGraph& g = f.graph();
  CollapsedGraph t;
  t.graph = g;
  t.stratum = mu.stratum;
  t.lengths = mu.mu;
  t.edges = s.strata[idx(mu.stratum)].edges;
  auto is_top = [&](int e) { return s.stratum_of_edge[idx(e)] == mu.stratum; };

  int nv = g.num_vertices();
  t.component.assign(idx(nv), -1);
  for (int root = 0; root < nv; ++root) {
    if (t.component[idx(root)] >= 0) continue;
    int c = static_cast<int>(t.vertex_groups.size());
    t.vertex_groups.emplace_back();
    // spanning tree of the lower edges in this component
    std::vector<EdgePath> to_root(idx(nv));
    std::vector<bool> tree(idx(g.num_edges()), false);
    std::vector<int> queue{root};
    t.component[idx(root)] = c;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      int v = queue[q];
      for (int d : g.directions(v)) {
        if (is_top(edge_index(d))) continue;
        int w = g.terminus(d);
        if (t.component[idx(w)] >= 0) continue;
        t.component[idx(w)] = c;
        tree[idx(edge_index(d))] = true;
        to_root[idx(w)] = to_root[idx(v)] * Word::reduce({d});
        queue.push_back(w);
      }
    }
    EdgePath base = g.tree_path(root);
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& ge = g.edge(e);
      if (is_top(e) || tree[idx(e)] || t.component[idx(ge.tail)] != c) continue;
      EdgePath loop = to_root[idx(ge.tail)] * Word::reduce({e + 1}) * to_root[idx(ge.head)].inverse();
      t.vertex_groups.back().push_back(g.read(base * loop * base.inverse()));
    }
  }
  t.generator_loops = generator_loops(g);
  return t;
}

Real translation_length(const CollapsedGraph& t, const Word& g) {
  bool exact = std::all_of(t.lengths.begin(), t.lengths.end(), [](const Real& x) { return x.is_exact(); });
  return loop_length(t.lengths, cyclic_loop(substitute(t.generator_loops, g)), exact);
}

InducedMap induced_f0(const GraphSelfMap& f, const Stratification& s, const CollapsedGraph& t0, const MuMeasure& mu,
                      int iterates) {
  const MarkedGraph& g = f.graph();
  InducedMap out;
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < t0.edges.size(); ++i) pos[t0.edges[i]] = i;
  auto top = [&](int oe) { return pos.count(edge_index(oe)) > 0; };

  std::size_t n = t0.edges.size();
  out.transition.assign(n, std::vector<long>(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    EdgePath img = f.image(oriented(t0.edges[j]));
    std::vector<Letter> kept;
    for (int oe : img.letters())
      if (top(oe)) {
        kept.push_back(oe);
        ++out.transition[pos[edge_index(oe)]][j];
      }
    out.images.push_back(Word::reduce(kept));
    Real len = loop_length(t0.lengths, out.images.back(), mu.mode == Arithmetic::Exact);
    Real want = mu.lambda * t0.lengths[idx(t0.edges[j])];
    if (!agree(len, want))
      throw AuditFailed("edge " + g.edge_name(oriented(t0.edges[j])) + ": image has length " + len.str() +
                        ", expected " + want.str());
  }
  out.audit.push_back("edge images scale by lambda");

  IntMatrix full = f.transition_matrix();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (full[idx(t0.edges[i])][idx(t0.edges[j])] != out.transition[i][j])
        throw AuditFailed("transition entry (" + g.edge_name(oriented(t0.edges[i])) + ", " +
                          g.edge_name(oriented(t0.edges[j])) + ") differs from the top block");
  out.audit.push_back("transition matrix equals the top block");

  GateStructure gs = gates(f);
  for (int e : t0.edges)
    for (int k = 1; k <= iterates; ++k) {
      EdgePath p = f.map_path(Word::reduce({oriented(e)}), k);
      int bad = first_illegal_turn(p, gs, &s, t0.stratum);
      if (bad >= 0)
        throw AuditFailed("f^" + std::to_string(k) + "(" + g.edge_name(oriented(e)) + ") crosses the illegal turn (" +
                          g.edge_name(-p[idx(bad)]) + ", " + g.edge_name(p[idx(bad) + 1]) + ")");
    }
  out.audit.push_back("iterated edge images are r-legal");

  std::vector<std::set<std::pair<int, int>>> gate_sets(idx(t0.num_vertices()));
  for (int e : t0.edges)
    for (int d : {e + 1, -(e + 1)}) {
      int v = g.origin(d);
      gate_sets[idx(t0.component[idx(v)])].insert({v, gs.gate[dir_slot(d)]});
    }
  for (int c = 0; c < t0.num_vertices(); ++c)
    if (gate_sets[idx(c)].size() == 1)
      throw AuditFailed("vertex " + std::to_string(c) + " of T0 has a single gate");
  out.audit.push_back("at least two gates at every vertex of T0");
  return out;
}

namespace {

class Traversal {
 public:
  Traversal(const GraphSelfMap& f, const CollapsedGraph& t, const GateStructure& gs) : f_(f), t_(t), gs_(gs) {
    exact_ = std::all_of(t.lengths.begin(), t.lengths.end(), [](const Real& x) { return x.is_exact(); });
    for (int e : t.edges)
      for (int d : {e + 1, -(e + 1)}) {
        images_[d] = f.image(d).letters();
        dirs_at_[f.graph().origin(d)].push_back(d);
      }
  }

  Real zero() const { return exact_ ? Real(0) : Real::floating(0); }

  // Common prefix of image(a)[ia..] and image(b)[ib..], then continue.
  Real match(int a, std::size_t ia, int b, std::size_t ib) {
    const auto& x = images_.at(a);
    const auto& y = images_.at(b);
    Real gain = zero();
    while (ia < x.size() && ib < y.size() && x[ia] == y[ib]) {
      gain += t_.lengths[idx(edge_index(x[ia]))];
      ++ia;
      ++ib;
    }
    if (ia < x.size() && ib < y.size()) return gain;
    if (ia == x.size() && ib == y.size()) return gain + both_empty(a, b);
    if (ia == x.size()) return gain + one_empty(a, b, ib);
    return gain + one_empty(b, a, ia);
  }

  std::size_t states() const { return memo_.size(); }

 private:
  using Key = std::tuple<int, int, int, std::size_t>;

  std::vector<int> continuations(int last) {
    std::vector<int> out;
    auto it = dirs_at_.find(f_.graph().terminus(last));
    if (it == dirs_at_.end()) return out;
    for (int d : it->second)
      if (d != -last && !gs_.same_gate(-last, d)) out.push_back(d);
    return out;
  }

  Real memoized(const Key& k, const std::function<Real()>& body) {
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    if (!stack_.insert(k).second)
      throw AuditFailed("bounded cancellation fails: two legal paths keep equal images indefinitely");
    Real v = body();
    stack_.erase(k);
    memo_.emplace(k, v);
    return v;
  }

  // One path has used up its images and ended with `last`; the other still
  // has image(other)[offset..] to read.
  Real one_empty(int last, int other, std::size_t offset) {
    return memoized({0, last, other, offset}, [&] {
      Real best = zero();
      for (int d : continuations(last)) best = std::max(best, match(d, 0, other, offset));
      return best;
    });
  }

  Real both_empty(int a, int b) {
    if (a > b) std::swap(a, b);
    return memoized({1, a, b, 0}, [&] {
      Real best = zero();
      for (int d : continuations(a)) best = std::max(best, one_empty(b, d, 0));
      return best;
    });
  }

  const GraphSelfMap& f_;
  const CollapsedGraph& t_;
  const GateStructure& gs_;
  bool exact_ = true;
  std::map<int, std::vector<Letter>> images_;
  std::map<int, std::vector<int>> dirs_at_;
  std::map<Key, Real> memo_;
  std::set<Key> stack_;
};

}  // namespace

BbtReport bbt(const GraphSelfMap& f, const CollapsedGraph& t0, const GateStructure& gs) {
  Traversal tr(f, t0, gs);
  BbtReport rep;
  rep.value = tr.zero();
  std::vector<int> dirs;
  for (int e : t0.edges) dirs.insert(dirs.end(), {e + 1, -(e + 1)});
  std::sort(dirs.begin(), dirs.end());
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      int a = dirs[i], b = dirs[j];
      if (f.graph().origin(a) != f.graph().origin(b) || !gs.same_gate(a, b)) continue;
      Real v = tr.match(a, 0, b, 0);
      if (rep.value < v) {
        rep.value = v;
        rep.turn = {a, b};
      }
    }
  rep.states = tr.states();
  return rep;
}

FoldPathSetup fold_path_setup(const GraphSelfMap& f, Arithmetic mode) {
  FoldPathSetup s{f, f.induced_automorphism(), compute_stratification(f), {}, {}, {}, {}};
  s.mu = mu_metric(f, s.strata, mode);
  s.t0 = collapse_T0(f, s.strata, s.mu);
  s.f0 = induced_f0(f, s.strata, s.t0, s.mu);
  s.bbt0 = bbt(f, s.t0, gates(f));
  return s;
}

FoldPathState fold_path_start(const FoldPathSetup& setup, std::vector<Word> test_words) {
  bool exact = setup.mu.mode == Arithmetic::Exact;
  FoldPathState st;
  st.scale = exact ? Real(1) : Real::floating(1);
  st.time = exact ? Real(0) : Real::floating(0);
  st.marking = setup.t0.generator_loops;
  st.test_words = std::move(test_words);
  st.images = st.test_words;
  for (const auto& w : st.test_words) st.lengths.push_back(translation_length(setup, st, w));
  return st;
}

Real translation_length(const FoldPathSetup& setup, const FoldPathState& state, const Word& g) {
  return state.scale * loop_length(setup.t0.lengths, cyclic_loop(substitute(state.marking, g)),
                                   setup.mu.mode == Arithmetic::Exact);
}

FoldPathState fold_path_advance(const FoldPathSetup& setup, const FoldPathState& state) {
  FoldPathState next;
  next.index = state.index + 1;
  next.scale = state.scale / setup.mu.lambda;
  if (!next.scale.is_exact() && next.scale.to_double() < 1e-280)
    throw NumericUnderflow("lambda^-" + std::to_string(next.index) + " underflows");
  next.time = state.time + setup.bbt0.value * state.scale / Real(2);
  next.test_words = state.test_words;
  for (const auto& m : state.marking) next.marking.push_back(setup.f.map_path(m));
  for (const auto& w : state.images) next.images.push_back(setup.phi.apply(w));
  for (std::size_t k = 0; k < next.test_words.size(); ++k) {
    Real here = translation_length(setup, next, next.test_words[k]);
    Real there = next.scale * translation_length(setup.t0, next.images[k]);
    if (!agree(here, there))
      throw AuditFailed("step " + std::to_string(next.index) + ", word " + next.test_words[k].str() + ": " +
                        here.str() + " != " + there.str());
    next.lengths.push_back(here);
  }
  return next;
}

Real time_bound(const FoldPathSetup& setup) {
  const Real& lam = setup.mu.lambda;
  return setup.bbt0.value * lam / (Real(2) * (lam - Real(1)));
}

LimitDiagnostics limit_diagnostics(const FoldPathSetup& setup, const std::vector<Word>& words, int i_max, int m_max,
                                   double tolerance, std::size_t word_cap) {
  FreeAutomorphism inv;
  try {
    inv = invert(setup.phi);
  } catch (const Error& e) {
    throw InversionUnavailable(e.what());
  }
  LimitDiagnostics out;
  out.lambda = setup.mu.lambda.to_double();
  const auto& g = setup.f.graph();
  std::vector<double> mu;
  for (const auto& x : setup.t0.lengths) mu.push_back(x.to_double());
  IntMatrix m = setup.f.transition_matrix();
  GateStructure gs = gates(setup.f);
  std::size_t ne = idx(g.num_edges());

  bool any = false, all = true;
  for (const auto& w : words) {
    std::string name = w.str();
    EdgePath cur = cyclic_loop(substitute(setup.t0.generator_loops, w));
    std::vector<double> counts;  // set once the loop is legal
    double prev = 0, last = 0;
    for (int i = 0; i <= i_max; ++i) {
      if (counts.empty() && !cur.empty()) {
        std::vector<Letter> closed = cur.letters();
        closed.push_back(cur[0]);
        if (first_illegal_turn(Word::reduce(closed), gs) < 0) {
          counts.assign(ne, 0);
          for (int oe : cur.letters()) counts[idx(edge_index(oe))] += 1;
        }
      }
      double len = 0;
      if (!counts.empty())
        for (std::size_t e = 0; e < ne; ++e) len += counts[e] * mu[e];
      else
        for (int oe : cur.letters()) len += mu[idx(edge_index(oe))];
      double v = len * std::pow(out.lambda, -i);
      out.limit.push_back({i, name, v});
      if (i > 0) out.cauchy.push_back({i, name, std::abs(v - prev)});
      prev = last = v;
      if (i == i_max) break;
      if (!counts.empty()) {
        std::vector<double> nc(ne, 0);
        for (std::size_t a = 0; a < ne; ++a)
          for (std::size_t b = 0; b < ne; ++b) nc[a] += static_cast<double>(m[a][b]) * counts[b];
        counts = std::move(nc);
      } else {
        cur = cyclic_reduce(setup.f.map_path(cur)).core;
        if (cur.size() > word_cap) {
          out.notes.push_back(name + ": loop passed " + std::to_string(word_cap) + " edges at step " +
                              std::to_string(i + 1) + " before becoming legal");
          break;
        }
      }
    }
    if (last == 0) {
      out.notes.push_back(name + ": elliptic in T0");
      continue;
    }
    any = true;
    double d0 = last / static_cast<double>(cyclic_length(w));
    bool confirmed = false;
    Word h = w;
    for (int k = 1; k <= m_max; ++k) {
      h = cyclic_reduce(inv.apply(h)).core;
      if (h.size() > word_cap) {
        out.notes.push_back(name + ": inverse iterate passed the word cap at m = " + std::to_string(k));
        break;
      }
      double d = last * std::pow(out.lambda, -k) / static_cast<double>(h.size());
      out.decay.push_back({k, name, d});
      if (d < tolerance * d0) confirmed = true;
    }
    all = all && confirmed;
  }
  out.repelling_decay_confirmed = any && all;
  return out;
}

}  // namespace fzkit
