#include "fzkit/disintegration.hpp"

#include <algorithm>
#include <map>
#include <functional>
#include <numeric>
#include <optional>
#include <tuple>
#include <set>

#include "fzkit/automorphism.hpp"

namespace fzkit {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

bool matches_at(const EdgePath& p, std::size_t pos, const EdgePath& q) {
  if (pos + q.size() > p.size()) return false;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (p[pos + i] != q[i]) return false;
  return true;
}

const Stratum& stratum_of(const Stratification& s, int oe) { return s.strata[idx(s.stratum_of_edge[idx(edge_index(oe))])]; }

// Linear stratum whose oriented edge is exactly oe, or -1.
int linear_at(const Stratification& s, int oe) {
  int r = s.stratum_of_edge[idx(edge_index(oe))];
  const auto& st = s.strata[idx(r)];
  return st.kind == StratumKind::NEGLinear && st.oriented_edge == oe ? r : -1;
}

// Longest E_i w^k ~E_j at pos with w the common based axis; k may be any integer.
std::optional<SplittingUnit> match_linear(const EdgePath& p, std::size_t pos, const Stratification& s) {
  int i = linear_at(s, p[pos]);
  if (i < 0) return std::nullopt;
  const auto& si = s.strata[idx(i)];
  std::optional<SplittingUnit> best;
  for (long sign : {1L, -1L}) {
    EdgePath w = sign > 0 ? si.axis : si.axis.inverse();
    std::size_t at = pos + 1;
    long k = 0;
    while (true) {
      if (at < p.size()) {
        int j = linear_at(s, -p[at]);
        if (j >= 0 && s.strata[idx(j)].axis == si.axis && (k != 0 || j != i)) {
          SplittingUnit u;
          u.path = p.subword(pos, at + 1 - pos);
          u.first_stratum = i;
          u.last_stratum = j;
          u.power = sign * k;
          if (!best || u.path.size() > best->path.size()) best = u;
        }
      }
      if (!matches_at(p, at, w)) break;
      at += w.size();
      ++k;
    }
  }
  return best;
}

bool unit_less_fixed(const Stratification& s, int oe) { return stratum_of(s, oe).kind == StratumKind::NEGFixed; }

std::vector<SplittingUnit> greedy(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps, const EdgePath& p,
                                  int& position) {
  (void)f;
  std::vector<SplittingUnit> out;
  std::size_t pos = 0;
  while (pos < p.size()) {
    std::optional<SplittingUnit> best;
    auto offer = [&](SplittingUnit u) {
      if (!best || u.path.size() > best->path.size()) best = std::move(u);
    };
    for (std::size_t r = 0; r < inps.records.size(); ++r) {
      const auto& rec = inps.records[r];
      if (rec.period != 1 || rec.kind != NielsenKind::EG) continue;
      for (const EdgePath& q : {rec.path, rec.path.inverse()})
        if (matches_at(p, pos, q)) {
          SplittingUnit u;
          u.kind = UnitKind::INP;
          u.path = q;
          u.record = static_cast<int>(r);
          u.stratum = rec.height;
          offer(u);
        }
    }
    if (auto lin = match_linear(p, pos, s)) {
      const auto& a = s.strata[idx(lin->first_stratum)];
      const auto& b = s.strata[idx(lin->last_stratum)];
      if (lin->first_stratum == lin->last_stratum || a.exponent == b.exponent) {
        lin->kind = UnitKind::INP;
        offer(*lin);
      } else if (a.exponent * b.exponent > 0) {
        lin->kind = UnitKind::ExceptionalPath;
        offer(*lin);
      }
    }
    int oe = p[pos];
    int r = s.stratum_of_edge[idx(edge_index(oe))];
    const auto& st = s.strata[idx(r)];
    if (st.kind == StratumKind::Zero) {
      std::size_t end = pos;
      while (end < p.size() && stratum_of(s, p[end]).kind == StratumKind::Zero) ++end;
      SplittingUnit u;
      u.kind = UnitKind::TakenConnecting;
      u.path = p.subword(pos, end - pos);
      u.stratum = r;
      offer(u);
    } else {
      SplittingUnit u;
      u.kind = unit_less_fixed(s, oe) ? UnitKind::FixedEdge : UnitKind::SingleEdge;
      u.path = p.subword(pos, 1);
      u.stratum = r;
      offer(u);
    }
    if (!best) {
      position = static_cast<int>(pos);
      return {};
    }
    pos += best->path.size();
    out.push_back(std::move(*best));
  }
  return out;
}

}  // namespace

const char* to_string(UnitKind k) {
  switch (k) {
    case UnitKind::SingleEdge: return "edge";
    case UnitKind::INP: return "INP";
    case UnitKind::ExceptionalPath: return "exceptional";
    case UnitKind::QEP: return "QEP";
    case UnitKind::TakenConnecting: return "connecting";
    default: return "fixed";
  }
}

bool is_splitting(const GraphSelfMap& f, const std::vector<SplittingUnit>& units, int iterates) {
  std::vector<EdgePath> cur;
  std::vector<int> whole;
  for (const auto& u : units) {
    cur.push_back(u.path);
    for (int x : u.path.letters()) whole.push_back(x);
  }
  EdgePath p = Word::reduce(whole);
  for (int k = 1; k <= iterates; ++k) {
    p = f.map_path(p);
    std::vector<int> raw;
    for (auto& c : cur) {
      c = f.map_path(c);
      for (int x : c.letters()) raw.push_back(x);
    }
    if (raw != p.letters()) return false;
  }
  return true;
}

SplitResult complete_split(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps, const EdgePath& p,
                           const SplitCaps& caps) {
  SplitResult res;
  EdgePath cur = p;
  for (int attempt = 0; attempt <= caps.retries; ++attempt) {
    if (attempt > 0) cur = f.map_path(cur);
    if (cur.size() > caps.max_length) {
      res.note = "path length cap reached";
      break;
    }
    int position = -1;
    auto units = greedy(f, s, inps, cur, position);
    res.path = cur;
    res.retries_used = attempt;
    if (position >= 0) {
      res.position = position;
      res.note = "no unit matches at position " + std::to_string(position);
      continue;
    }
    if (is_splitting(f, units, caps.verify_iterates)) {
      res.status = Status::pass;
      res.units = std::move(units);
      res.position = -1;
      res.note.clear();
      return res;
    }
    // Locate the first boundary whose images cancel.
    res.position = -1;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < units.size() && res.position < 0; ++i) {
      at += units[i].path.size();
      if (!is_splitting(f, {units[i], units[i + 1]}, caps.verify_iterates)) res.position = static_cast<int>(at);
    }
    res.note = "cancellation between units at position " + std::to_string(res.position);
  }
  res.status = Status::unknown;
  return res;
}

std::vector<SplittingUnit> qe_coarsen(const std::vector<SplittingUnit>& units, const Stratification& s) {
  std::vector<SplittingUnit> out;
  std::size_t i = 0;
  while (i < units.size()) {
    const auto& u = units[i];
    int a = u.kind == UnitKind::SingleEdge && u.path.size() == 1 ? linear_at(s, u.path[0]) : -1;
    bool merged = false;
    if (a >= 0) {
      const auto& sa = s.strata[idx(a)];
      std::vector<int> mid;
      for (std::size_t j = i + 1; j < units.size(); ++j) {
        const auto& v = units[j];
        int b = v.kind == UnitKind::SingleEdge && v.path.size() == 1 ? linear_at(s, -v.path[0]) : -1;
        if (b >= 0) {
          const auto& sb = s.strata[idx(b)];
          if (sb.axis == sa.axis && sa.exponent * sb.exponent < 0) {
            // the middle must be a power of the axis
            EdgePath w = Word::reduce(mid);
            long k = 0;
            bool ok = false;
            for (long sign : {1L, -1L}) {
              EdgePath base = sign > 0 ? sa.axis : sa.axis.inverse();
              EdgePath acc;
              for (long t = 0; acc.size() <= w.size(); ++t) {
                if (acc == w) {
                  ok = true;
                  k = sign * t;
                  break;
                }
                acc = acc * base;
              }
              if (ok) break;
            }
            if (ok && w.size() == mid.size()) {
              SplittingUnit q;
              q.kind = UnitKind::QEP;
              std::vector<int> all;
              for (std::size_t t = i; t <= j; ++t)
                for (int x : units[t].path.letters()) all.push_back(x);
              q.path = Word::reduce(all);
              q.first_stratum = a;
              q.last_stratum = b;
              q.power = k;
              out.push_back(std::move(q));
              i = j + 1;
              merged = true;
            }
          }
          break;
        }
        for (int x : v.path.letters()) mid.push_back(x);
        if (mid.size() > 4096) break;
      }
    }
    if (!merged) {
      out.push_back(u);
      ++i;
    }
  }
  return out;
}

// ---- interaction graph ------------------------------------------------------

int InteractionGraph::vertex_of_stratum(int r) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == r) return static_cast<int>(i);
  return -1;
}

namespace {

bool nonfixed_irreducible(const Stratum& st) {
  return st.kind == StratumKind::EG || st.kind == StratumKind::NEGLinear || st.kind == StratumKind::NEGNonlinear;
}

// Zero strata enveloped by EG stratum r: taken by iterates of its edges.
std::set<int> enveloped_zero(const GraphSelfMap& f, const Stratification& s, int r) {
  std::set<int> out;
  for (int e : s.strata[idx(r)].edges) {
    EdgePath cur = Word::reduce({e + 1});
    for (int k = 0; k < 3 && cur.size() < 20000; ++k) {
      cur = f.map_path(cur);
      for (int oe : cur.letters()) {
        int z = s.stratum_of_edge[idx(edge_index(oe))];
        if (z < r && s.strata[idx(z)].kind == StratumKind::Zero) out.insert(z);
      }
    }
  }
  return out;
}

// Maximal zero-stratum subpaths of iterated images of EG edges in stratum r.
std::vector<EdgePath> taken_connecting(const GraphSelfMap& f, const Stratification& s, int r) {
  std::set<EdgePath> found;
  for (int e : s.strata[idx(r)].edges) {
    EdgePath cur = Word::reduce({e + 1});
    for (int k = 0; k < 3 && cur.size() < 20000; ++k) {
      cur = f.map_path(cur);
      std::size_t i = 0;
      while (i < cur.size()) {
        if (stratum_of(s, cur[i]).kind != StratumKind::Zero) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < cur.size() && stratum_of(s, cur[j]).kind == StratumKind::Zero) ++j;
        EdgePath c = cur.subword(i, j - i);
        found.insert(std::min(c, c.inverse()));
        i = j;
      }
    }
  }
  return {found.begin(), found.end()};
}

// v^B-paths for stratum r: its edges, plus taken connecting paths for EG strata.
std::vector<EdgePath> kappa_paths(const GraphSelfMap& f, const Stratification& s, int r) {
  std::vector<EdgePath> out;
  for (int e : s.strata[idx(r)].edges) out.push_back(Word::reduce({e + 1}));
  if (s.strata[idx(r)].kind == StratumKind::EG)
    for (auto& c : taken_connecting(f, s, r)) out.push_back(c);
  return out;
}

struct Components {
  std::vector<int> comp;
  int count = 0;
};

Components undirected_components(int n, const std::vector<InteractionGraph::Arrow>& arrows) {
  std::vector<int> parent(idx(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[idx(x)] == x ? x : parent[idx(x)] = find(parent[idx(x)]); };
  for (const auto& a : arrows) parent[idx(find(a.from))] = find(a.to);
  Components c;
  c.comp.assign(idx(n), -1);
  std::map<int, int> ids;
  for (int v = 0; v < n; ++v) {
    auto it = ids.emplace(find(v), c.count).first;
    if (it->second == c.count) ++c.count;
    c.comp[idx(v)] = it->second;
  }
  return c;
}

std::vector<InteractionGraph::Arrow> arrows_at(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps,
                                               const std::vector<int>& vertices, int iterate, const SplitCaps& caps,
                                               Status& status, std::vector<std::string>& notes) {
  std::vector<InteractionGraph::Arrow> out;
  std::set<std::pair<int, int>> seen;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    int r = vertices[v];
    for (const auto& kappa : kappa_paths(f, s, r)) {
      EdgePath img = f.map_path(kappa, iterate);
      SplitResult sr = complete_split(f, s, inps, img, caps);
      if (sr.status != Status::pass) {
        status = Status::unknown;
        notes.push_back("image of " + f.graph().path_str(kappa) + " not split: " + sr.note);
        continue;
      }
      for (const auto& u : qe_coarsen(sr.units, s)) {
        if (u.kind != UnitKind::SingleEdge) continue;
        int j = s.stratum_of_edge[idx(edge_index(u.path[0]))];
        auto it = std::find(vertices.begin(), vertices.end(), j);
        if (j == r || it == vertices.end()) continue;
        int w = static_cast<int>(it - vertices.begin());
        if (!seen.insert({static_cast<int>(v), w}).second) continue;
        out.push_back({static_cast<int>(v), w, kappa, iterate});
      }
    }
  }
  return out;
}

}  // namespace

InteractionGraph build_B(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps, const BCaps& caps) {
  InteractionGraph b;
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r)
    if (nonfixed_irreducible(s.strata[idx(r)])) b.vertices.push_back(r);
  int n = static_cast<int>(b.vertices.size());
  b.arrows = arrows_at(f, s, inps, b.vertices, caps.iterate, caps.split, b.status, b.notes);
  auto c = undirected_components(n, b.arrows);
  b.component = c.comp;
  b.num_components = c.count;
  if (n > 0) b.main_component = b.component.back();
  Status st2 = Status::pass;
  std::vector<std::string> notes2;
  auto doubled = arrows_at(f, s, inps, b.vertices, 2 * caps.iterate, caps.split, st2, notes2);
  auto c2 = undirected_components(n, doubled);
  b.stable_under_iterate = c2.count == c.count;
  if (!b.stable_under_iterate)
    b.notes.push_back("component count changes from " + std::to_string(c.count) + " to " + std::to_string(c2.count) +
                      " at iterate " + std::to_string(2 * caps.iterate));
  return b;
}

std::vector<std::vector<int>> almost_invariant_subgraphs(const InteractionGraph& b, const Stratification& s,
                                                         const GraphSelfMap& f) {
  std::vector<std::set<int>> x(idx(b.num_components));
  for (std::size_t v = 0; v < b.vertices.size(); ++v) {
    int r = b.vertices[v];
    auto& xs = x[idx(b.component[v])];
    for (int e : s.strata[idx(r)].edges) xs.insert(e);
    if (s.strata[idx(r)].kind == StratumKind::EG)
      for (int z : enveloped_zero(f, s, r))
        for (int e : s.strata[idx(z)].edges) xs.insert(e);
  }
  std::vector<std::vector<int>> out;
  for (auto& xs : x) out.emplace_back(xs.begin(), xs.end());
  return out;
}

// ---- admissible lattice -----------------------------------------------------

bool LatticeConstraint::satisfied_by(const std::vector<BigInt>& a) const {
  return a[idx(r)] * (di - dj) == a[idx(s)] * di - a[idx(t)] * dj;
}

std::vector<std::vector<BigInt>> integer_kernel(const std::vector<std::vector<BigInt>>& rows, int columns) {
  std::size_t n = idx(columns);
  // Column operations on [A; I]: bring A to column echelon form; the
  // identity part of each column of A that becomes zero is a kernel vector.
  std::vector<std::vector<BigInt>> col(n, std::vector<BigInt>(rows.size() + n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[j][i] = rows[i][j];
    col[j][rows.size() + j] = 1;
  }
  std::size_t pivot_col = 0;
  for (std::size_t i = 0; i < rows.size() && pivot_col < n; ++i) {
    while (true) {
      std::size_t best = n;
      for (std::size_t j = pivot_col; j < n; ++j)
        if (col[j][i] != 0 && (best == n || abs(col[j][i]) < abs(col[best][i]))) best = j;
      if (best == n) break;
      std::swap(col[pivot_col], col[best]);
      bool clean = true;
      for (std::size_t j = pivot_col + 1; j < n; ++j) {
        if (col[j][i] == 0) continue;
        BigInt q = col[j][i] / col[pivot_col][i];
        for (std::size_t k = 0; k < col[j].size(); ++k) col[j][k] -= q * col[pivot_col][k];
        if (col[j][i] != 0) clean = false;
      }
      if (clean) {
        ++pivot_col;
        break;
      }
    }
  }
  std::vector<std::vector<BigInt>> basis;
  for (std::size_t j = pivot_col; j < n; ++j) basis.emplace_back(col[j].begin() + static_cast<long>(rows.size()), col[j].end());
  // Hermite normal form of the basis rows.
  std::size_t top = 0;
  for (std::size_t c = 0; c < n && top < basis.size(); ++c) {
    while (true) {
      std::size_t best = basis.size();
      for (std::size_t r = top; r < basis.size(); ++r)
        if (basis[r][c] != 0 && (best == basis.size() || abs(basis[r][c]) < abs(basis[best][c]))) best = r;
      if (best == basis.size()) break;
      std::swap(basis[top], basis[best]);
      bool clean = true;
      for (std::size_t r = top + 1; r < basis.size(); ++r) {
        if (basis[r][c] == 0) continue;
        BigInt q = basis[r][c] / basis[top][c];
        for (std::size_t k = 0; k < n; ++k) basis[r][k] -= q * basis[top][k];
        if (basis[r][c] != 0) clean = false;
      }
      if (!clean) continue;
      if (basis[top][c] < 0)
        for (auto& x : basis[top]) x = -x;
      for (std::size_t r = 0; r < top; ++r) {
        BigInt q = basis[r][c] / basis[top][c];
        if (basis[r][c] - q * basis[top][c] < 0) q -= 1;
        for (std::size_t k = 0; k < n; ++k) basis[r][k] -= q * basis[top][k];
      }
      ++top;
      break;
    }
  }
  return basis;
}

AdmissibleLattice admissible_lattice(const GraphSelfMap& f, const Stratification& s, const InpSearch& inps,
                                     const InteractionGraph& b, const SplitCaps& caps) {
  AdmissibleLattice lat;
  lat.dimension = b.num_components;
  auto comp_of = [&](int r) { return b.component[idx(b.vertex_of_stratum(r))]; };
  std::set<std::tuple<int, int, int, long, long>> seen;
  for (std::size_t v = 0; v < b.vertices.size(); ++v) {
    int r = b.vertices[v];
    for (const auto& kappa : kappa_paths(f, s, r)) {
      SplitResult sr = complete_split(f, s, inps, f.map_path(kappa), caps);
      if (sr.status != Status::pass) continue;
      for (const auto& u : qe_coarsen(sr.units, s)) {
        if (u.kind != UnitKind::QEP) continue;
        LatticeConstraint c;
        c.r = b.component[v];
        c.s = comp_of(u.first_stratum);
        c.t = comp_of(u.last_stratum);
        c.di = s.strata[idx(u.first_stratum)].exponent;
        c.dj = s.strata[idx(u.last_stratum)].exponent;
        c.witness = u.path;
        if (seen.insert({c.r, c.s, c.t, c.di, c.dj}).second) lat.constraints.push_back(c);
      }
    }
  }
  std::vector<std::vector<BigInt>> rows;
  for (const auto& c : lat.constraints) {
    std::vector<BigInt> row(idx(lat.dimension), 0);
    row[idx(c.r)] += c.di - c.dj;
    row[idx(c.s)] -= c.di;
    row[idx(c.t)] += c.dj;
    rows.push_back(std::move(row));
  }
  lat.basis = integer_kernel(rows, lat.dimension);
  return lat;
}

GraphSelfMap synthesize_generator(const GraphSelfMap& f, const Stratification& s, const InteractionGraph& b,
                                  const std::vector<long>& a) {
  if (static_cast<int>(a.size()) != b.num_components) throw PreconditionFailed("tuple length differs from component count");
  for (long x : a)
    if (x < 0) throw InversionUnavailable("negative exponent in tuple");
  const auto& g = f.graph();
  auto subgraphs = almost_invariant_subgraphs(b, s, f);
  std::vector<long> power(idx(g.num_edges()), 0);
  for (std::size_t c = 0; c < subgraphs.size(); ++c)
    for (int e : subgraphs[c]) power[idx(e)] = a[c];
  std::vector<EdgePath> im;
  std::vector<int> vmap(idx(g.num_vertices()), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    EdgePath p = Word::reduce({e + 1});
    int k = static_cast<int>(power[idx(e)]);
    if (k > 0) p = f.map_path(p, k);
    int tail = g.edge(e).tail, head = g.edge(e).head;
    auto vk = [&](int v) {
      for (int t = 0; t < k; ++t) v = f.vertex_image(v);
      return v;
    };
    if (vmap[idx(tail)] < 0) vmap[idx(tail)] = vk(tail);
    if (vmap[idx(head)] < 0) vmap[idx(head)] = vk(head);
    im.push_back(std::move(p));
  }
  for (int v = 0; v < g.num_vertices(); ++v)
    if (vmap[idx(v)] < 0) vmap[idx(v)] = v;
  return GraphSelfMap(g, std::move(vmap), std::move(im));
}

DisintegrationReport disintegration_rank(const GraphSelfMap& f, const BCaps& caps) {
  DisintegrationReport rep;
  Stratification s = compute_stratification(f);
  InpSearch inps = find_inps(f, s, caps.inp);
  if (inps.status != Status::pass) {
    rep.status = Status::unknown;
    rep.notes.push_back("INP search hit caps on " + std::to_string(inps.unknown.size()) + " turns");
  }
  rep.graph = build_B(f, s, inps, caps);
  if (rep.graph.status != Status::pass) rep.status = Status::unknown;
  for (const auto& n : rep.graph.notes) rep.notes.push_back(n);
  rep.subgraphs = almost_invariant_subgraphs(rep.graph, s, f);
  rep.lattice = admissible_lattice(f, s, inps, rep.graph, caps.split);
  rep.rank = rep.lattice.rank();
  return rep;
}

}  // namespace fzkit
