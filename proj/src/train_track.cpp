#include "fzkit/train_track.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "fzkit/disintegration.hpp"

namespace fzkit {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::vector<int> all_directions(const MarkedGraph& g) {
  std::vector<int> d;
  for (int e = 0; e < g.num_edges(); ++e) {
    d.push_back(e + 1);
    d.push_back(-(e + 1));
  }
  return d;
}

std::vector<int> partition_by(const MarkedGraph& g, const std::vector<int>& key) {
  std::map<std::pair<int, int>, int> ids;
  std::vector<int> gate(key.size());
  for (int d : all_directions(g)) {
    auto k = std::make_pair(g.origin(d), key[dir_slot(d)]);
    auto it = ids.emplace(k, static_cast<int>(ids.size())).first;
    gate[dir_slot(d)] = it->second;
  }
  return gate;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = ab.emplace(a[i], b[i]).first;
    auto y = ba.emplace(b[i], a[i]).first;
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

std::vector<int> step_keys(const GraphSelfMap& f, const std::vector<int>& key) {
  // key holds Df^k(d) as an oriented edge; advance by one application of Df.
  std::vector<int> next(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) next[i] = key[i] == 0 ? 0 : f.direction_image(key[i]);
  return next;
}

std::string path_text(const MarkedGraph& g, const EdgePath& p) {
  auto s = g.path_str(p);
  return s.empty() ? "(trivial)" : s;
}

bool in_stratum(const Stratification& s, int oe, int r) { return s.stratum_of_edge[idx(edge_index(oe))] == r; }
bool in_filtration(const Stratification& s, int oe, int r) { return s.stratum_of_edge[idx(edge_index(oe))] <= r; }

}  // namespace

// ---- gates ----------------------------------------------------------------

int GateStructure::num_gates_at(const MarkedGraph& g, int v) const {
  std::set<int> ids;
  for (int d : g.directions(v)) ids.insert(gate[dir_slot(d)]);
  return static_cast<int>(ids.size());
}

GateStructure gates(const GraphSelfMap& f) {
  const auto& g = f.graph();
  std::size_t n = idx(2 * g.num_edges());
  std::vector<int> key(n);
  for (int d : all_directions(g)) key[dir_slot(d)] = d;
  GateStructure gs;
  gs.gate = partition_by(g, key);
  bool stable_seen = false;
  for (std::size_t k = 1; k <= n + 1; ++k) {
    key = step_keys(f, key);
    auto next = partition_by(g, key);
    if (!stable_seen && same_partition(next, gs.gate)) {
      gs.refinements = static_cast<int>(k - 1);
      stable_seen = true;
    }
    gs.gate = std::move(next);
  }
  if (!stable_seen) gs.refinements = static_cast<int>(n);
  return gs;
}

bool gates_stable(const GraphSelfMap& f, const GateStructure& gs) {
  const auto& g = f.graph();
  // Merge d, d' whenever Df(d), Df(d') lie in one gate; stable iff nothing merges.
  for (int d1 : all_directions(g))
    for (int d2 : all_directions(g)) {
      if (g.origin(d1) != g.origin(d2) || gs.same_gate(d1, d2)) continue;
      int x = f.direction_image(d1), y = f.direction_image(d2);
      if (x != 0 && y != 0 && gs.same_gate(x, y)) return false;
    }
  return true;
}

int first_illegal_turn(const EdgePath& p, const GateStructure& gs, const Stratification* s, int r) {
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    int d1 = -p[i], d2 = p[i + 1];
    if (s && (!in_stratum(*s, d1, r) || !in_stratum(*s, d2, r))) continue;
    if (gs.same_gate(d1, d2)) return static_cast<int>(i);
  }
  return -1;
}

bool is_legal(const EdgePath& p, const GateStructure& gs) { return first_illegal_turn(p, gs) < 0; }

bool is_r_legal(const EdgePath& p, const GateStructure& gs, const Stratification& s, int r) {
  return first_illegal_turn(p, gs, &s, r) < 0;
}

// ---- RTT ------------------------------------------------------------------

bool RttReport::all_pass() const {
  for (const auto& s : strata)
    if (s.rtt_i.status != Status::pass || s.rtt_ii.status != Status::pass || s.rtt_iii.status != Status::pass) return false;
  return true;
}

RttReport rtt_audit(const GraphSelfMap& f, const Stratification& s, const RttCaps& caps) {
  const auto& g = f.graph();
  GateStructure gs = gates(f);
  RttReport rep;
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind != StratumKind::EG) continue;
    RttReport::PerStratum ps;
    ps.stratum = r;
    ps.rtt_i.status = Status::pass;
    for (int e : st.edges)
      for (int d : {e + 1, -(e + 1)}) {
        int img = f.direction_image(d);
        if (ps.rtt_i.status == Status::pass && (img == 0 || !in_stratum(s, img, r))) {
          ps.rtt_i.status = Status::fail;
          ps.rtt_i.witness = "D f(" + g.edge_name(d) + ") = " + (img ? g.edge_name(img) : "point") + " leaves the stratum";
        }
      }
    // RTT-ii: connecting subpaths in G_{r-1} of iterated edge images stay nontrivial.
    ps.rtt_ii.status = Status::pass;
    ps.rtt_iii.status = Status::pass;
    for (int e : st.edges) {
      EdgePath cur = Word::reduce({e + 1});
      for (int k = 1; k <= caps.iterates; ++k) {
        cur = f.map_path(cur);
        if (cur.size() > 20000) {
          ps.rtt_iii.note = "iterates truncated at length cap";
          break;
        }
        std::size_t i = 0;
        while (i < cur.size()) {
          if (in_stratum(s, cur[i], r) || !in_filtration(s, cur[i], r)) {
            ++i;
            continue;
          }
          std::size_t j = i;
          while (j < cur.size() && !in_stratum(s, cur[j], r) && in_filtration(s, cur[j], r)) ++j;
          bool connecting = i > 0 && j < cur.size();
          if (connecting && ps.rtt_ii.status == Status::pass) {
            EdgePath sigma = cur.subword(i, j - i);
            EdgePath img = sigma;
            for (int t = 0; t < caps.iterates; ++t) {
              img = f.map_path(img);
              if (img.empty()) {
                ps.rtt_ii.status = Status::fail;
                ps.rtt_ii.witness = "connecting path " + path_text(g, sigma) + " maps to a trivial path";
                break;
              }
            }
          }
          i = j;
        }
        int bad = first_illegal_turn(cur, gs, &s, r);
        if (bad >= 0 && ps.rtt_iii.status == Status::pass) {
          ps.rtt_iii.status = Status::fail;
          ps.rtt_iii.witness = "f^" + std::to_string(k) + "(" + g.edge(e).name + ") has illegal turn (" +
                               g.edge_name(-cur[idx(bad)]) + ", " + g.edge_name(cur[idx(bad + 1)]) + ")";
        }
      }
    }
    // Two-edge r-legal paths must have r-legal images.
    for (int d1 : all_directions(g)) {
      if (!in_filtration(s, d1, r)) continue;
      for (int d2 : all_directions(g)) {
        if (!in_filtration(s, d2, r) || d2 == -d1 || g.terminus(d1) != g.origin(d2)) continue;
        if (!in_stratum(s, d1, r) && !in_stratum(s, d2, r)) continue;
        EdgePath p = Word::reduce({d1, d2});
        if (!is_r_legal(p, gs, s, r)) continue;
        EdgePath img = f.map_path(p);
        if (!is_r_legal(img, gs, s, r) && ps.rtt_iii.status == Status::pass) {
          ps.rtt_iii.status = Status::fail;
          ps.rtt_iii.witness = "r-legal path " + path_text(g, p) + " maps to " + path_text(g, img);
        }
      }
    }
    rep.strata.push_back(std::move(ps));
  }
  return rep;
}

// ---- Nielsen paths --------------------------------------------------------

const char* to_string(NielsenKind k) {
  switch (k) {
    case NielsenKind::FixedEdge: return "fixed-edge";
    case NielsenKind::EG: return "EG";
    default: return "NEG-family";
  }
}

namespace {

std::size_t common_prefix(const EdgePath& a, const EdgePath& b) {
  std::size_t n = std::min(a.size(), b.size()), i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

bool prefix_compatible(const EdgePath& a, const EdgePath& b) { return common_prefix(a, b) == std::min(a.size(), b.size()); }

double mu_of(const EdgePath& p, const std::vector<double>& mu) {
  double s = 0;
  for (int oe : p.letters()) s += mu[idx(edge_index(oe))];
  return s;
}

bool is_nielsen(const GraphSelfMap& g, const EdgePath& p) { return !p.empty() && g.map_path(p) == p; }

int minimal_period(const GraphSelfMap& f, const EdgePath& p, int max_period) {
  EdgePath cur = p;
  for (int k = 1; k <= max_period; ++k) {
    cur = f.map_path(cur);
    if (cur == p) return k;
  }
  return 0;
}

struct TurnSearch {
  const GraphSelfMap& g;  // f^p
  const GateStructure& gs;
  const Stratification& s;
  int r;
  double scale;  // lambda^p - 1
  const std::vector<double>& mu;
  const InpCaps& caps;
  std::vector<EdgePath> found;
  bool capped = false;

  void run(int e1, int e2) {
    struct Branch {
      EdgePath a, b;
      int depth;
    };
    std::vector<Branch> stack{{Word::reduce({e1}), Word::reduce({e2}), 0}};
    long nodes = 0;
    const auto& graph = g.graph();
    while (!stack.empty()) {
      Branch br = std::move(stack.back());
      stack.pop_back();
      if (++nodes > 200000 || br.depth > caps.depth || static_cast<int>(br.a.size()) > caps.path_length ||
          static_cast<int>(br.b.size()) > caps.path_length) {
        capped = true;
        continue;
      }
      EdgePath ia = g.map_path(br.a), ib = g.map_path(br.b);
      std::size_t c = common_prefix(ia, ib);
      if (c == ia.size() || c == ib.size()) {
        bool extend_a = c == ia.size();
        const EdgePath& side = extend_a ? br.a : br.b;
        int last = side.back();
        for (int x : graph.directions(graph.terminus(last))) {
          if (x == -last || !in_filtration(s, x, r)) continue;
          if (in_stratum(s, x, r) && in_stratum(s, -last, r) && gs.same_gate(-last, x)) continue;
          EdgePath ext = side * Word::reduce({x});
          stack.push_back(extend_a ? Branch{ext, br.b, br.depth + 1} : Branch{br.a, ext, br.depth + 1});
        }
        continue;
      }
      EdgePath a = ia.subword(c, ia.size() - c), b = ib.subword(c, ib.size() - c);
      if (!prefix_compatible(a, br.a) || !prefix_compatible(b, br.b)) continue;
      double bound = mu_of(ia.subword(0, c), mu) / scale;
      double tol = 1e-9 * (1 + bound);
      if (mu_of(br.a, mu) > bound + tol || mu_of(br.b, mu) > bound + tol) continue;
      EdgePath na = a.size() > br.a.size() ? a : br.a;
      EdgePath nb = b.size() > br.b.size() ? b : br.b;
      if (na == br.a && nb == br.b) {
        EdgePath rho = br.a.inverse() * br.b;
        if (rho.size() == br.a.size() + br.b.size() && g.map_path(rho) == rho) found.push_back(rho);
        continue;
      }
      stack.push_back({na, nb, br.depth + 1});
    }
  }
};

EdgePath unoriented_min(const EdgePath& p) { return std::min(p, p.inverse()); }

}  // namespace

InpSearch find_inps(const GraphSelfMap& f, const Stratification& s, const InpCaps& caps) {
  const auto& g = f.graph();
  InpSearch out;
  std::set<EdgePath> seen;
  // Fixed edges.
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind == StratumKind::NEGFixed) {
      NielsenPathRecord rec;
      rec.path = Word::reduce({st.edges[0] + 1});
      rec.height = r;
      rec.kind = NielsenKind::FixedEdge;
      out.records.push_back(rec);
    }
  }
  // Linear families E_i w^k ~E_j with equal exponents over a common axis.
  for (int i = 0; i < static_cast<int>(s.strata.size()); ++i)
    for (int j = i; j < static_cast<int>(s.strata.size()); ++j) {
      const auto& a = s.strata[idx(i)];
      const auto& b = s.strata[idx(j)];
      if (a.kind != StratumKind::NEGLinear || b.kind != StratumKind::NEGLinear) continue;
      if (a.axis != b.axis || a.exponent != b.exponent) continue;
      if (g.terminus(a.oriented_edge) != g.terminus(b.oriented_edge)) continue;
      NielsenPathRecord rec;
      rec.path = Word::reduce({a.oriented_edge}) * a.axis * Word::reduce({-b.oriented_edge});
      rec.height = j;
      rec.kind = NielsenKind::NEGFamily;
      rec.note = "E w^k ~E for every k != 0";
      out.records.push_back(rec);
    }
  // EG strata: unfold every illegal turn, for each period.
  GateStructure gs = gates(f);
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind != StratumKind::EG) continue;
    std::vector<double> mu(idx(g.num_edges()), 0.0);
    for (std::size_t k = 0; k < st.edges.size(); ++k) mu[idx(st.edges[k])] = st.lengths[k];
    std::vector<int> dirs;
    for (int e : st.edges) {
      dirs.push_back(e + 1);
      dirs.push_back(-(e + 1));
    }
    GraphSelfMap fp = f;
    for (int p = 1; p <= caps.period; ++p) {
      if (p > 1) fp = f.compose(fp);
      for (std::size_t x = 0; x < dirs.size(); ++x)
        for (std::size_t y = x + 1; y < dirs.size(); ++y) {
          int d1 = dirs[x], d2 = dirs[y];
          if (g.origin(d1) != g.origin(d2) || !gs.same_gate(d1, d2)) continue;
          TurnSearch ts{fp, gs, s, r, std::pow(st.lambda, p) - 1.0, mu, caps, {}, false};
          ts.run(d1, d2);
          if (ts.capped) {
            out.unknown.push_back("stratum " + std::to_string(r) + " turn (" + g.edge_name(d1) + ", " + g.edge_name(d2) +
                                  ") period " + std::to_string(p));
            out.status = Status::unknown;
          }
          for (const auto& rho : ts.found) {
            EdgePath key = unoriented_min(rho);
            if (seen.count(key)) continue;
            int period = minimal_period(f, rho, p);
            if (period != p) continue;  // reported at its own period
            seen.insert(key);
            NielsenPathRecord rec;
            rec.path = rho;
            rec.period = period;
            rec.height = r;
            rec.kind = NielsenKind::EG;
            rec.indivisible = true;
            for (std::size_t i = 1; i < rho.size() && rec.indivisible; ++i)
              if (is_nielsen(fp, rho.subword(0, i))) rec.indivisible = false;
            out.records.push_back(rec);
          }
        }
    }
  }
  return out;
}

// ---- CT audit ---------------------------------------------------------------

std::vector<std::pair<std::string, const AxiomResult*>> CtAuditReport::axioms() const {
  return {{"Rotationless", &rotationless},       {"CompletelySplit", &completely_split}, {"Filtration", &filtration},
          {"Vertices", &vertices},               {"PeriodicEdges", &periodic_edges},     {"ZeroStrata", &zero_strata},
          {"LinearEdges", &linear_edges},        {"NEGNielsenPaths", &neg_nielsen_paths}};
}

bool CtAuditReport::all_pass() const {
  for (const auto& [name, a] : axioms())
    if (a->status != Status::pass) return false;
  return rtt.all_pass();
}

namespace {

void fail(AxiomResult& a, const std::string& w) {
  if (a.status == Status::fail) return;
  a.status = Status::fail;
  a.witness = w;
}

// Edges of the core of a subgraph: strip edges with a valence-one endpoint.
std::set<int> core_edges(const MarkedGraph& g, std::set<int> edges) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<int, int> deg;
    for (int e : edges) {
      ++deg[g.edge(e).tail];
      ++deg[g.edge(e).head];
    }
    for (auto it = edges.begin(); it != edges.end();) {
      const auto& ed = g.edge(*it);
      if (deg[ed.tail] == 1 || deg[ed.head] == 1) {
        it = edges.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return edges;
}

std::set<int> vertices_of(const MarkedGraph& g, const std::vector<int>& edges) {
  std::set<int> v;
  for (int e : edges) {
    v.insert(g.edge(e).tail);
    v.insert(g.edge(e).head);
  }
  return v;
}

}  // namespace

CtAuditReport ct_audit(const GraphSelfMap& f, const Stratification& s, const CtCaps& caps) {
  const auto& g = f.graph();
  CtAuditReport rep;
  rep.rtt = rtt_audit(f, s, RttCaps{std::min(caps.iterates, 4)});
  InpSearch inps = find_inps(f, s, caps.inp);

  // Rotationless: periodic vertices and directions are fixed; periodic Nielsen paths have period one.
  rep.rotationless.status = Status::pass;
  for (int v = 0; v < g.num_vertices(); ++v) {
    int w = v;
    for (int k = 1; k <= caps.iterates; ++k) {
      w = f.vertex_image(w);
      if (w == v) {
        if (k > 1) fail(rep.rotationless, "vertex " + std::to_string(v) + " has period " + std::to_string(k));
        break;
      }
    }
  }
  for (int e = 0; e < g.num_edges(); ++e)
    for (int d : {e + 1, -(e + 1)}) {
      int x = d;
      for (int k = 1; k <= caps.iterates && x != 0; ++k) {
        x = f.direction_image(x);
        if (x == d) {
          if (k > 1) fail(rep.rotationless, "direction " + g.edge_name(d) + " has period " + std::to_string(k));
          break;
        }
      }
    }
  for (const auto& rec : inps.records)
    if (rec.period > 1) fail(rep.rotationless, "Nielsen path " + g.path_str(rec.path) + " has period " + std::to_string(rec.period));
  if (rep.rotationless.status == Status::pass) rep.rotationless.note = "periods checked up to " + std::to_string(caps.iterates);

  // Completely split images of edges in irreducible strata.
  rep.completely_split.status = Status::pass;
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind == StratumKind::Zero || st.kind == StratumKind::NEGFixed) continue;
    for (int e : st.edges) {
      EdgePath img = f.image(e + 1);
      SplitCaps sc;
      sc.verify_iterates = caps.split_iterates;
      sc.retries = 0;
      SplitResult sr = complete_split(f, s, inps, img, sc);
      if (sr.status == Status::fail) {
        fail(rep.completely_split, "f(" + g.edge(e).name + ") = " + g.path_str(img) + ": " + sr.note);
      } else if (sr.status == Status::unknown && rep.completely_split.status == Status::pass) {
        rep.completely_split.status = Status::unknown;
        rep.completely_split.note = "f(" + g.edge(e).name + ") not split within caps";
      }
    }
  }

  // Filtration: the core of each filtration element is a filtration element.
  rep.filtration.status = Status::pass;
  std::vector<std::set<int>> levels;
  for (int i = 0; i < static_cast<int>(s.strata.size()); ++i) {
    auto fe = s.filtration_edges(i);
    levels.emplace_back(fe.begin(), fe.end());
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto c = core_edges(g, levels[i]);
    if (c.empty()) continue;
    if (std::find(levels.begin(), levels.end(), c) == levels.end())
      fail(rep.filtration, "core of G_" + std::to_string(i) + " is not a filtration element");
  }

  // Vertices: ends of fixed edges and terminal ends of nonfixed NEG edges are fixed.
  rep.vertices.status = Status::pass;
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind == StratumKind::NEGFixed) {
      const auto& ed = g.edge(st.edges[0]);
      for (int v : {ed.tail, ed.head})
        if (f.vertex_image(v) != v) fail(rep.vertices, "endpoint " + std::to_string(v) + " of fixed edge " + ed.name + " moves");
    } else if (st.is_neg()) {
      int v = g.terminus(st.oriented_edge);
      if (f.vertex_image(v) != v)
        fail(rep.vertices, "terminal vertex of NEG edge " + g.edge_name(st.oriented_edge) + " is not fixed");
    }
  }

  // Periodic edges: fixed, and a non-loop fixed edge sits on a core lower filtration element.
  rep.periodic_edges.status = Status::pass;
  for (int e = 0; e < g.num_edges(); ++e) {
    EdgePath cur = Word::reduce({e + 1});
    for (int k = 1; k <= caps.iterates; ++k) {
      cur = f.map_path(cur);
      if (cur.size() == 1 && edge_index(cur[0]) == e) {
        if (k > 1 || cur[0] != e + 1) fail(rep.periodic_edges, "edge " + g.edge(e).name + " is periodic but not fixed");
        break;
      }
      if (cur.size() > 1) break;
    }
  }
  for (int r = 0; r < static_cast<int>(s.strata.size()); ++r) {
    const auto& st = s.strata[idx(r)];
    if (st.kind != StratumKind::NEGFixed) continue;
    const auto& ed = g.edge(st.edges[0]);
    if (ed.tail == ed.head) continue;
    if (r == 0) {
      fail(rep.periodic_edges, "fixed edge " + ed.name + " is not a loop and has no lower filtration element");
      continue;
    }
    auto lower = levels[idx(r - 1)];
    auto c = core_edges(g, lower);
    auto cv = vertices_of(g, {c.begin(), c.end()});
    if (c != lower) fail(rep.periodic_edges, "G_" + std::to_string(r - 1) + " below fixed edge " + ed.name + " is not a core graph");
    if (!cv.count(ed.tail) || !cv.count(ed.head))
      fail(rep.periodic_edges, "fixed edge " + ed.name + " has an endpoint outside the lower core");
  }

  // Zero strata: enveloped by an EG stratum, edges taken, links inside H_i u H_r.
  rep.zero_strata.status = Status::pass;
  for (int i = 0; i < static_cast<int>(s.strata.size()); ++i) {
    const auto& st = s.strata[idx(i)];
    if (st.kind != StratumKind::Zero) continue;
    int env = -1;
    for (int r = i + 1; r < static_cast<int>(s.strata.size()) && env < 0; ++r) {
      if (s.strata[idx(r)].kind != StratumKind::EG) continue;
      for (int e : s.strata[idx(r)].edges) {
        EdgePath cur = Word::reduce({e + 1});
        for (int k = 1; k <= caps.iterates && env < 0; ++k) {
          cur = f.map_path(cur);
          for (int oe : cur.letters())
            if (edge_index(oe) == st.edges[0]) env = r;
          if (cur.size() > 20000) break;
        }
      }
    }
    const auto& ed = g.edge(st.edges[0]);
    if (env < 0) {
      fail(rep.zero_strata, "zero edge " + ed.name + " is not taken by any EG stratum above it");
      continue;
    }
    for (int v : {ed.tail, ed.head})
      for (int d : g.directions(v)) {
        int k = s.stratum_of_edge[idx(edge_index(d))];
        if (k != env && s.strata[idx(k)].kind != StratumKind::Zero)
          fail(rep.zero_strata, "link of vertex " + std::to_string(v) + " on zero edge " + ed.name + " meets " + g.edge_name(d));
      }
  }

  // Linear edges: exact pattern f(E) = E w^d with w a closed root-free Nielsen path.
  rep.linear_edges.status = Status::pass;
  for (int i = 0; i < static_cast<int>(s.strata.size()); ++i) {
    const auto& a = s.strata[idx(i)];
    if (a.kind != StratumKind::NEGLinear) continue;
    EdgePath expect = Word::reduce({a.oriented_edge}) * a.axis.pow(a.exponent);
    if (f.image(a.oriented_edge) != expect || f.map_path(a.axis) != a.axis || CyclicWord(a.axis).is_proper_power())
      fail(rep.linear_edges, "edge " + g.edge_name(a.oriented_edge) + " does not match E w^d");
    for (int j = i + 1; j < static_cast<int>(s.strata.size()); ++j) {
      const auto& b = s.strata[idx(j)];
      if (b.kind != StratumKind::NEGLinear) continue;
      if (axis_class(a.axis) == axis_class(b.axis)) {
        if (a.axis != b.axis)
          fail(rep.linear_edges, "edges " + g.edge_name(a.oriented_edge) + " and " + g.edge_name(b.oriented_edge) + " share an axis with different base points");
        else if (a.exponent == b.exponent)
          fail(rep.linear_edges, "edges " + g.edge_name(a.oriented_edge) + " and " + g.edge_name(b.oriented_edge) + " share axis and exponent");
      }
    }
  }

  // NEG Nielsen paths: NEG-height records must be E w^k ~E.
  rep.neg_nielsen_paths.status = Status::pass;
  for (const auto& rec : inps.records) {
    if (rec.kind != NielsenKind::NEGFamily) continue;
    int first = rec.path.front(), last = rec.path.back();
    if (first != -last) fail(rep.neg_nielsen_paths, "Nielsen path " + g.path_str(rec.path) + " joins two distinct linear edges");
  }
  if (inps.status == Status::unknown && rep.neg_nielsen_paths.status == Status::pass) rep.neg_nielsen_paths.note = "EG search hit caps";
  return rep;
}

}  // namespace fzkit

// ---- improvement moves ------------------------------------------------------

namespace fzkit {

namespace {

double spectral_radius(const IntMatrix& m) {
  std::size_t n = m.size();
  if (n == 0) return 0;
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  double lam = 0;
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = v[i];
      for (std::size_t j = 0; j < n; ++j) w[i] += static_cast<double>(m[i][j]) * v[j];
    }
    double s = 0;
    for (double x : w) s += x;
    double next = s - 1.0;
    for (double& x : w) x /= s;
    v = std::move(w);
    if (std::abs(next - lam) < 1e-13 * (1 + next)) return next;
    lam = next;
  }
  return lam;
}

using Sub = std::vector<std::vector<int>>;  // per dir_slot of the old graph: replacement letters

EdgePath substitute(const EdgePath& p, const Sub& sub) {
  std::vector<int> raw;
  for (int oe : p.letters())
    for (int x : sub[dir_slot(oe)]) raw.push_back(x);
  return Word::reduce(raw);
}

// Contract a non-loop edge whose image is trivial.
GraphSelfMap collapse_edge(const GraphSelfMap& f, int e) {
  const auto& g = f.graph();
  int u = g.edge(e).tail, w = g.edge(e).head;
  Word m = g.edge(e).marking;
  auto renum = [&](int v) {
    if (v == w) v = u;
    return v > w ? v - 1 : v;
  };
  std::vector<GraphEdge> edges;
  Sub sub(idx(2 * g.num_edges()));
  for (int i = 0; i < g.num_edges(); ++i) {
    if (i == e) continue;
    GraphEdge ed = g.edge(i);
    if (ed.tail == w) ed.marking = m * ed.marking;
    if (ed.head == w) ed.marking = ed.marking * m.inverse();
    ed.tail = renum(ed.tail);
    ed.head = renum(ed.head);
    int ni = static_cast<int>(edges.size());
    sub[dir_slot(i + 1)] = {ni + 1};
    sub[dir_slot(-(i + 1))] = {-(ni + 1)};
    edges.push_back(std::move(ed));
  }
  int base = renum(g.base());
  MarkedGraph ng(g.rank(), g.num_vertices() - 1, std::move(edges), base);
  std::vector<int> vmap;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (v != w) vmap.push_back(renum(f.vertex_image(v)));
  std::vector<EdgePath> im;
  bool collapse = false;
  for (int i = 0; i < g.num_edges(); ++i) {
    if (i == e) continue;
    im.push_back(substitute(f.image(i + 1), sub));
    collapse = collapse || im.back().empty();
  }
  return GraphSelfMap(std::move(ng), std::move(vmap), std::move(im), collapse);
}

GraphSelfMap collapse_trivial(GraphSelfMap f) {
  for (bool again = true; again;) {
    again = false;
    for (int i = 0; i < f.graph().num_edges(); ++i)
      if (f.image(i + 1).empty() && f.graph().edge(i).tail != f.graph().edge(i).head) {
        f = collapse_edge(f, i);
        again = true;
        break;
      }
  }
  for (int i = 0; i < f.graph().num_edges(); ++i)
    if (f.image(i + 1).empty()) throw PreconditionFailed("loop with trivial image");
  return f;
}

// Full fold: f(d1) is an initial segment of f(d2), and d2 becomes d1 followed by a new d2.
std::optional<GraphSelfMap> full_fold(const GraphSelfMap& f, int d1, int d2) {
  const auto& g = f.graph();
  int e2 = edge_index(d2);
  std::vector<GraphEdge> edges = g.edges();
  Word m1 = g.read(Word::reduce({d1}));
  if (d2 > 0) {
    edges[idx(e2)].tail = g.terminus(d1);
    edges[idx(e2)].marking = m1.inverse() * edges[idx(e2)].marking;
  } else {
    edges[idx(e2)].head = g.terminus(d1);
    edges[idx(e2)].marking = edges[idx(e2)].marking * m1;
  }
  Sub sub(idx(2 * g.num_edges()));
  for (int i = 0; i < g.num_edges(); ++i) {
    sub[dir_slot(i + 1)] = {i + 1};
    sub[dir_slot(-(i + 1))] = {-(i + 1)};
  }
  sub[dir_slot(d2)] = {d1, d2};
  sub[dir_slot(-d2)] = {-d2, -d1};
  try {
    MarkedGraph ng(g.rank(), g.num_vertices(), std::move(edges), g.base());
    std::vector<EdgePath> im;
    bool collapse = false;
    for (int i = 0; i < g.num_edges(); ++i) {
      EdgePath p = i == e2 ? substitute(f.image(d1).inverse() * f.image(d2), sub) : substitute(f.image(i + 1), sub);
      if (i == e2 && d2 < 0) p = p.inverse();
      collapse = collapse || p.empty();
      im.push_back(std::move(p));
    }
    return collapse_trivial(GraphSelfMap(std::move(ng), f.vertex_images(), std::move(im), collapse));
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Replace the two edges at a valence-two vertex v by their concatenation.
std::optional<GraphSelfMap> erase_valence_two(const GraphSelfMap& f, int v) {
  const auto& g = f.graph();
  auto dirs = g.directions(v);
  if (dirs.size() != 2 || edge_index(dirs[0]) == edge_index(dirs[1])) return std::nullopt;
  for (int x : f.vertex_images())
    if (x == v) return std::nullopt;
  int d1 = dirs[0], d2 = dirs[1];
  int e1 = edge_index(d1), e2 = edge_index(d2);
  auto renum = [&](int x) { return x > v ? x - 1 : x; };
  std::vector<GraphEdge> edges;
  std::vector<int> newid(idx(g.num_edges()), -1);
  for (int i = 0; i < g.num_edges(); ++i) {
    if (i == e2) continue;
    GraphEdge ed = g.edge(i);
    if (i == e1) {
      ed.name = g.edge(e1).name + g.edge(e2).name;
      ed.tail = g.terminus(d1);
      ed.head = g.terminus(d2);
      ed.marking = g.read(Word::reduce({-d1})) * g.read(Word::reduce({d2}));
    }
    ed.tail = renum(ed.tail);
    ed.head = renum(ed.head);
    newid[idx(i)] = static_cast<int>(edges.size());
    edges.push_back(std::move(ed));
  }
  int joined = newid[idx(e1)] + 1;
  auto rewrite = [&](const EdgePath& p) -> std::optional<EdgePath> {
    std::vector<int> raw;
    const auto& l = p.letters();
    for (std::size_t i = 0; i < l.size(); ++i) {
      int x = l[i], k = edge_index(x);
      if (k != e1 && k != e2) {
        raw.push_back(x > 0 ? newid[idx(k)] + 1 : -(newid[idx(k)] + 1));
        continue;
      }
      if (i + 1 >= l.size()) return std::nullopt;
      int y = l[i + 1];
      if (x == -d1 && y == d2) raw.push_back(joined);
      else if (x == -d2 && y == d1) raw.push_back(-joined);
      else return std::nullopt;
      ++i;
    }
    return Word::reduce(raw);
  };
  try {
    MarkedGraph ng(g.rank(), g.num_vertices() - 1, std::move(edges), g.base() == v ? 0 : renum(g.base()));
    std::vector<int> vmap;
    for (int x = 0; x < g.num_vertices(); ++x)
      if (x != v) vmap.push_back(renum(f.vertex_image(x)));
    std::vector<EdgePath> im;
    for (int i = 0; i < g.num_edges(); ++i) {
      if (i == e2) continue;
      EdgePath src = i == e1 ? f.map_path(Word::reduce({-d1, d2})) : f.image(i + 1);
      auto p = rewrite(src);
      if (!p) return std::nullopt;
      im.push_back(std::move(*p));
    }
    return GraphSelfMap(std::move(ng), std::move(vmap), std::move(im));
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_train_track(const GraphSelfMap& f) {
  GateStructure gs = gates(f);
  const auto& g = f.graph();
  for (int v = 0; v < g.num_vertices(); ++v)
    if (gs.num_gates_at(g, v) < 2) return false;
  for (int e = 0; e < g.num_edges(); ++e) {
    EdgePath img = f.image(e + 1);
    if (!is_legal(img, gs)) return false;
  }
  return true;
}

}  // namespace

ImproveResult bh_improve(const GraphSelfMap& f0, int budget) {
  ImproveResult res{f0, {}, false, false, {}};
  auto key = [](const GraphSelfMap& f) { return std::make_pair(spectral_radius(f.transition_matrix()), f.graph().num_edges()); };
  auto better = [](std::pair<double, int> a, std::pair<double, int> b) {
    if (a.first < b.first - 1e-9) return true;
    return std::abs(a.first - b.first) <= 1e-9 && a.second < b.second;
  };
  for (int step = 0;; ++step) {
    const auto& f = res.map;
    if (is_train_track(f)) {
      res.train_track = true;
      return res;
    }
    if (!is_irreducible(f.transition_matrix())) {
      auto st = compute_stratification(f);
      std::string edges;
      for (int e : st.strata[0].edges) edges += (edges.empty() ? "" : " ") + f.graph().edge(e).name;
      res.reducible = "invariant subgraph {" + edges + "}";
      return res;
    }
    if (step >= budget) {
      res.budget_exhausted = true;
      return res;
    }
    auto cur = key(f);
    std::optional<GraphSelfMap> next;
    std::string move;
    const auto& g = f.graph();
    for (int v = 0; v < g.num_vertices() && !next; ++v) {
      auto cand = erase_valence_two(f, v);
      if (cand && better(key(*cand), cur)) {
        next = std::move(cand);
        move = "erase valence-two vertex " + std::to_string(v);
      }
    }
    for (int v = 0; v < g.num_vertices() && !next; ++v) {
      auto dirs = g.directions(v);
      for (int d1 : dirs) {
        for (int d2 : dirs) {
          if (d1 == d2 || edge_index(d1) == edge_index(d2)) continue;
          EdgePath i1 = f.image(d1), i2 = f.image(d2);
          if (i1.size() > i2.size() || i2.subword(0, i1.size()) != i1) continue;
          auto cand = full_fold(f, d1, d2);
          if (cand && better(key(*cand), cur)) {
            next = std::move(cand);
            move = "fold " + g.edge_name(d2) + " over " + g.edge_name(d1);
            break;
          }
        }
        if (next) break;
      }
    }
    if (!next) return res;
    res.moves.push_back(move);
    res.map = std::move(*next);
  }
}

}  // namespace fzkit
