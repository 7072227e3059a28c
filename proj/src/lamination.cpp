#include "fzkit/lamination.hpp"

#include <cstdlib>
#include <set>
#include <tuple>
#include <algorithm>

#include "fzkit/disintegration.hpp"
#include "fzkit/train_track.hpp"

namespace fzkit {

const char* to_string(FillingVerdict v) {
  switch (v) {
    case FillingVerdict::FillingEvidence: return "FillingEvidence";
    case FillingVerdict::NotFilling: return "NotFilling";
    case FillingVerdict::ZFillingEvidence: return "ZFillingEvidence";
    case FillingVerdict::NotZFilling: return "NotZFilling";
    default: return "Inconclusive";
  }
}

int default_seed_edge(const Stratification& s) {
  int r = s.top_eg();
  if (r < 0) return -1;
  return s.strata[static_cast<std::size_t>(r)].edges.front();
}

LeafSegment leaf_segment(const GraphSelfMap& f, const Stratification& s, int edge, int k) {
  if (edge < 0 || edge >= f.graph().num_edges()) throw PreconditionFailed("no edge " + std::to_string(edge));
  int st = s.stratum_of_edge[static_cast<std::size_t>(edge)];
  if (s.strata[static_cast<std::size_t>(st)].kind != StratumKind::EG)
    throw PreconditionFailed("edge " + f.graph().edge_name(oriented(edge)) + " is not in an EG stratum");
  if (k < 0) throw PreconditionFailed("negative iterate");
  LeafSegment seg;
  seg.path = f.map_path(Word::reduce({oriented(edge)}), k);
  seg.seed_edge = edge;
  seg.iterate = k;
  seg.stratum = st;
  return seg;
}

LeafSegment longest_leaf_segment(const GraphSelfMap& f, const Stratification& s, int edge, int max_iterate,
                                 std::size_t max_length) {
  LeafSegment seg = leaf_segment(f, s, edge, 0);
  while (seg.iterate < max_iterate) {
    EdgePath next = f.map_path(seg.path);
    if (next.size() > max_length) break;
    seg.path = next;
    ++seg.iterate;
  }
  return seg;
}

bool carried_by(const CoreGraph& ga, const MarkedGraph& g, const LeafSegment& seg) {
  CoreGraph c = ga.cyclic_core();
  if (c.num_vertices() == 0) return false;
  return c.immerses_segment(g.read(seg.path));
}

// ---- fixed classes ----------------------------------------------------------

namespace {

using Matrix = std::vector<std::vector<long>>;

std::optional<Matrix> mul(const Matrix& a, const Matrix& b) {
  std::size_t n = a.size();
  Matrix c(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        long t;
        if (__builtin_mul_overflow(a[i][k], b[k][j], &t) || __builtin_add_overflow(c[i][j], t, &c[i][j]))
          return std::nullopt;
      }
  return c;
}

// Linear conditions on the exponent vector of a class fixed by phi^k.
struct Constraint {
  bool usable = false;    // false: no pruning (overflow or B = 0)
  bool injective = false;  // B v = 0 forces v = 0
  Matrix rows;
  std::vector<long> row_max;
};

class ClassSearch {
 public:
  ClassSearch(const FreeAutomorphism& phi, int length, int powers, std::size_t budget)
      : n_(phi.rank()), length_(length), budget_(budget) {
    auto a = abelianize(phi);
    Matrix m(static_cast<std::size_t>(n_), std::vector<long>(static_cast<std::size_t>(n_)));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    std::optional<Matrix> pk = m;
    FreeAutomorphism cur = phi;
    for (int k = 1; k <= powers; ++k) {
      powers_.push_back(cur);
      std::vector<std::vector<Letter>> imgs;
      for (int key = 0; key < 2 * n_; ++key) imgs.push_back(cur.apply(Word::reduce({letter_from_key(key)})).letters());
      images_.push_back(std::move(imgs));
      cur = compose(phi, cur);
      Constraint c;
      if (pk) {
        Matrix b = *pk;
        for (int i = 0; i < n_; ++i) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -= 1;
        std::vector<std::vector<BigInt>> big;
        for (const auto& row : b) {
          bool zero = true;
          long mx = 0;
          for (long x : row) {
            zero = zero && x == 0;
            mx = std::max(mx, std::labs(x));
          }
          if (zero) continue;
          c.rows.push_back(row);
          c.row_max.push_back(mx);
          big.emplace_back(row.begin(), row.end());
        }
        c.usable = !c.rows.empty();
        c.injective = c.usable && integer_kernel(big, n_).empty();
        pk = mul(*pk, m);
      }
      cons_.push_back(std::move(c));
    }
    exp_.assign(static_cast<std::size_t>(n_), 0);
  }

  FixedClassSearch run() {
    FixedClassSearch out;
    out.length_cap = length_;
    out.power_cap = static_cast<int>(powers_.size());
    if (n_ > 0 && !powers_.empty()) dfs(out);
    std::stable_sort(out.classes.begin(), out.classes.end(),
                     [](const FixedClass& x, const FixedClass& y) { return x.word.size() < y.word.size(); });
    return out;
  }

 private:
  bool feasible(long remaining) const {
    for (const auto& c : cons_) {
      if (!c.usable) return true;
      bool ok = true;
      if (c.injective) ok = l1_ <= remaining;
      for (std::size_t r = 0; ok && r < c.rows.size(); ++r) {
        long dot = 0;
        for (std::size_t j = 0; j < exp_.size(); ++j) dot += c.rows[r][j] * exp_[j];
        ok = std::labs(dot) <= remaining * c.row_max[r];
      }
      if (ok) return true;
    }
    return false;
  }

  bool satisfies(const Constraint& c) const {
    if (!c.usable) return true;
    for (const auto& row : c.rows) {
      long dot = 0;
      for (std::size_t j = 0; j < exp_.size(); ++j) dot += row[j] * exp_[j];
      if (dot != 0) return false;
    }
    return true;
  }

  // Cyclic length of phi^(k+1)(word_) by stack reduction into a reused buffer.
  std::size_t image_cyclic_length(std::size_t k) {
    buf_.clear();
    for (Letter x : word_)
      for (Letter y : images_[k][static_cast<std::size_t>(letter_key(x))]) {
        if (!buf_.empty() && buf_.back() == -y) buf_.pop_back();
        else buf_.push_back(y);
      }
    std::size_t i = 0, j = buf_.size();
    while (j - i >= 2 && buf_[i] == -buf_[j - 1]) {
      ++i;
      --j;
    }
    return j - i;
  }

  // Some rotation of the current prefix is already smaller than the prefix itself.
  bool rotation_smaller() const {
    std::size_t d = word_.size();
    for (std::size_t i = 1; i < d; ++i)
      for (std::size_t j = 0; i + j < d; ++j) {
        int a = letter_key(word_[i + j]), b = letter_key(word_[j]);
        if (a < b) return true;
        if (a > b) break;
      }
    return false;
  }

  void visit(FixedClassSearch& out) {
    std::size_t d = word_.size();
    if (d > 1 && word_.front() == -word_.back()) return;
    bool necklace = false;
    for (std::size_t k = 0; k < powers_.size(); ++k) {
      if (!satisfies(cons_[k])) continue;
      if (!necklace) {
        if (least_rotation(word_) != 0) return;
        necklace = true;
      }
      ++out.candidates;
      if (image_cyclic_length(k) != d) continue;
      CyclicWord cw(Word::reduce(word_));
      if (powers_[k].apply(cw) == cw) {
        out.classes.push_back({static_cast<int>(k) + 1, cw});
        return;
      }
    }
  }

  void dfs(FixedClassSearch& out) {
    if (!out.complete) return;
    for (int key = 0; key < 2 * n_; ++key) {
      if (++out.nodes > budget_) {
        out.complete = false;
        return;
      }
      Letter x = letter_from_key(key);
      if (!word_.empty() && word_.back() == -x) continue;
      word_.push_back(x);
      long& e = exp_[static_cast<std::size_t>(gen_index(x))];
      long before = e;
      e += x > 0 ? 1 : -1;
      l1_ += std::labs(e) - std::labs(before);
      long remaining = length_ - static_cast<long>(word_.size());
      if (!rotation_smaller() && feasible(remaining)) {
        visit(out);
        if (remaining > 0) dfs(out);
      }
      l1_ -= std::labs(e) - std::labs(before);
      e = before;
      word_.pop_back();
    }
  }

  int n_;
  long length_;
  std::size_t budget_;
  std::vector<FreeAutomorphism> powers_;
  std::vector<std::vector<std::vector<Letter>>> images_;  // [k][letter key]
  std::vector<Letter> buf_;
  std::vector<Constraint> cons_;
  std::vector<Letter> word_;
  std::vector<long> exp_;
  long l1_ = 0;
};

}  // namespace

FixedClassSearch fixed_class_search(const FreeAutomorphism& phi, int length_cap, int power_cap, std::size_t node_budget) {
  return ClassSearch(phi, std::max(0, length_cap), std::max(0, power_cap), node_budget).run();
}

// ---- filling report ---------------------------------------------------------

namespace {

// Cyclic closures of interior windows of a leaf segment. The closure of the
// whole of f^k(E) is the image of a primitive element, so it says nothing.
std::vector<CyclicWord> leaf_windows(const Word& w) {
  std::vector<CyclicWord> out;
  std::size_t n = w.size();
  for (auto [num, den, span] : {std::tuple{1, 4, 2}, std::tuple{1, 8, 5}, std::tuple{1, 3, 1}}) {
    std::size_t start = n * static_cast<std::size_t>(num) / static_cast<std::size_t>(den);
    std::size_t len = n * static_cast<std::size_t>(span) / static_cast<std::size_t>(den == 3 ? 3 : 4);
    if (start + len > n) len = n - start;
    while (len > 1 && w[start] == -w[start + len - 1]) --len;
    if (len == 0) continue;
    CyclicWord c(w.subword(start, len));
    if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  if (out.empty() && !w.empty()) out.push_back(CyclicWord(w));
  return out;
}

bool leaf_in_vertex_group(const OneEdgeSplitting& s, const MarkedGraph& g, const LeafSegment& leaf) {
  if (carried_by(CoreGraph::from_generators(s.v1, s.rank), g, leaf)) return true;
  return s.variant == SplitVariant::Amalgam && carried_by(CoreGraph::from_generators(s.v2, s.rank), g, leaf);
}

}  // namespace

FillingReport filling_report(const GraphSelfMap& f, const FreeAutomorphism& phi,
                             const std::vector<OneEdgeSplitting>& splittings, const FillingCaps& caps) {
  FillingReport rep;
  rep.caps = caps;
  const MarkedGraph& g = f.graph();
  auto s = compute_stratification(f);
  int r = s.top_eg();
  if (r < 0) {
    rep.overall = FillingVerdict::NotFilling;
    rep.witness = "no EG stratum";
    return rep;
  }
  rep.leaf = longest_leaf_segment(f, s, default_seed_edge(s), caps.leaf_iterate, caps.leaf_length);
  rep.free_factor = free_factor_carrier_test(leaf_windows(g.read(rep.leaf.path)), g.rank(), caps.whitehead);
  if (rep.free_factor->kind == CarrierKind::CarriedByProperFactor) {
    rep.overall = FillingVerdict::NotFilling;
    rep.factor_basis = rep.free_factor->factor_basis;
    rep.witness = "leaf closure carried by a proper free factor";
    rep.notes.push_back("fixed-class search skipped: a free factor already carries the leaf");
    return rep;
  }
  auto examine = [&](const OneEdgeSplitting& sp) {
    VertexGroupCarrying vc;
    vc.splitting = sp;
    vc.carried = leaf_in_vertex_group(sp, g, rep.leaf);
    if (auto inv = invariant_splitting_search(phi, sp, caps.splitting_power)) vc.invariant_power = inv->power;
    rep.vertex_groups.push_back(vc);
    if (!vc.carried || sp.tag() == EdgeClass::Cyclic) return false;
    rep.overall = FillingVerdict::NotZFilling;
    rep.splitting = sp;
    rep.witness = "leaf carried by a vertex group of a " + std::string(to_string(sp.tag())) + " splitting";
    if (vc.invariant_power) rep.witness += " fixed by phi^" + std::to_string(*vc.invariant_power);
    return true;
  };
  std::set<std::string> seen;
  for (const auto& sp : splittings)
    if (seen.insert(sp.canonical()).second && examine(sp)) return rep;

  rep.fixed = fixed_class_search(phi, caps.fixed_length, caps.fixed_power, caps.fixed_nodes);
  if (!rep.fixed.complete) rep.notes.push_back("fixed-class search stopped at its node budget");
  auto inps = find_inps(f, s);
  for (const auto& rec : inps.records)
    if (rec.height == r && !rec.path.empty() && g.origin(rec.path.front()) == g.terminus(rec.path.back()))
      rep.closed_inps.push_back(rec.path);
  if (inps.status != Status::pass) rep.notes.push_back("INP search hit a cap on some turns");

  // seeds from the shortest periodic classes and closed Nielsen loops, by distinct root
  std::vector<CyclicWord> roots;
  auto add_root = [&](const CyclicWord& c) {
    CyclicWord u = c.root().first.unoriented();
    if (std::find(roots.begin(), roots.end(), u) == roots.end()) roots.push_back(u);
  };
  for (const auto& p : rep.closed_inps) add_root(CyclicWord(g.read(p)));
  for (const auto& fc : rep.fixed.classes) add_root(fc.word);
  if (roots.size() > caps.seed_classes) {
    rep.notes.push_back("seeded splittings from the first " + std::to_string(caps.seed_classes) + " of " +
                        std::to_string(roots.size()) + " periodic roots");
    roots.resize(caps.seed_classes);
  }
  for (const auto& c : roots)
    for (const auto& sp : seeds_from_class(c, g.rank()))
      if (seen.insert(sp.canonical()).second && examine(sp)) return rep;

  if (rep.free_factor->kind == CarrierKind::Inconclusive) {
    rep.overall = FillingVerdict::Inconclusive;
    rep.notes.push_back("free factor test inconclusive: " + rep.free_factor->note);
    return rep;
  }
  if (rep.fixed.classes.empty() && rep.closed_inps.empty() && rep.fixed.complete) {
    rep.overall = FillingVerdict::ZFillingEvidence;
    return rep;
  }
  rep.overall = FillingVerdict::FillingEvidence;
  if (!rep.fixed.classes.empty())
    rep.notes.push_back(std::to_string(rep.fixed.classes.size()) + " periodic conjugacy classes up to length " +
                        std::to_string(caps.fixed_length) + "; no carrying splitting found");
  if (!rep.closed_inps.empty()) rep.notes.push_back("top stratum has a closed Nielsen loop");
  return rep;
}

}  // namespace fzkit
