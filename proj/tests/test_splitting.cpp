#include <doctest.h>

#include <set>

#include "corpus.hpp"
#include "fzkit/splitting.hpp"
#include "fzkit/stallings.hpp"
#include "oracles.hpp"

using namespace fzkit;

namespace {

OneEdgeSplitting split(const std::string& name) { return OneEdgeSplitting::parse(corpus::read(name + ".split")); }

std::vector<Word> words(std::initializer_list<const char*> xs) {
  std::vector<Word> out;
  for (const char* x : xs) out.push_back(Word::parse(x));
  return out;
}

// Every reduced word of length <= n over the given rank.
std::vector<Word> ball(int rank, int n) {
  std::vector<Word> out{Word()};
  std::size_t lo = 0;
  for (int len = 1; len <= n; ++len) {
    std::size_t hi = out.size();
    for (std::size_t i = lo; i < hi; ++i)
      for (int g = 1; g <= rank; ++g)
        for (Letter x : {g, -g}) {
          const Word& w = out[i];
          if (!w.empty() && w.back() == -x) continue;
          out.push_back(w * Word(Word::reduce({x})));
        }
    lo = hi;
  }
  return out;
}

// c is elliptic iff some conjugate g c g^-1 with |g| <= 6 lies in a vertex group.
bool elliptic_oracle(const Word& c, const std::vector<std::vector<Word>>& groups, int rank, const std::vector<Word>& conj) {
  for (const auto& gens : groups) {
    auto h = CoreGraph::from_generators(gens, rank);
    for (const auto& g : conj)
      if (h.contains(g * c * g.inverse())) return true;
  }
  return false;
}

Word eval(const Word& expr, const std::vector<Word>& gens) {
  std::vector<Letter> raw;
  for (Letter x : expr.letters()) {
    Word g = gens[static_cast<std::size_t>(gen_index(x))];
    if (x < 0) g = g.inverse();
    raw.insert(raw.end(), g.letters().begin(), g.letters().end());
  }
  return Word::reduce(raw);
}

GraphOfGroups loop_fixture() {
  GraphOfGroups g;
  g.rank = 4;
  g.vertex_groups = {words({"a", "b", "Cac"}), words({"a", "d"})};
  g.edges.push_back({0, 0, Word::parse("a"), Word::parse("Cac"), Word::parse("c")});
  g.edges.push_back({0, 1, Word::parse("a"), Word::parse("a"), Word()});
  g.validate();
  return g;
}

GraphOfGroups chain_fixture() {
  GraphOfGroups g;
  g.rank = 5;
  g.vertex_groups = {words({"a", "b"}), words({"a", "c"}), words({"a", "d"}), words({"a", "e"})};
  for (int i = 0; i < 3; ++i) g.edges.push_back({i, i + 1, Word::parse("a"), Word::parse("a"), Word()});
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("splitting files") {
  auto s = split("chain_bc");
  CHECK(s.variant == SplitVariant::Amalgam);
  CHECK(s.tag() == EdgeClass::MaximalCyclic);
  CHECK(s.reduced());
  CHECK(OneEdgeSplitting::parse(s.serialize()).serialize() == s.serialize());
  auto h = split("hh_first");
  CHECK(h.variant == SplitVariant::HNN);
  CHECK(OneEdgeSplitting::parse(h.serialize()).serialize() == h.serialize());

  CHECK_THROWS_AS(OneEdgeSplitting::parse("amalgam x\n"), ParseError);
  CHECK_THROWS_AS(OneEdgeSplitting::parse("amalgam 3\nvertex a b\nedge b\n"), ParseError);
  CHECK_THROWS_AS(OneEdgeSplitting::parse("hnn 2\nvertex a\nedge a\n"), ParseError);
  try {
    OneEdgeSplitting::parse("amalgam 3\nvertex a b\nfrob c\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  // edge word outside a vertex group, and a pair that does not generate F
  CHECK_THROWS_AS(OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"b", "c"}), Word::parse("c")), PreconditionFailed);
  CHECK_THROWS_AS(OneEdgeSplitting::amalgam(3, words({"a"}), words({"b"}), Word()), PreconditionFailed);
  // ranks that cannot add up to a splitting of F_3
  CHECK_THROWS_AS(OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"a", "b", "c"}), Word::parse("a")), PreconditionFailed);
  CHECK(OneEdgeSplitting::amalgam(2, words({"a"}), words({"a", "b"}), Word::parse("aa")).tag() == EdgeClass::Cyclic);
}

TEST_CASE("edge folds") {
  auto free3 = OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"c"}), Word());
  CHECK(free3.tag() == EdgeClass::Free);
  auto s = edge_fold(free3, Word::parse("ab"), 0);
  CHECK(s.tag() == EdgeClass::MaximalCyclic);
  CHECK(s.v1 == words({"a", "b"}));
  CHECK(s.v2 == words({"c", "ab"}));
  CHECK(s.reduced());
  CHECK(is_elliptic(CyclicWord(s.edge), s));
  CHECK(CoreGraph::from_generators(s.v1, 3).contains(s.edge));
  CHECK(CoreGraph::from_generators(s.v2, 3).contains(s.edge));
  CHECK_THROWS_AS(edge_fold(free3, Word::parse("c"), 0), WNotInVertexGroup);
  CHECK_THROWS_AS(edge_fold(s, Word::parse("a"), 0), PreconditionFailed);

  auto lonely = OneEdgeSplitting::amalgam(3, words({"a"}), words({"b", "c"}), Word());
  auto nr = edge_fold(lonely, Word::parse("a"), 0);
  CHECK_FALSE(nr.reduced());

  auto hfree = OneEdgeSplitting::hnn(2, words({"a"}), Word::parse("b"), Word());
  auto hf = edge_fold(hfree, Word::parse("a"));
  CHECK(hf.variant == SplitVariant::HNN);
  CHECK(hf.v1 == words({"a", "Bab"}));
  CHECK(hf.reduced());
  CHECK(equivalent(hf, split("hh_first")));
}

TEST_CASE("ellipticity agrees with a conjugator search") {
  auto conj = ball(3, 6);
  std::vector<OneEdgeSplitting> cases{split("chain_bc"), split("swap_partner"), split("twist_hnn"),
                                      edge_fold(OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"c"}), Word()),
                                                Word::parse("ab"), 0)};
  auto s = split("chain_bc");
  CHECK(is_elliptic(CyclicWord::parse("a"), s));
  CHECK_FALSE(is_elliptic(CyclicWord::parse("ac"), s));
  CHECK_FALSE(elliptic_oracle(Word::parse("ac"), {s.v1, s.v2}, 3, conj));
  for (const auto& sp : cases) {
    CHECK(is_elliptic(CyclicWord(sp.edge), sp));
    std::vector<std::vector<Word>> groups{sp.v1};
    if (sp.variant == SplitVariant::Amalgam) groups.push_back(sp.v2);
    for (int t = 0; t < 60; ++t) {
      Word c = oracle::random_cyclically_reduced(3, oracle::uniform(1, 4));
      CHECK_MESSAGE(is_elliptic(CyclicWord(c), sp) == elliptic_oracle(c, groups, 3, conj), c.str());
    }
  }
}

TEST_CASE("pair types") {
  auto s = split("chain_bc");
  CHECK(pair_type(s, s) == PairType::EE);
  auto sa = OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"a", "c"}), Word::parse("a"));
  auto sc = OneEdgeSplitting::amalgam(3, words({"a", "c"}), words({"b", "c"}), Word::parse("c"));
  CHECK(pair_type(sa, sc) == PairType::EE);
  CHECK(pair_type(split("hh_first"), split("hh_second")) == PairType::HH);
  auto free3 = OneEdgeSplitting::amalgam(3, words({"a", "b"}), words({"c"}), Word());
  CHECK_THROWS_AS(pair_type(s, free3), TrivialEdgeGroup);
  auto fold = edge_fold(OneEdgeSplitting::amalgam(3, words({"a"}), words({"b", "c"}), Word()), Word::parse("a"), 0);
  CHECK(pair_type(fold, s) == PairType::EE);
  auto hnn = split("hh_first");
  auto mixed = OneEdgeSplitting::amalgam(2, words({"a"}), words({"a", "b"}), Word::parse("a"));
  CHECK(pair_type(hnn, mixed) == PairType::EE);
}

TEST_CASE("automorphisms act on splittings") {
  auto s = split("chain_bc");
  CHECK(equivalent(s, apply_aut(s, FreeAutomorphism::identity(3))));
  CHECK(equivalent(s, apply_aut(s, conjugation(3, Word::parse("acB")))));
  auto ac = FreeAutomorphism::parse("a -> c\nb -> b\nc -> a");
  CHECK(equivalent(s, apply_aut(s, ac)));
  auto swap = corpus::aut("swap");
  CHECK_FALSE(equivalent(s, apply_aut(s, swap)));
  CHECK(equivalent(split("swap_partner"), apply_aut(s, swap)));
  // spot checks that equivalence behaves like an equivalence relation
  std::vector<OneEdgeSplitting> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(apply_aut(s, oracle::random_automorphism(3, oracle::uniform(0, 3))));
  for (const auto& x : pool) {
    CHECK(equivalent(x, x));
    for (const auto& y : pool) {
      CHECK(equivalent(x, y) == equivalent(y, x));
      for (const auto& z : pool)
        if (equivalent(x, y) && equivalent(y, z)) CHECK(equivalent(x, z));
    }
  }
}

TEST_CASE("invariant splitting search") {
  auto twist = corpus::aut("dehn_twist");
  auto r1 = invariant_splitting_search(twist, split("twist_hnn"), 6);
  REQUIRE(r1);
  CHECK(r1->power == 1);
  auto r2 = invariant_splitting_search(corpus::aut("swap"), split("chain_bc"), 6);
  REQUIRE(r2);
  CHECK(r2->power == 2);
  CHECK(equivalent(apply_aut(r2->splitting, power(corpus::aut("swap"), 2)), r2->splitting));

  auto seeds = seeds_from_class(CyclicWord::parse("a"), 3);
  CHECK(seeds.size() == 3);
  bool found = false;
  for (const auto& sd : seeds) {
    CHECK(sd.tag() == EdgeClass::MaximalCyclic);
    found = found || invariant_splitting_search(twist, sd, 4).has_value();
  }
  CHECK(found);
  // a primitive class given in another basis still seeds three splittings
  auto psi = FreeAutomorphism::parse("a -> abc\nb -> b\nc -> cb");
  auto moved = seeds_from_class(psi.apply(CyclicWord::parse("a")), 3);
  CHECK(moved.size() == 3);
  for (const auto& sd : moved) CHECK(is_elliptic(psi.apply(CyclicWord::parse("a")), sd));
  CHECK(seeds_from_class(CyclicWord::parse("abAB"), 2).empty());

  auto phi = corpus::aut("examples_phi");
  for (const char* c : {"a", "b", "c", "d", "ab"})
    for (const auto& sd : seeds_from_class(CyclicWord::parse(c), 4)) CHECK_FALSE(invariant_splitting_search(phi, sd, 6));
}

TEST_CASE("adapted bases") {
  for (int t = 0; t < 100; ++t) {
    int rank = oracle::uniform(2, 4);
    auto a = oracle::random_automorphism(rank, oracle::uniform(0, 6));
    std::vector<Word> gens = a.images();
    if (oracle::uniform(0, 1)) gens.push_back(oracle::random_reduced(rank, oracle::uniform(0, 4)));
    auto e = express_generators(gens, rank);
    REQUIRE(e);
    for (int i = 0; i < rank; ++i) CHECK(eval((*e)[static_cast<std::size_t>(i)], gens) == Word::generator(i));
  }
  CHECK_FALSE(express_generators(words({"aa", "b"}), 2));
  CHECK_FALSE(express_generators(words({"a"}), 2));
}

TEST_CASE("Dehn twists") {
  auto s = split("chain_bc");
  auto d = dehn_twist(s);
  CHECK(d.str() == FreeAutomorphism::parse("a -> baB\nb -> b\nc -> c").str());
  auto h = dehn_twist(split("twist_hnn"));
  CHECK(h.image(0) == Word::parse("a"));
  CHECK(h.image(1) == Word::parse("ab"));
  CHECK(h.image(2) == Word::parse("c"));
  CHECK(outer_equal(compose(h, corpus::aut("dehn_twist")), compose(corpus::aut("dehn_twist"), h)));

  auto partner = corpus::aut("twist_partner");
  REQUIRE(invariant_splitting_search(partner, s, 1));
  auto comm = compose(compose(d, partner), compose(invert(d), invert(partner)));
  CHECK(is_inner(comm));
  CHECK(partner.apply(d.apply(Word::parse("a"))) == d.apply(partner.apply(Word::parse("a"))));

  // commutes with the corpus automorphisms that fix the splitting side by side
  std::vector<std::pair<OneEdgeSplitting, FreeAutomorphism>> pairs{{split("twist_hnn"), corpus::aut("dehn_twist")},
                                                                   {s, partner}};
  for (const auto& [sp, phi] : pairs) {
    REQUIRE(invariant_splitting_search(phi, sp, 1));
    auto tw = dehn_twist(sp);
    CHECK(outer_equal(compose(tw, phi), compose(phi, tw)));
  }
  // exchanging the two vertex groups inverts the twist in Out(F)
  auto ac = FreeAutomorphism::parse("a -> c\nb -> b\nc -> a");
  REQUIRE(invariant_splitting_search(ac, s, 1));
  CHECK(outer_equal(compose(compose(ac, d), ac), invert(d)));
  auto nonred = OneEdgeSplitting::amalgam(2, words({"a"}), words({"a", "b"}), Word::parse("a"));
  CHECK_THROWS_AS(dehn_twist(nonred), PreconditionFailed);
  CHECK_THROWS_AS(dehn_twist(OneEdgeSplitting::amalgam(2, words({"a"}), words({"b"}), Word())), PreconditionFailed);
}

TEST_CASE("slides") {
  auto single = GraphOfGroups::from_splitting(split("chain_bc"));
  CHECK(single.reduced());
  CHECK(enumerate_slides(single).members.size() == 1);

  auto loop = loop_fixture();
  CHECK(loop.reduced());
  auto once = slide(loop, 0, 0, 1, 0);
  CHECK(once.edges[1].alpha == Word::parse("Cac"));
  CHECK(once.edges[1].stable == Word::parse("C"));
  CHECK_THROWS_AS(slide(once, 0, 0, 1, 0), PreconditionFailed);
  CHECK(slide(once, 0, 1, 1, 0).canonical() == loop.canonical());
  auto lo = enumerate_slides(loop);
  CHECK_FALSE(lo.capped);
  std::set<std::string> mine;
  for (const auto& m : lo.members) mine.insert(m.canonical());
  CHECK(mine.count(once.canonical()) == 1);
  // f at either end of the loop, plus the loop's end moved across f (equal edge groups)
  CHECK(lo.members.size() == 3);

  auto chain = chain_fixture();
  auto co = enumerate_slides(chain);
  CHECK_FALSE(co.capped);
  CHECK(co.members.size() == 16);  // labelled trees on four vertices
  CHECK(enumerate_slides(chain, 5).capped);

  // f's group must sit inside e's
  GraphOfGroups bad = chain;
  bad.edges[0].alpha = bad.edges[0].omega = Word::parse("aa");
  bad.validate();
  CHECK_THROWS_AS(slide(bad, 0, 1, 1, 0), PreconditionFailed);

  // slides keep the elliptic subgroups
  for (const auto* g : {&lo, &co}) {
    const auto& base = g->members[0];
    std::vector<Word> tests;
    for (int t = 0; t < 200; ++t) tests.push_back(oracle::random_cyclically_reduced(base.rank, oracle::uniform(1, 6)));
    for (const auto& m : g->members) {
      m.validate();
      for (const auto& w : tests) CHECK(m.is_elliptic(CyclicWord(w)) == base.is_elliptic(CyclicWord(w)));
    }
  }
}
