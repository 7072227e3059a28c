#include <doctest.h>

#include <map>

#include "fzkit/automorphism.hpp"
#include "fzkit/errors.hpp"
#include "fzkit/stallings.hpp"
#include "fzkit/whitehead.hpp"
#include "fzkit/word.hpp"
#include "oracles.hpp"

using namespace fzkit;

namespace {
const char* kPhi = "ab,bcab,d,cd";
}

TEST_CASE("free reduction") {
  CHECK(Word::parse("abB").str() == "a");
  CHECK(Word::parse("aA").str() == "");
  CHECK(Word::parse("abBAba").str() == "ba");
  CHECK(Word::parse("1").empty());
  CHECK(Word::parse("a b").str() == "ab");
  CHECK_THROWS_AS(Word::parse("ac", 2), AlphabetError);
  CHECK_THROWS_AS(Word::parse("a?"), AlphabetError);
}

TEST_CASE("reduction agrees with rescanning oracle") {
  for (int t = 0; t < 2000; ++t) {
    std::string s = oracle::random_letters(3, oracle::uniform(0, 14));
    CHECK(Word::parse(s).str() == oracle::brute_reduce(s));
  }
}

TEST_CASE("group laws on words") {
  for (int t = 0; t < 500; ++t) {
    Word u = oracle::random_reduced(3, oracle::uniform(0, 8));
    Word v = oracle::random_reduced(3, oracle::uniform(0, 8));
    Word w = oracle::random_reduced(3, oracle::uniform(0, 8));
    CHECK((u * v) * w == u * (v * w));
    CHECK((u * u.inverse()).empty());
    CHECK((u * v).inverse() == v.inverse() * u.inverse());
    CHECK(u.pow(3) == u * u * u);
    CHECK(u.pow(-2) == u.inverse() * u.inverse());
  }
}

TEST_CASE("cyclic reduction") {
  auto r = cyclic_reduce(Word::parse("abcBA"));
  CHECK(r.core.str() == "c");
  CHECK(r.conjugator.str() == "ab");
  CHECK(cyclic_length(Word::parse("abcBA")) == 1);
  for (int t = 0; t < 500; ++t) {
    Word w = oracle::random_reduced(3, oracle::uniform(0, 10));
    auto c = cyclic_reduce(w);
    CHECK(c.conjugator * c.core * c.conjugator.inverse() == w);
    CHECK(is_cyclically_reduced(c.core.letters()));
  }
}

TEST_CASE("least rotation matches brute force") {
  for (int t = 0; t < 3000; ++t) {
    Word w = oracle::random_cyclically_reduced(2, oracle::uniform(1, 12));
    const auto& v = w.letters();
    std::size_t k = least_rotation(v);
    std::vector<Letter> rot(v.begin() + static_cast<long>(k), v.end());
    rot.insert(rot.end(), v.begin(), v.begin() + static_cast<long>(k));
    CHECK(rot == oracle::least_rotation_brute(v));
  }
  // Periodic inputs.
  CHECK(CyclicWord::parse("babab" "a").str() == "ababab");
  CHECK(CyclicWord::parse("BaBa").str() == "aBaB");
}

TEST_CASE("cyclic words are conjugacy invariants") {
  for (int t = 0; t < 500; ++t) {
    Word w = oracle::random_reduced(3, oracle::uniform(0, 8));
    Word g = oracle::random_reduced(3, oracle::uniform(0, 5));
    CHECK(CyclicWord(g * w * g.inverse()) == CyclicWord(w));
    CHECK(CyclicWord(w).unoriented() == CyclicWord(w.inverse()).unoriented());
  }
  auto [root, k] = CyclicWord::parse("abab").root();
  CHECK(root.str() == "ab");
  CHECK(k == 2);
  CHECK_FALSE(CyclicWord::parse("aab").is_proper_power());
  CHECK(CyclicWord::parse("aaa").root().second == 3);
}

TEST_CASE("automorphism parsing") {
  auto phi = FreeAutomorphism::parse("# example\na -> ab\nb -> bcab\nc -> d\nd -> cd\n");
  CHECK(phi.rank() == 4);
  CHECK(phi == FreeAutomorphism::from_images(kPhi));
  CHECK_THROWS_AS(FreeAutomorphism::parse("a -> b\na -> a\n"), ParseError);
  CHECK_THROWS_AS(FreeAutomorphism::parse("a  b\n"), ParseError);
  CHECK_THROWS_AS(FreeAutomorphism::parse("a -> b\nc -> a\n"), ParseError);
  try {
    FreeAutomorphism::parse("a -> b\nb -> a%\n");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("apply and compose") {
  auto phi = FreeAutomorphism::from_images(kPhi);
  CHECK(phi.apply(Word::parse("ab")).str() == "abbcab");
  CHECK(phi.apply(Word::parse("A")).str() == "BA");
  for (int t = 0; t < 100; ++t) {
    auto f = oracle::random_automorphism(3, 6);
    auto g = oracle::random_automorphism(3, 6);
    Word w = oracle::random_reduced(3, oracle::uniform(0, 6));
    CHECK(compose(f, g).apply(w) == f.apply(g.apply(w)));
    CHECK(f.apply(w * w.inverse()).empty());
  }
}

TEST_CASE("inversion") {
  auto fib = FreeAutomorphism::from_images("ab,a");
  CHECK(invert(fib) == FreeAutomorphism::from_images("b,Ba"));
  auto phi = FreeAutomorphism::from_images(kPhi);
  CHECK(compose(phi, invert(phi)) == FreeAutomorphism::identity(4));
  CHECK_THROWS_AS(invert(FreeAutomorphism::from_images("aa,b")), NotAnAutomorphism);
  CHECK_THROWS_AS(invert(FreeAutomorphism::from_images("ab,ba")), NotAnAutomorphism);
  for (int t = 0; t < 200; ++t) {
    auto f = oracle::random_automorphism(oracle::uniform(2, 4), oracle::uniform(1, 10));
    auto g = invert(f);
    CHECK(compose(f, g) == FreeAutomorphism::identity(f.rank()));
    CHECK(compose(g, f) == FreeAutomorphism::identity(f.rank()));
  }
}

TEST_CASE("inner automorphisms") {
  auto inner = conjugation(3, Word::parse("abC"));
  auto w = is_inner(inner);
  REQUIRE(w.has_value());
  CHECK(*w == Word::parse("abC"));
  CHECK_FALSE(is_inner(FreeAutomorphism::from_images("ab,b")).has_value());
  CHECK(is_inner(FreeAutomorphism::identity(2)).value().empty());
  for (int t = 0; t < 100; ++t) {
    Word g = oracle::random_reduced(3, oracle::uniform(0, 6));
    auto r = is_inner(conjugation(3, g));
    REQUIRE(r.has_value());
    CHECK(*r == g);
  }
}

TEST_CASE("abelianization and outer equality") {
  auto m = abelianize(FreeAutomorphism::from_images(kPhi));
  std::vector<std::vector<long>> expect{{1, 1, 0, 0}, {1, 2, 1, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}};
  CHECK(m == expect);
  auto f = oracle::random_automorphism(3, 5);
  auto c = conjugation(3, Word::parse("bcA"));
  CHECK(outer_equal(compose(c, f), f));
  CHECK_FALSE(outer_equal(compose(FreeAutomorphism::from_images("ab,b,c"), f), f));
}

TEST_CASE("whitehead graph and carrier test") {
  auto comm = std::vector<CyclicWord>{CyclicWord::parse("abAB")};
  auto g = whitehead_graph(comm, 2);
  CHECK(g.connected());
  CHECK(g.cut_vertices().empty());
  CHECK(free_factor_carrier_test(comm, 2).kind == CarrierKind::NotCarried);

  auto prim = std::vector<CyclicWord>{CyclicWord::parse("ab")};
  auto v = free_factor_carrier_test(prim, 2);
  CHECK(v.kind == CarrierKind::CarriedByProperFactor);

  // A primitive element disguised by an automorphism.
  auto f = FreeAutomorphism::from_images("abab,bab,c");
  auto hidden = std::vector<CyclicWord>{f.apply(CyclicWord::parse("ac"))};
  auto hv = free_factor_carrier_test(hidden, 3);
  REQUIRE(hv.kind == CarrierKind::CarriedByProperFactor);
  // The factor carries the class: every class lies in the subgroup it spans up to conjugacy.
  auto core = CoreGraph::from_generators(hv.factor_basis, 3);
  CHECK(static_cast<int>(hv.factor_basis.size()) < 3);
  CHECK(core.contains_conjugate(hidden[0]));

  auto filling = std::vector<CyclicWord>{CyclicWord::parse("abAB"), CyclicWord::parse("cbCB")};
  CHECK(free_factor_carrier_test(filling, 3).kind == CarrierKind::NotCarried);
}

TEST_CASE("whitehead descent never increases length") {
  for (int t = 0; t < 40; ++t) {
    auto f = oracle::random_automorphism(3, 4);
    std::vector<CyclicWord> s{f.apply(CyclicWord(oracle::random_cyclically_reduced(3, 3)))};
    auto r = whitehead_minimize(s, 3);
    CHECK(total_length(r.minimal) <= total_length(s));
    CHECK(apply_all(r.composite, s) == r.minimal);
  }
}

TEST_CASE("stallings folding basics") {
  auto h = CoreGraph::from_generators({Word::parse("ab"), Word::parse("aB")}, 2);
  CHECK(h.rank() == 2);
  CHECK(h.contains(Word::parse("bb")));
  CHECK_FALSE(h.contains(Word::parse("b")));
  CHECK_FALSE(h.is_whole_group());
  CHECK(generates_free_group({Word::parse("ab"), Word::parse("b")}, 2));
  CHECK_FALSE(generates_free_group({Word::parse("aa"), Word::parse("b")}, 2));

  auto k = CoreGraph::from_generators({Word::parse("a"), Word::parse("bb")}, 2);
  CHECK(is_subgroup(h, k) == false);
  CHECK(is_subgroup(CoreGraph::from_generators({Word::parse("aa")}, 2), k));
  CHECK(same_subgroup(h, CoreGraph::from_generators({Word::parse("ab"), Word::parse("bb")}, 2)));

  // letters outside the alphabet are rejected or simply not read
  CHECK_THROWS_AS(CoreGraph::from_generators({Word::parse("ac")}, 2), PreconditionFailed);
  CHECK_FALSE(h.contains(Word::parse("c")));
  CHECK_FALSE(h.contains_conjugate(CyclicWord::parse("abc")));
}

TEST_CASE("stallings basis regenerates the subgroup") {
  for (int t = 0; t < 200; ++t) {
    std::vector<Word> gens;
    int n = oracle::uniform(1, 3);
    for (int i = 0; i < n; ++i) gens.push_back(oracle::random_reduced(3, oracle::uniform(1, 5)));
    auto h = CoreGraph::from_generators(gens, 3);
    auto b = h.basis();
    CHECK(static_cast<int>(b.size()) == h.rank());
    auto h2 = CoreGraph::from_generators(b, 3);
    CHECK(same_subgroup(h, h2));
    for (const auto& g : gens) CHECK(h.contains(g));
  }
}

TEST_CASE("stallings membership agrees with product enumeration") {
  int disagreements = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<Word> gens;
    int n = oracle::uniform(1, 3);
    for (int i = 0; i < n; ++i) gens.push_back(oracle::random_reduced(2, oracle::uniform(1, 3)));
    auto h = CoreGraph::from_generators(gens, 2);
    auto ball = oracle::subgroup_ball(gens, 5);
    for (const auto& s : ball) CHECK(h.contains(Word::parse(s)));
    for (int q = 0; q < 60; ++q) {
      Word w = oracle::random_reduced(2, oracle::uniform(0, 5));
      if (h.contains(w) != (ball.count(w.str()) > 0)) {
        ++disagreements;
        MESSAGE(gens[0].str(), " ", (n > 1 ? gens[1].str() : ""), " ", (n > 2 ? gens[2].str() : ""), " w=", w.str(), " st=", h.contains(w));
      }
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("conjugacy of subgroups") {
  for (int t = 0; t < 100; ++t) {
    std::vector<Word> gens;
    int n = oracle::uniform(1, 2);
    for (int i = 0; i < n; ++i) gens.push_back(oracle::random_reduced(3, oracle::uniform(1, 4)));
    Word g = oracle::random_reduced(3, oracle::uniform(0, 4));
    std::vector<Word> conj;
    for (const auto& x : gens) conj.push_back(g * x * g.inverse());
    auto h = CoreGraph::from_generators(gens, 3);
    auto k = CoreGraph::from_generators(conj, 3);
    auto c = conjugator_between(h, k);
    REQUIRE(c.has_value());
    std::vector<Word> moved;
    for (const auto& x : h.basis()) moved.push_back(*c * x * c->inverse());
    CHECK(same_subgroup(CoreGraph::from_generators(moved, 3), k));
    CHECK(h.conjugacy_canonical() == k.conjugacy_canonical());
  }
  auto a = CoreGraph::from_generators({Word::parse("a")}, 2);
  auto b = CoreGraph::from_generators({Word::parse("b")}, 2);
  CHECK_FALSE(conjugator_between(a, b).has_value());
  CHECK(a.contains_conjugate(CyclicWord::parse("a")));
  CHECK(a.immerses_segment(Word::parse("aaa")));
  CHECK_FALSE(a.immerses_segment(Word::parse("ab")));
}

TEST_CASE("folding is independent of fold order") {
  for (int t = 0; t < 150; ++t) {
    std::vector<Word> gens;
    int n = oracle::uniform(1, 3);
    for (int i = 0; i < n; ++i) gens.push_back(oracle::random_reduced(3, oracle::uniform(1, 5)));
    auto lib = CoreGraph::from_generators(gens, 3);
    auto naive = CoreGraph::from_adjacency(3, oracle::naive_fold(gens, 3)).core();
    CHECK(naive.canonical() == lib.canonical());
  }
}

TEST_CASE("segment immersion is monotone under subwords") {
  for (int t = 0; t < 100; ++t) {
    auto h = CoreGraph::from_generators({oracle::random_reduced(3, 4), oracle::random_reduced(3, 3)}, 3);
    Word w = oracle::random_reduced(3, oracle::uniform(1, 8));
    if (!h.immerses_segment(w)) continue;
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t l = 0; i + l <= w.size(); ++l) CHECK(h.immerses_segment(w.subword(i, l)));
  }
}

TEST_CASE("whitehead minimum matches exhaustive orbit search in rank 2") {
  auto autos = oracle::all_whitehead_autos(2);
  for (const auto& c : oracle::all_cyclic_words(2, 6)) {
    auto r = whitehead_minimize({c}, 2);
    CHECK(total_length(r.minimal) == oracle::whitehead_min_brute({c}, 2, autos));
  }
}
