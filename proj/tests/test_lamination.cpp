#include <doctest.h>

#include <algorithm>
#include <set>

#include "corpus.hpp"
#include "fzkit/lamination.hpp"
#include "fzkit/train_track.hpp"
#include "oracles.hpp"

using namespace fzkit;

namespace {

std::string read_path(const GraphSelfMap& f, const EdgePath& p) { return f.graph().read(p).str(); }

// Least k <= p with [phi^k(w)] = [w], by direct iteration; 0 if none.
int period_brute(const FreeAutomorphism& phi, const CyclicWord& w, int p) {
  CyclicWord cur = w;
  for (int k = 1; k <= p; ++k) {
    cur = phi.apply(cur);
    if (cur == w) return k;
  }
  return 0;
}

std::set<std::pair<int, CyclicWord>> as_set(const FixedClassSearch& r) {
  std::set<std::pair<int, CyclicWord>> out;
  for (const auto& c : r.classes) out.insert({c.power, c.word});
  return out;
}

}  // namespace

TEST_CASE("leaf segments iterate the seed edge") {
  auto f = corpus::rose("examples_phi");
  auto s = compute_stratification(f);
  int c = 2;
  CHECK(read_path(f, leaf_segment(f, s, c, 0).path) == "c");
  CHECK(read_path(f, leaf_segment(f, s, c, 1).path) == "d");
  CHECK(read_path(f, leaf_segment(f, s, c, 2).path) == "cd");
  CHECK(read_path(f, leaf_segment(f, s, c, 3).path) == "dcd");
  CHECK(default_seed_edge(s) == 0);
  CHECK_THROWS_AS(leaf_segment(f, s, c, -1), PreconditionFailed);
  CHECK_THROWS_AS(leaf_segment(f, s, 9, 1), PreconditionFailed);

  auto twist = corpus::rose("dehn_twist");
  auto st = compute_stratification(twist);
  CHECK(default_seed_edge(st) == -1);
  CHECK_THROWS_AS(leaf_segment(twist, st, 1, 2), PreconditionFailed);
}

TEST_CASE("leaf segments grow at the stratum's rate and stay legal") {
  for (const char* name : {"examples_phi", "fibonacci", "qep"}) {
    CAPTURE(name);
    auto f = corpus::rose(name);
    auto s = compute_stratification(f);
    auto gs = gates(f);
    for (std::size_t st = 0; st < s.strata.size(); ++st) {
      if (s.strata[st].kind != StratumKind::EG) continue;
      int e = s.strata[st].edges.front();
      double lambda = s.strata[st].lambda;
      for (int k = 8; k <= 10; ++k) {
        auto a = leaf_segment(f, s, e, k), b = leaf_segment(f, s, e, k + 1);
        double ratio = static_cast<double>(b.path.size()) / static_cast<double>(a.path.size());
        CHECK(std::abs(ratio - lambda) <= 0.1 * lambda);
      }
      for (int k = 0; k < 6; ++k) {
        auto a = leaf_segment(f, s, e, k);
        CHECK(f.map_path(a.path) == leaf_segment(f, s, e, k + 1).path);
        if (static_cast<int>(st) == s.top_eg()) CHECK(is_legal(a.path, gs));
      }
    }
  }
}

TEST_CASE("longest leaf segment respects both caps") {
  auto f = corpus::rose("examples_phi");
  auto s = compute_stratification(f);
  auto a = longest_leaf_segment(f, s, 0, 10, 4096);
  CHECK(a.iterate == 8);
  CHECK(a.path.size() == 2368);
  auto b = longest_leaf_segment(f, s, 0, 3, 4096);
  CHECK(b.iterate == 3);
  CHECK(b.path.size() == 17);
}

TEST_CASE("carrying by subgroups") {
  auto f = corpus::rose("examples_phi");
  auto s = compute_stratification(f);
  auto ab = CoreGraph::from_generators({Word::parse("a"), Word::parse("b")}, 4);
  auto all = CoreGraph::from_generators({Word::parse("a"), Word::parse("b"), Word::parse("c"), Word::parse("d")}, 4);
  // the lower stratum lives in <c, d>; the top one runs through everything
  auto cd = CoreGraph::from_generators({Word::parse("c"), Word::parse("d")}, 4);
  CHECK(carried_by(ab, f.graph(), leaf_segment(f, s, 0, 1)));
  for (int k = 2; k <= 6; ++k) {
    auto seg = leaf_segment(f, s, 0, k);
    CHECK_FALSE(carried_by(ab, f.graph(), seg));
    CHECK(carried_by(all, f.graph(), seg));
  }
  for (int k = 0; k <= 6; ++k) CHECK(carried_by(cd, f.graph(), leaf_segment(f, s, 2, k)));

  SUBCASE("a larger subgroup carries whatever a smaller one does") {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<Word> gens;
      int n = oracle::uniform(1, 3);
      for (int i = 0; i < n; ++i) gens.push_back(oracle::random_reduced(4, oracle::uniform(1, 4)));
      auto small = CoreGraph::from_generators(gens, 4);
      gens.push_back(oracle::random_reduced(4, oracle::uniform(1, 4)));
      auto big = CoreGraph::from_generators(gens, 4);
      for (int k = 0; k <= 4; ++k) {
        for (int e : {0, 2}) {
          auto seg = leaf_segment(f, s, e, k);
          if (carried_by(small, f.graph(), seg)) CHECK(carried_by(big, f.graph(), seg));
        }
      }
    }
  }
}

TEST_CASE("fixed classes agree with direct iteration") {
  for (const char* name : {"fibonacci", "dehn_twist", "swap", "linear_ab"}) {
    CAPTURE(name);
    auto phi = corpus::aut(name);
    int len = phi.rank() == 2 ? 6 : 4;
    auto found = as_set(fixed_class_search(phi, len, 2));
    std::set<std::pair<int, CyclicWord>> expect;
    for (const auto& w : oracle::all_cyclic_words(phi.rank(), len))
      if (int k = period_brute(phi, w, 2)) expect.insert({k, w});
    CHECK(found == expect);
  }
}

TEST_CASE("fixed class search on corpus maps") {
  SUBCASE("twist fixes a") {
    auto r = fixed_class_search(corpus::aut("dehn_twist"), 3, 1);
    CHECK(r.complete);
    CHECK(as_set(r).count({1, CyclicWord::parse("a")}) == 1);
    CHECK(as_set(r).count({1, CyclicWord::parse("c")}) == 1);
  }
  SUBCASE("the Fibonacci map has one short periodic commutator") {
    auto phi = corpus::aut("fibonacci");
    auto r = fixed_class_search(phi, 4, 2);
    REQUIRE(r.complete);
    REQUIRE(!r.classes.empty());
    for (const auto& c : r.classes) {
      CHECK(c.power == 2);
      CHECK(c.word.size() == 4);
      CHECK(c.word.same_unoriented(CyclicWord::parse("BAba")));
    }
    CHECK(fixed_class_search(phi, 4, 1).classes.empty());
  }
  SUBCASE("raising caps only adds classes") {
    auto phi = corpus::aut("examples_phi");
    auto lo = as_set(fixed_class_search(phi, 6, 1));
    auto hi = as_set(fixed_class_search(phi, 8, 2));
    CHECK(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
    for (const auto& [k, w] : hi) CHECK(period_brute(phi, w, 2) == k);
  }
  SUBCASE("a tiny node budget reports an incomplete search") {
    auto r = fixed_class_search(corpus::aut("dehn_twist"), 10, 2, 1000);
    CHECK_FALSE(r.complete);
  }
}

TEST_CASE("filling reports") {
  SUBCASE("no EG stratum") {
    auto rep = filling_report(corpus::rose("dehn_twist"), corpus::aut("dehn_twist"));
    CHECK(rep.overall == FillingVerdict::NotFilling);
    CHECK(rep.witness == "no EG stratum");
  }
  SUBCASE("leaf inside a free factor") {
    auto phi = corpus::aut("bounded_orbit_analog");
    auto rep = filling_report(GraphSelfMap::rose(phi), phi);
    CHECK(rep.overall == FillingVerdict::NotFilling);
    REQUIRE(rep.free_factor);
    CHECK(rep.free_factor->kind == CarrierKind::CarriedByProperFactor);
    CHECK(!rep.factor_basis.empty());
  }
  SUBCASE("Fibonacci fills") {
    auto rep = filling_report(corpus::rose("fibonacci"), corpus::aut("fibonacci"));
    CHECK(rep.overall == FillingVerdict::FillingEvidence);
    REQUIRE(rep.free_factor);
    CHECK(rep.free_factor->kind == CarrierKind::NotCarried);
    CHECK(rep.closed_inps.size() == 1);
  }
  SUBCASE("leaf carried by an invariant cyclic splitting") {
    auto phi = corpus::aut("fixed_splitting");
    auto sp = OneEdgeSplitting::parse(corpus::read("fixed_splitting.split"));
    auto rep = filling_report(GraphSelfMap::rose(phi), phi, {sp});
    CHECK(rep.overall == FillingVerdict::NotZFilling);
    REQUIRE(rep.splitting);
    CHECK(equivalent(*rep.splitting, sp));
    REQUIRE(rep.free_factor);
    CHECK(rep.free_factor->kind == CarrierKind::NotCarried);
    REQUIRE(rep.vertex_groups.size() == 1);
    CHECK(rep.vertex_groups[0].carried);
    CHECK(rep.vertex_groups[0].invariant_power == 1);
  }
  SUBCASE("a splitting that misses the leaf is only recorded") {
    auto phi = corpus::aut("fibonacci");
    auto sp = OneEdgeSplitting::hnn(2, {Word::parse("a"), Word::parse("BAb")}, Word::parse("b"), Word::parse("a"));
    auto rep = filling_report(GraphSelfMap::rose(phi), phi, {sp});
    CHECK(rep.overall == FillingVerdict::FillingEvidence);
    REQUIRE(!rep.vertex_groups.empty());
    CHECK_FALSE(rep.vertex_groups[0].carried);
  }
}
