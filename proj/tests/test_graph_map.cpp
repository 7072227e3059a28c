#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "fzkit/errors.hpp"
#include "fzkit/graph_map.hpp"
#include "oracles.hpp"

using namespace fzkit;

namespace {

// Tightening by an explicit stack.
std::vector<int> stack_reduce(const std::vector<int>& raw) {
  std::vector<int> st;
  for (int x : raw) {
    if (!st.empty() && st.back() == -x)
      st.pop_back();
    else
      st.push_back(x);
  }
  return st;
}

double eval(const std::vector<boost::multiprecision::cpp_int>& c, double x) {
  double s = 0;
  for (const auto& k : c) s = s * x + k.convert_to<double>();
  return s;
}

const double kGolden = (1 + std::sqrt(5.0)) / 2;

}  // namespace

TEST_CASE("tighten") {
  auto f = corpus::rose("examples_phi");
  const auto& g = f.graph();
  CHECK(g.tighten({1, -1, 2}) == g.parse_path("b"));
  CHECK(g.parse_path("a b c").size() == 3);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> raw;
    int n = oracle::uniform(0, 12);
    for (int i = 0; i < n; ++i) raw.push_back(oracle::uniform(1, 2) * (oracle::uniform(0, 1) ? 1 : -1));
    CHECK(g.tighten(raw).letters() == stack_reduce(raw));
  }
  auto th = corpus::gmap("theta_swap");
  CHECK_THROWS_AS(th.graph().tighten({1, 2}), NonComposable);
  CHECK(th.graph().tighten({1, -2}).size() == 2);
}

TEST_CASE("map_path") {
  auto f = corpus::rose("examples_phi");
  const auto& g = f.graph();
  CHECK(g.path_str(f.map_path(g.parse_path("a"), 2)) == "a b b c a b");
  auto id = GraphSelfMap::rose(FreeAutomorphism::identity(3));
  CHECK(id.map_path(Word::parse("c"), 5) == Word::parse("c"));
  for (int t = 0; t < 100; ++t) {
    Word p = oracle::random_reduced(4, oracle::uniform(1, 6));
    CHECK(f.map_path(p, 3) == f.map_path(f.map_path(f.map_path(p))));
    CHECK(f.map_path(p, 2) == f.power(2).map_path(p));
  }
}

TEST_CASE("transition matrix of the rank-4 example") {
  auto m = corpus::rose("examples_phi").transition_matrix();
  IntMatrix expect{{1, 1, 0, 0}, {1, 2, 0, 0}, {0, 1, 0, 1}, {0, 0, 1, 1}};
  CHECK(m == expect);
  auto id = GraphSelfMap::rose(FreeAutomorphism::identity(3)).transition_matrix();
  CHECK(id == IntMatrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
}

TEST_CASE("collapse maps are explicit") {
  auto g = MarkedGraph::rose(2);
  CHECK_THROWS_AS(GraphSelfMap(g, {0}, {Word(), Word::parse("b")}), PreconditionFailed);
  GraphSelfMap c(g, {0}, {Word(), Word::parse("b")}, true);
  CHECK(c.transition_matrix()[0] == std::vector<long>{0, 0});
}

TEST_CASE("perron-frobenius data") {
  auto p = pf_eigen({{0, 1}, {1, 1}});
  CHECK(std::abs(p.lambda - kGolden) < 1e-9);
  CHECK(p.residual < 1e-9);
  auto q = pf_eigen({{1, 1}, {1, 2}});
  CHECK(std::abs(q.lambda - (3 + std::sqrt(5.0)) / 2) < 1e-9);
  auto r = pf_eigen({{2}});
  CHECK(r.lambda == doctest::Approx(2.0));
  CHECK(r.vec == std::vector<double>{1.0});
  CHECK_THROWS_AS(pf_eigen({{1, 0}, {1, 1}}), NotIrreducible);
  // Periodic irreducible matrix still converges thanks to the shift.
  auto s = pf_eigen({{0, 2}, {1, 0}});
  CHECK(std::abs(s.lambda - std::sqrt(2.0)) < 1e-9);
}

TEST_CASE("characteristic polynomial cross-check") {
  using boost::multiprecision::cpp_int;
  CHECK(characteristic_polynomial({{0, 1}, {1, 1}}) == std::vector<cpp_int>{1, -1, -1});
  CHECK(characteristic_polynomial({{1, 1}, {1, 2}}) == std::vector<cpp_int>{1, -3, 1});
  for (int t = 0; t < 200; ++t) {
    int n = oracle::uniform(1, 6);
    IntMatrix m(static_cast<std::size_t>(n), std::vector<long>(static_cast<std::size_t>(n)));
    for (auto& row : m)
      for (auto& x : row) x = oracle::uniform(0, 2) == 0 ? oracle::uniform(1, 3) : 0;
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>((i + 1) % n)] = 1;
    if (!is_irreducible(m)) continue;
    auto pf = pf_eigen(m);
    auto c = characteristic_polynomial(m);
    CHECK(std::abs(eval(c, pf.lambda)) < 1e-6 * std::pow(pf.lambda + 1, n));
    for (double x : pf.vec) CHECK(x > 0);
  }
}

TEST_CASE("stratification of the rank-4 example") {
  auto f = corpus::rose("examples_phi");
  auto s = compute_stratification(f);
  REQUIRE(s.strata.size() == 2);
  CHECK(s.strata[0].kind == StratumKind::EG);
  CHECK(s.strata[0].edges == std::vector<int>{2, 3});
  CHECK(std::abs(s.strata[0].lambda - kGolden) < 1e-9);
  CHECK(s.strata[1].edges == std::vector<int>{0, 1});
  CHECK(std::abs(s.strata[1].lambda - (3 + std::sqrt(5.0)) / 2) < 1e-9);
  CHECK(s.top_eg() == 1);
  // Lengths of the top stratum: a : b = (sqrt5 - 1)/2 : 1.
  const auto& len = s.strata[1].lengths;
  CHECK(std::abs(len[0] / len[1] - (std::sqrt(5.0) - 1) / 2) < 1e-9);
}

TEST_CASE("stratification of NEG maps") {
  auto id = compute_stratification(GraphSelfMap::rose(FreeAutomorphism::identity(3)));
  CHECK(id.strata.size() == 3);
  for (const auto& st : id.strata) CHECK(st.kind == StratumKind::NEGFixed);

  auto lin = compute_stratification(GraphSelfMap::rose(FreeAutomorphism::from_images("a,ba")));
  REQUIRE(lin.strata.size() == 2);
  CHECK(lin.strata[0].edges == std::vector<int>{0});
  CHECK(lin.strata[0].kind == StratumKind::NEGFixed);
  CHECK(lin.strata[1].kind == StratumKind::NEGLinear);
  CHECK(lin.strata[1].axis == Word::parse("a"));
  CHECK(lin.strata[1].exponent == 1);

  auto abc = compute_stratification(corpus::rose("linear_abc"));
  REQUIRE(abc.strata.size() == 3);
  CHECK(abc.strata[1].exponent == 1);
  CHECK(abc.strata[2].exponent == 2);
  CHECK(abc.strata[2].axis == Word::parse("a"));

  auto q = compute_stratification(corpus::rose("qep"));
  REQUIRE(q.strata.size() == 4);
  CHECK(q.strata[1].exponent == 1);
  CHECK(q.strata[2].exponent == -1);
  CHECK(q.strata[2].axis == Word::parse("a"));
  CHECK(q.strata[3].kind == StratumKind::NEGNonlinear);

  // u E pattern: f(b) = ab, read on the reversed edge.
  auto left = compute_stratification(GraphSelfMap::rose(FreeAutomorphism::from_images("a,ab")));
  CHECK(left.strata[1].kind == StratumKind::NEGLinear);
  CHECK(left.strata[1].oriented_edge == -2);

  CHECK_THROWS_AS(compute_stratification(corpus::rose("swap")), UnclassifiableStratum);
}

TEST_CASE("filtration is invariant") {
  std::vector<GraphSelfMap> maps{corpus::rose("examples_phi"), corpus::rose("linear_abc"), corpus::rose("qep"),
                                 corpus::rose("bounded_orbit_analog"), corpus::rose("fibonacci")};
  for (int t = 0; t < 30; ++t) maps.push_back(GraphSelfMap::rose(oracle::random_automorphism(3, 4)));
  int checked = 0;
  for (const auto& f : maps) {
    Stratification s;
    try {
      s = compute_stratification(f);
    } catch (const UnclassifiableStratum&) {
      continue;
    }
    ++checked;
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
      auto lower = s.filtration_edges(static_cast<int>(i));
      for (int e : lower) {
        EdgePath img = f.image(e + 1);
        for (int oe : img.letters())
          CHECK(std::binary_search(lower.begin(), lower.end(), edge_index(oe)));
      }
    }
  }
  CHECK(checked >= 5);
}

TEST_CASE("letter counts follow the squared matrix when nothing cancels") {
  for (const char* name : {"examples_phi", "fibonacci", "bounded_orbit_analog"}) {
    auto f = corpus::rose(name);
    auto m = f.transition_matrix();
    auto m2 = multiply(m, m);
    for (int e = 0; e < f.graph().num_edges(); ++e) {
      EdgePath img = f.image(e + 1);
      if (f.cancellation(img) != 0) continue;
      long col = 0;
      for (const auto& row : m2) col += row[static_cast<std::size_t>(e)];
      CHECK(static_cast<long>(f.map_path(Word::reduce({e + 1}), 2).size()) == col);
    }
  }
}

TEST_CASE("realizes and induced automorphisms") {
  auto phi = corpus::aut("examples_phi");
  auto f = GraphSelfMap::rose(phi);
  CHECK(realizes(f, phi));
  CHECK(realizes(f, compose(conjugation(4, Word::parse("a")), phi)));
  CHECK_FALSE(realizes(f, FreeAutomorphism::from_images("ab,bcab,d,c")));
  auto th = corpus::gmap("theta_swap");
  CHECK(realizes(th, FreeAutomorphism::from_images("b,a")));
  CHECK(th.induced_automorphism().rank() == 2);
}

TEST_CASE("gmap round trip and errors") {
  auto th = corpus::gmap("theta_swap");
  auto again = GraphSelfMap::parse(th.serialize());
  CHECK(again.serialize() == th.serialize());
  CHECK_THROWS_AS(GraphSelfMap::parse("rank 1\nvertices 1\nedge a 0 0 a\nvertex 0 -> 0\nimage a -> b\n"), ParseError);
  try {
    GraphSelfMap::parse("rank 1\nvertices 1\nedge a 0 0 a\nbogus\n");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  // Valence-one vertex.
  CHECK_THROWS_AS(GraphSelfMap::parse("rank 1\nvertices 2\nedge a 0 0 a\nedge s 0 1 1\nvertex 0 -> 0\nvertex 1 -> 1\n"
                                      "image a -> a\nimage s -> s\n"),
                  ParseError);
}
